//! Run configuration: a TOML document with sections `[function]`, `[grid]`,
//! `[initial]`, `[flow]`, `[monitors]` and `[output]`.
//!
//! Parsing never stops at the first problem. Every invalid or unknown field
//! is collected and reported together.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

use curvflow_core::estimates::CutoffParams;
use curvflow_core::symfun::parse_function;
use curvflow_core::CurvatureSpec64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldError {
    /// Dotted path such as `flow.t_end`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
    #[error("{} invalid field(s): {}", .errors.len(), join(.errors))]
    ValidationError { errors: Vec<FieldError> },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn join(errors: &[FieldError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskShape {
    Disk,
    Square,
    Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSection {
    pub n: usize,
    pub nodes: usize,
    pub extent: f64,
    pub shape: MaskShape,
}

impl GridSection {
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.nodes - 1) as f64
    }

    /// Largest distance from the origin of a point of the domain.
    pub fn max_radius(&self) -> f64 {
        match self.shape {
            MaskShape::Disk | MaskShape::Interval => self.extent,
            MaskShape::Square => self.extent * std::f64::consts::SQRT_2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum InitialProfile {
    /// Lower cap `c − √(r₀² − |x|²)`.
    SphereCap { r0: f64, center_height: f64 },
    /// `a|x|²/2`.
    Paraboloid { a: f64 },
    /// Heights read from a CSV with columns `i`, `j` and `w` (a snapshot
    /// table is accepted as is).
    Table { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    ExactSphere,
    Frozen,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowSection {
    pub t_end: f64,
    pub safety: f64,
    pub boundary: BoundaryKind,
    pub lambda_floor: f64,
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    GradientEstimate,
    LambdaMin,
    SpeedBound,
    Comparison,
}

impl MonitorKind {
    const ALL: [(&'static str, MonitorKind); 4] = [
        ("gradient_estimate", MonitorKind::GradientEstimate),
        ("lambda_min", MonitorKind::LambdaMin),
        ("speed_bound", MonitorKind::SpeedBound),
        ("comparison", MonitorKind::Comparison),
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorSection {
    pub enabled: Vec<MonitorKind>,
    /// Cutoff parameters; unused entries hold placeholders.
    pub cutoff: Option<CutoffParams<f64>>,
    pub comparison_r0: Option<f64>,
    pub comparison_center: Option<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Trajectory,
    Fields,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub snapshot_every: usize,
    pub formats: Vec<OutputFormat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub expr: String,
    pub spec: CurvatureSpec64,
    pub grid: GridSection,
    pub initial: InitialProfile,
    pub flow: FlowSection,
    pub monitors: MonitorSection,
    pub output: OutputSection,
}

/// Reads and validates a configuration file. Relative paths inside it are
/// resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<(RunConfig, String), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = parse_config(&text, base)?;
    Ok((cfg, text))
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Section reader that records every problem and remembers which keys were
/// consumed so leftovers can be reported as unknown.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
    errors: &'a mut Vec<FieldError>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, errors: &'a mut Vec<FieldError>) -> Self {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                errors.push(FieldError {
                    field: name.into(),
                    message: "must be a table".into(),
                });
                None
            }
        };
        Self {
            name,
            table,
            used: BTreeSet::new(),
            errors,
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn error(&mut self, key: &str, message: impl Into<String>) {
        let field = self.path(key);
        self.errors.push(FieldError {
            field,
            message: message.into(),
        });
    }

    fn present(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.table.and_then(|t| t.get(key))
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.error(key, "must be a number");
                None
            }
        }
    }

    fn required_f64(&mut self, key: &str) -> Option<f64> {
        if !self.present(key) {
            self.error(key, "is required");
            self.used.insert(key.to_string());
            return None;
        }
        self.f64(key)
    }

    fn usize(&mut self, key: &str) -> Option<usize> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            _ => {
                self.error(key, "must be a nonnegative integer");
                None
            }
        }
    }

    fn str(&mut self, key: &str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                self.error(key, "must be a string");
                None
            }
        }
    }

    fn strings(&mut self, key: &str) -> Option<Vec<&'a str>> {
        match self.raw(key)? {
            Value::Array(a) => {
                let out: Option<Vec<&str>> = a.iter().map(|v| v.as_str()).collect();
                if out.is_none() {
                    self.error(key, "must be an array of strings");
                }
                out
            }
            _ => {
                self.error(key, "must be an array of strings");
                None
            }
        }
    }

    fn numbers(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.raw(key)? {
            Value::Array(a) => {
                let out: Option<Vec<f64>> = a
                    .iter()
                    .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
                    .collect();
                if out.is_none() {
                    self.error(key, "must be an array of numbers");
                }
                out
            }
            _ => {
                self.error(key, "must be an array of numbers");
                None
            }
        }
    }

    /// Reports keys that were never read.
    fn finish(self) {
        if let Some(t) = self.table {
            for key in t.keys().filter(|k| !self.used.contains(*k)) {
                self.errors.push(FieldError {
                    field: format!("{}.{}", self.name, key),
                    message: "unknown field".into(),
                });
            }
        }
    }
}

fn check(errors: &mut Vec<FieldError>, ok: bool, field: &str, message: impl Into<String>) -> bool {
    if !ok {
        errors.push(FieldError {
            field: field.into(),
            message: message.into(),
        });
    }
    ok
}

/// Parses and validates a configuration document; `base` anchors relative
/// paths.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let root: Table = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::ParseError {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let mut errors = Vec::new();
    const SECTIONS: [&str; 6] = ["function", "grid", "initial", "flow", "monitors", "output"];
    let mut seed = 0u64;
    for (key, value) in &root {
        if key == "seed" {
            match value.as_integer() {
                Some(s) if s >= 0 => seed = s as u64,
                _ => errors.push(FieldError {
                    field: "seed".into(),
                    message: "must be a nonnegative integer".into(),
                }),
            }
        } else if !SECTIONS.contains(&key.as_str()) {
            errors.push(FieldError {
                field: key.clone(),
                message: "unknown section".into(),
            });
        }
    }
    for name in ["function", "grid", "initial", "flow"] {
        if !root.contains_key(name) {
            errors.push(FieldError {
                field: name.into(),
                message: "section is required".into(),
            });
        }
    }

    // [grid] first: the function needs the dimension.
    let mut s = Section::new(&root, "grid", &mut errors);
    let n = s.usize("n").unwrap_or(2);
    let extent = s.f64("extent");
    let nodes = s.usize("nodes");
    let spacing = s.f64("spacing");
    let shape = s.str("shape").map(str::to_string);
    s.finish();
    let grid_ok = check(&mut errors, n == 1 || n == 2, "grid.n", format!("must be 1 or 2, got {n}"));
    let extent_ok = match extent {
        Some(e) => check(&mut errors, e > 0.0 && e.is_finite(), "grid.extent", format!("must be positive, got {e}")),
        None => {
            errors.push(FieldError {
                field: "grid.extent".into(),
                message: "is required".into(),
            });
            false
        }
    };
    let extent = extent.unwrap_or(f64::NAN);
    let nodes = match (nodes, spacing) {
        (Some(m), None) => Some(m),
        (None, Some(h)) => {
            let m = 2.0 * extent / h;
            if h > 0.0 && (m - m.round()).abs() <= 1e-9 * m.max(1.0) {
                Some(m.round() as usize + 1)
            } else {
                errors.push(FieldError {
                    field: "grid.spacing".into(),
                    message: format!("must divide 2·extent = {} into whole cells, got {h}", 2.0 * extent),
                });
                None
            }
        }
        (Some(_), Some(_)) => {
            errors.push(FieldError {
                field: "grid.nodes".into(),
                message: "give either nodes or spacing, not both".into(),
            });
            None
        }
        (None, None) => {
            errors.push(FieldError {
                field: "grid.nodes".into(),
                message: "is required (or give grid.spacing)".into(),
            });
            None
        }
    };
    let nodes_ok = nodes.map_or(false, |m| check(&mut errors, m >= 5, "grid.nodes", format!("must be at least 5, got {m}")));
    let shape = match (shape.as_deref(), n) {
        (None, 1) | (Some("interval"), 1) => Some(MaskShape::Interval),
        (None, _) | (Some("disk"), 2) => Some(MaskShape::Disk),
        (Some("square"), 2) => Some(MaskShape::Square),
        (Some(other), _) => {
            errors.push(FieldError {
                field: "grid.shape".into(),
                message: format!("`{other}` is not a valid shape for n = {n} (disk, square for n = 2; interval for n = 1)"),
            });
            None
        }
    };
    let grid = (grid_ok && extent_ok && nodes_ok)
        .then_some(())
        .and(shape)
        .map(|shape| GridSection {
            n,
            nodes: nodes.unwrap_or(0),
            extent,
            shape,
        });

    // [function]
    let mut s = Section::new(&root, "function", &mut errors);
    let expr = s.str("expr").map(str::to_string);
    let beta = s.f64("beta").unwrap_or(1.0);
    if !s.present("expr") {
        s.error("expr", "is required");
    }
    s.finish();
    let beta_ok = check(
        &mut errors,
        beta >= 1.0 && beta.is_finite(),
        "function.beta",
        format!("beta must be ≥ 1, got {beta}"),
    );
    let mut spec = None;
    if let Some(e) = &expr {
        match parse_function::<f64>(e) {
            Ok(f) => match f.validate(n) {
                Ok(()) if beta_ok => spec = Some(CurvatureSpec64 { function: f, n, beta }),
                Ok(()) => {}
                Err(err) => errors.push(FieldError {
                    field: "function.expr".into(),
                    message: err.to_string(),
                }),
            },
            Err(err) => errors.push(FieldError {
                field: "function.expr".into(),
                message: err.to_string(),
            }),
        }
    }

    // [initial]
    let mut s = Section::new(&root, "initial", &mut errors);
    let profile = s.str("profile");
    let initial = match profile {
        Some("sphere_cap") => {
            let r0 = s.required_f64("r0");
            let c = s.f64("center_height").or(r0);
            match (r0, c) {
                (Some(r0), Some(c)) if r0 > 0.0 => Some(InitialProfile::SphereCap { r0, center_height: c }),
                (Some(r0), _) => {
                    s.error("r0", format!("must be positive, got {r0}"));
                    None
                }
                _ => None,
            }
        }
        Some("paraboloid") => {
            let a = s.f64("a").unwrap_or(1.0);
            if a > 0.0 {
                Some(InitialProfile::Paraboloid { a })
            } else {
                s.error("a", format!("must be positive, got {a}"));
                None
            }
        }
        Some("table") => match s.str("file") {
            Some(f) => {
                let path = base.join(f);
                if path.is_file() {
                    Some(InitialProfile::Table { file: path })
                } else {
                    s.error("file", format!("{} does not exist", path.display()));
                    None
                }
            }
            None => {
                s.error("file", "is required for profile = \"table\"");
                None
            }
        },
        Some(other) => {
            s.error("profile", format!("unknown profile `{other}` (sphere_cap, paraboloid, table)"));
            None
        }
        None => {
            if s.table.is_some() {
                s.error("profile", "is required");
            }
            None
        }
    };
    s.finish();
    if let (Some(InitialProfile::SphereCap { r0, .. }), Some(g)) = (&initial, &grid) {
        check(
            &mut errors,
            g.max_radius() < *r0,
            "initial.r0",
            format!("sphere of radius {r0} does not cover the grid (needs > {})", g.max_radius()),
        );
    }

    // [flow]
    let mut s = Section::new(&root, "flow", &mut errors);
    let t_end = s.required_f64("t_end");
    let safety = s.f64("safety").unwrap_or(0.5);
    let lambda_floor = s.f64("lambda_floor").unwrap_or(1e-10);
    let max_steps = s.usize("max_steps").unwrap_or(50_000_000);
    let boundary = match s.str("boundary").unwrap_or("frozen") {
        "frozen" => Some(BoundaryKind::Frozen),
        "exact_sphere" => Some(BoundaryKind::ExactSphere),
        other => {
            s.error("boundary", format!("unknown boundary `{other}` (frozen, exact_sphere)"));
            None
        }
    };
    s.finish();
    if let Some(t) = t_end {
        check(&mut errors, t > 0.0 && t.is_finite(), "flow.t_end", format!("must be positive, got {t}"));
    }
    check(
        &mut errors,
        safety > 0.0 && safety <= 1.0,
        "flow.safety",
        format!("must lie in (0, 1], got {safety}"),
    );
    check(
        &mut errors,
        lambda_floor >= 0.0,
        "flow.lambda_floor",
        format!("must be nonnegative, got {lambda_floor}"),
    );
    check(&mut errors, max_steps > 0, "flow.max_steps", "must be positive");
    if boundary == Some(BoundaryKind::ExactSphere) && initial.is_some() {
        check(
            &mut errors,
            matches!(initial, Some(InitialProfile::SphereCap { .. })),
            "flow.boundary",
            "exact_sphere requires initial.profile = \"sphere_cap\"",
        );
    }

    // [monitors]
    let mut s = Section::new(&root, "monitors", &mut errors);
    let names = s.strings("enabled").unwrap_or_default();
    let r = s.f64("R");
    let gamma = s.f64("gamma");
    let sigma = s.f64("sigma");
    let comparison_r0 = s.f64("comparison_r0");
    let comparison_center = s.numbers("comparison_center");
    let mut enabled = Vec::new();
    for name in names {
        match MonitorKind::ALL.iter().find(|(k, _)| *k == name) {
            Some((_, kind)) if !enabled.contains(kind) => enabled.push(*kind),
            Some(_) => {}
            None => s.error("enabled", format!("unknown monitor `{name}`")),
        }
    }
    enabled.sort();
    let needs = |k| enabled.contains(&k);
    let cutoff_needed = needs(MonitorKind::GradientEstimate) || needs(MonitorKind::LambdaMin) || needs(MonitorKind::SpeedBound);
    let mut cutoff = None;
    if cutoff_needed {
        match r {
            None => s.error("R", "is required by the enabled monitors"),
            Some(r) => {
                if needs(MonitorKind::GradientEstimate) && gamma.is_none() {
                    s.error("gamma", "is required by gradient_estimate");
                }
                if needs(MonitorKind::LambdaMin) && sigma.is_none() {
                    s.error("sigma", "is required by lambda_min");
                }
                match CutoffParams::new(r, gamma.unwrap_or(r), sigma.unwrap_or(0.5)) {
                    Ok(p) => cutoff = Some(p),
                    Err(e) => {
                        let field = if r > 0.0 && r.is_finite() {
                            if gamma.is_some_and(|g| !(g > 0.0 && g <= r)) {
                                "gamma"
                            } else {
                                "sigma"
                            }
                        } else {
                            "R"
                        };
                        s.error(field, e.to_string());
                    }
                }
            }
        }
    }
    let mut center = None;
    if needs(MonitorKind::Comparison) {
        match comparison_r0 {
            Some(r0) if r0 > 0.0 => {}
            Some(r0) => s.error("comparison_r0", format!("must be positive, got {r0}")),
            None => s.error("comparison_r0", "is required by comparison"),
        }
        match comparison_center.as_deref() {
            Some([a, b, c]) => center = Some([*a, *b, *c]),
            Some(_) => s.error("comparison_center", "must have three entries (x1, x2, height)"),
            None => s.error("comparison_center", "is required by comparison"),
        }
    }
    s.finish();
    let monitors = MonitorSection {
        enabled,
        cutoff,
        comparison_r0,
        comparison_center: center,
    };

    // [output]
    let mut s = Section::new(&root, "output", &mut errors);
    let directory = base.join(s.str("directory").unwrap_or("curvflow-out"));
    let snapshot_every = s.usize("snapshot_every").unwrap_or(100);
    let mut formats = vec![];
    for f in s.strings("formats").unwrap_or_else(|| vec!["trajectory"]) {
        match f {
            "trajectory" => formats.push(OutputFormat::Trajectory),
            "fields" => formats.push(OutputFormat::Fields),
            other => s.error("formats", format!("unknown format `{other}` (trajectory, fields)")),
        }
    }
    if snapshot_every == 0 {
        s.error("snapshot_every", "must be at least 1");
    }
    s.finish();

    if !errors.is_empty() {
        return Err(ConfigError::ValidationError { errors });
    }
    Ok(RunConfig {
        seed,
        expr: expr.expect("validated"),
        spec: spec.expect("validated"),
        grid: grid.expect("validated"),
        initial: initial.expect("validated"),
        flow: FlowSection {
            t_end: t_end.expect("validated"),
            safety,
            boundary: boundary.expect("validated"),
            lambda_floor,
            max_steps,
        },
        monitors,
        output: OutputSection {
            directory,
            snapshot_every,
            formats,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[function]
expr = "mean"
beta = 1.0

[grid]
n = 2
nodes = 33
extent = 0.5

[initial]
profile = "sphere_cap"
r0 = 1.0

[flow]
t_end = 0.1
boundary = "exact_sphere"
"#;

    fn errors_of(text: &str) -> Vec<FieldError> {
        match parse_config(text, Path::new(".")) {
            Err(ConfigError::ValidationError { errors }) => errors,
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_sphere_cap_document() {
        let cfg = parse_config(MINIMAL, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.grid.nodes, 33);
        assert_eq!(cfg.grid.shape, MaskShape::Disk);
        assert!(matches!(cfg.initial, InitialProfile::SphereCap { r0, center_height } if r0 == 1.0 && center_height == 1.0));
        assert_eq!(cfg.flow.boundary, BoundaryKind::ExactSphere);
        assert_eq!(cfg.output.directory, Path::new("/tmp/curvflow-out"));
        assert!(cfg.monitors.enabled.is_empty());
    }

    #[test]
    fn beta_below_one_is_rejected() {
        let errs = errors_of(&MINIMAL.replace("beta = 1.0", "beta = 0.5"));
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "function.beta");
        assert!(errs[0].message.contains("beta must be ≥ 1"));
    }

    #[test]
    fn product_weights_must_sum_to_one() {
        let errs = errors_of(&MINIMAL.replace("\"mean\"", "\"product(gauss^0.5, mean^0.4)\""));
        assert_eq!(errs[0].field, "function.expr");
        assert!(errs[0].message.contains("sum to 1"), "{}", errs[0].message);
    }

    #[test]
    fn all_errors_are_reported() {
        let text = MINIMAL
            .replace("beta = 1.0", "beta = 0.2")
            .replace("t_end = 0.1", "t_end = -1")
            .replace("nodes = 33", "nodes = 33\nbogus = 1");
        let errs = errors_of(&text);
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"function.beta"));
        assert!(fields.contains(&"flow.t_end"));
        assert!(fields.contains(&"grid.bogus"));
    }

    #[test]
    fn parse_error_has_position() {
        let text = "[function]\nexpr = \"mean\"\nbeta = = 1\n";
        match parse_config(text, Path::new(".")) {
            Err(ConfigError::ParseError { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column >= 6, "{column}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spacing_alternative_to_nodes() {
        let cfg = parse_config(&MINIMAL.replace("nodes = 33", "spacing = 0.03125"), Path::new(".")).unwrap();
        assert_eq!(cfg.grid.nodes, 33);
        let errs = errors_of(&MINIMAL.replace("nodes = 33", "spacing = 0.3"));
        assert_eq!(errs[0].field, "grid.spacing");
    }

    #[test]
    fn monitor_parameters_are_checked() {
        let text = format!("{MINIMAL}\n[monitors]\nenabled = [\"gradient_estimate\", \"lambda_min\"]\nR = 0.2\ngamma = 0.5\n");
        let errs = errors_of(&text);
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"monitors.sigma"), "{errs:?}");
        assert!(fields.contains(&"monitors.gamma"), "{errs:?}");
    }

    #[test]
    fn exact_sphere_needs_sphere_cap() {
        let text = MINIMAL.replace("profile = \"sphere_cap\"\nr0 = 1.0", "profile = \"paraboloid\"");
        let errs = errors_of(&text);
        assert_eq!(errs[0].field, "flow.boundary");
    }

    #[test]
    fn sphere_must_cover_the_grid() {
        let errs = errors_of(&MINIMAL.replace("extent = 0.5", "extent = 1.5"));
        assert_eq!(errs[0].field, "initial.r0");
    }
}
