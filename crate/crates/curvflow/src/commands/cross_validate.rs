use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use curvflow_core::flow::{
    double_and_envelope, hausdorff_polylines, parallel_lower_graph, run, run_support_flow, Boundary, FlowConfig,
};
use curvflow_core::geometry::{GraphGrid, GraphState};
use curvflow_core::CurvatureSpec64;

use super::{create_dir, write_file};
use crate::error::CliError;

/// Convex even profile `w₀` with `w₀(0) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `a·x²`.
    Parabola { a: f64 },
    /// `cosh x − 1`.
    Cosh,
}

impl FromStr for Profile {
    type Err = String;

    /// `parabola`, `parabola:<a>` or `cosh`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "parabola" => Ok(Profile::Parabola { a: 1.0 }),
            None if s == "cosh" => Ok(Profile::Cosh),
            Some(("parabola", a)) => match a.parse::<f64>() {
                Ok(a) if a > 0.0 => Ok(Profile::Parabola { a }),
                _ => Err(format!("parabola coefficient must be a positive number, got `{a}`")),
            },
            _ => Err(format!("unknown profile `{s}` (parabola, parabola:<a>, cosh)")),
        }
    }
}

impl Profile {
    /// `(w₀(x), w₀'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Profile::Parabola { a } => (a * x * x, 2.0 * a * x),
            Profile::Cosh => (x.cosh() - 1.0, x.sinh()),
        }
    }

    /// Positive root of `w₀(x) = level`.
    pub fn half_width(&self, level: f64) -> f64 {
        match *self {
            Profile::Parabola { a } => (level / a).sqrt(),
            Profile::Cosh => (level + 1.0).acosh(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrossValidateArgs {
    pub profile: Profile,
    pub beta: f64,
    /// Graph grid sizes; each is paired with `nodes − 1` support directions.
    pub grids: Vec<usize>,
    pub level: f64,
    pub eps: f64,
    pub t_end: f64,
    /// Comparison window `|x| ≤ window`.
    pub window: f64,
    pub safety: f64,
}

impl Default for CrossValidateArgs {
    fn default() -> Self {
        Self {
            profile: Profile::Parabola { a: 1.0 },
            beta: 1.0,
            grids: vec![513],
            level: 1.0,
            eps: 1.0 / 64.0,
            t_end: 0.1,
            window: 0.5,
            safety: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossRow {
    pub graph_nodes: usize,
    pub support_nodes: usize,
    pub t: f64,
    pub hausdorff: f64,
    pub graph_steps: usize,
}

/// Samples of the profile used to build the closed curve.
const PROFILE_SAMPLES: usize = 16385;

/// Flows the same curve two ways and compares them on the window:
/// (1) the lower boundary of the `eps`-parallel body below `w₀` as a graph
/// over the sublevel interval, with frozen end values;
/// (2) the support function of the `eps`-envelope of `w₀` doubled across
/// `y = level`, whose lower half is the same curve near the middle.
pub fn cross_validate(args: &CrossValidateArgs) -> Result<Vec<CrossRow>, CliError> {
    let bad = |field: &str, m: String| CliError::invalid(field, m);
    if !(args.eps > 0.0 && args.level > 0.0 && args.t_end > 0.0) {
        return Err(bad("eps", "eps, level and t_end must be positive".into()));
    }
    let half = args.profile.half_width(args.level);
    if !(args.window > 0.0 && args.window < half) {
        return Err(bad("window", format!("must lie in (0, {half}), got {}", args.window)));
    }
    let spec = CurvatureSpec64::mean(1, 1.0)
        .with_beta(args.beta)
        .map_err(|e| bad("beta", e.to_string()))?;
    let prof = args.profile;
    let xs: Vec<f64> = (0..PROFILE_SAMPLES)
        .map(|i| -half + 2.0 * half * i as f64 / (PROFILE_SAMPLES - 1) as f64)
        .collect();
    let ws: Vec<f64> = xs.iter().map(|&x| prof.eval(x).0).collect();
    let numerical = |kind: &str, m: String| CliError::Numerical {
        kind: kind.into(),
        message: m,
    };

    let mut rows = Vec::new();
    for &nodes in &args.grids {
        let m = nodes.saturating_sub(1);
        let grid = Arc::new(GraphGrid::interval(-half, half, nodes).map_err(|e| bad("grids", e.to_string()))?);
        let w0 = GraphState::from_fn(grid.clone(), 0.0, |x| parallel_lower_graph(|s| prof.eval(s), args.eps, x[0]));
        let mut fc = FlowConfig::new(spec.clone(), args.t_end, Boundary::Frozen);
        fc.safety = args.safety;
        fc.snapshot_every = usize::MAX;
        let traj = run(w0, &fc, &mut []).map_err(|e| bad("profile", e.to_string()))?;
        if let Some(a) = &traj.abort {
            return Err(numerical(&a.kind, format!("graph run on {nodes} nodes: {}", a.message)));
        }

        let curve = double_and_envelope(&xs, &ws, args.level, args.eps, m, args.beta)
            .map_err(|e| numerical(e.kind(), e.to_string()))?;
        let curve = run_support_flow(&curve, args.t_end, args.safety, usize::MAX)
            .map_err(|e| numerical(e.kind(), format!("support run on {m} directions: {e}")))?;

        let (lo, hi) = curve
            .points()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
        if !(lo < -args.window && args.window < hi) {
            return Err(bad(
                "window",
                format!("the flowed curve spans [{lo}, {hi}] at t_end, which does not cover |x| <= {}", args.window),
            ));
        }

        let last = traj.last();
        let mut graph_pts = Vec::new();
        let mut support_pts = Vec::new();
        for &k in grid.interior().iter().chain(grid.boundary()) {
            let x = grid.coords(k)[0];
            if x.abs() <= args.window {
                graph_pts.push([x, last.state.w[k]]);
                support_pts.push([x, curve.lower_graph(x)]);
            }
        }
        graph_pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        support_pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        rows.push(CrossRow {
            graph_nodes: nodes,
            support_nodes: m,
            t: args.t_end,
            hausdorff: hausdorff_polylines(&graph_pts, &support_pts),
            graph_steps: traj.steps,
        });
    }
    Ok(rows)
}

/// [`cross_validate`], written to `cross_validation.csv` under `out`.
pub fn cmd_cross_validate(args: &CrossValidateArgs, out: Option<&Path>) -> Result<Vec<CrossRow>, CliError> {
    let rows = cross_validate(args)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("cross_validation.csv"), |w| {
            writeln!(w, "graph_nodes,support_nodes,t,hausdorff,graph_steps")?;
            for r in &rows {
                writeln!(w, "{},{},{},{},{}", r.graph_nodes, r.support_nodes, r.t, r.hausdorff, r.graph_steps)?;
            }
            Ok(())
        })?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_parsing() {
        assert_eq!("parabola".parse::<Profile>().unwrap(), Profile::Parabola { a: 1.0 });
        assert_eq!("parabola:2.5".parse::<Profile>().unwrap(), Profile::Parabola { a: 2.5 });
        assert_eq!("cosh".parse::<Profile>().unwrap(), Profile::Cosh);
        assert!("parabola:-1".parse::<Profile>().is_err());
        assert!("circle".parse::<Profile>().is_err());
    }

    #[test]
    fn half_width_solves_level() {
        for p in [Profile::Parabola { a: 3.0 }, Profile::Cosh] {
            let x = p.half_width(0.7);
            assert!((p.eval(x).0 - 0.7).abs() < 1e-12);
        }
    }
}
