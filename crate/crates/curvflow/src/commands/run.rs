use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use curvflow_core::estimates::{
    comparison_check, monitor_gradient_estimate, monitor_lambda_min, monitor_speed_bound, EstimateError,
    GradientMonitor, LambdaMinMonitor, MonitorReport, SpeedBoundMonitor,
};
use curvflow_core::flow::{run, write_trajectory_csv, AbortRecord, Boundary, FlowConfig, Monitor};
use curvflow_core::geometry::{write_snapshot_csv, GraphGrid, GraphState, SnapshotHeader};
use curvflow_core::{FlowConfig64, GraphGrid64, GraphState64, Trajectory64};

use super::{create_dir, tool_info, write_file, ToolInfo};
use crate::config::{
    BoundaryKind, GridSection, InitialProfile, MaskShape, MonitorKind, OutputFormat,
    RunConfig,
};
use crate::error::{CliError, EXIT_MONITOR, EXIT_NUMERICAL, EXIT_OK};

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub step: usize,
    pub header: SnapshotHeader,
}

/// Everything needed to reproduce a run and read its outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: ToolInfo,
    pub command: &'static str,
    pub seed: u64,
    /// Configuration text exactly as given.
    pub config_text: String,
    pub config: RunConfig,
    pub status: &'static str,
    pub exit_code: i32,
    pub steps: usize,
    pub t_final: f64,
    pub abort: Option<AbortRecord>,
    pub monitors: Vec<MonitorReport>,
    pub files: Vec<String>,
    pub snapshots: Vec<SnapshotEntry>,
    pub threads: usize,
    pub wall_time_s: f64,
}

pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub out_dir: PathBuf,
    pub trajectory: Trajectory64,
}

pub fn build_grid(g: &GridSection) -> Result<GraphGrid64, CliError> {
    let grid = match g.shape {
        MaskShape::Interval => GraphGrid::interval(-g.extent, g.extent, g.nodes),
        MaskShape::Disk => GraphGrid::disk(g.extent, g.nodes),
        MaskShape::Square => GraphGrid::square(g.extent, g.nodes),
    };
    grid.map_err(|e| CliError::invalid("grid", e.to_string()))
}

/// Reads heights from a CSV whose header names columns `i`, `j` (optional
/// for curves) and `w`.
fn read_table(grid: &Arc<GraphGrid64>, path: &Path) -> Result<GraphState64, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(ci), Some(cw)) = (col("i"), col("w")) else {
        return Err(CliError::invalid("initial.file", "table needs columns `i` and `w`".into()));
    };
    let cj = col("j");
    let mut w = vec![f64::NAN; grid.len()];
    let [nx, ny] = grid.shape();
    for (lineno, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || CliError::invalid("initial.file", format!("malformed row {}: `{line}`", lineno + 2));
        let get = |c: usize| cells.get(c).ok_or_else(bad);
        let i: usize = get(ci)?.parse().map_err(|_| bad())?;
        let j: usize = match cj {
            Some(c) => get(c)?.parse().map_err(|_| bad())?,
            None => 0,
        };
        let value: f64 = get(cw)?.parse().map_err(|_| bad())?;
        if i >= nx || j >= ny {
            return Err(CliError::invalid("initial.file", format!("node ({i}, {j}) lies outside the grid")));
        }
        w[grid.index(i, j)] = value;
    }
    let missing = (0..grid.len())
        .filter(|&k| grid.in_domain(k) && !w[k].is_finite())
        .count();
    if missing > 0 {
        return Err(CliError::invalid(
            "initial.file",
            format!("{missing} grid node(s) in the domain have no finite height"),
        ));
    }
    for (k, value) in w.iter_mut().enumerate() {
        if !grid.in_domain(k) {
            *value = f64::NAN;
        }
    }
    Ok(GraphState {
        grid: grid.clone(),
        w,
        t: 0.0,
    })
}

pub fn initial_state(cfg: &RunConfig) -> Result<GraphState64, CliError> {
    let grid = Arc::new(build_grid(&cfg.grid)?);
    match &cfg.initial {
        InitialProfile::SphereCap { r0, center_height } => {
            let (r0, c) = (*r0, *center_height);
            Ok(GraphState::from_fn(grid, 0.0, |x| c - (r0 * r0 - x[0] * x[0] - x[1] * x[1]).sqrt()))
        }
        InitialProfile::Paraboloid { a } => {
            let a = *a;
            Ok(GraphState::from_fn(grid, 0.0, |x| 0.5 * a * (x[0] * x[0] + x[1] * x[1])))
        }
        InitialProfile::Table { file } => read_table(&grid, file),
    }
}

pub fn flow_config(cfg: &RunConfig) -> FlowConfig64 {
    let boundary = match (cfg.flow.boundary, &cfg.initial) {
        (BoundaryKind::ExactSphere, InitialProfile::SphereCap { r0, center_height }) => Boundary::ExactSphere {
            r0: *r0,
            center_height: *center_height,
        },
        _ => Boundary::Frozen,
    };
    let mut fc = FlowConfig::new(cfg.spec.clone(), cfg.flow.t_end, boundary);
    fc.safety = cfg.flow.safety;
    fc.lambda_floor = cfg.flow.lambda_floor;
    fc.max_steps = cfg.flow.max_steps;
    fc.snapshot_every = cfg.output.snapshot_every;
    fc
}

/// Final reports of the enabled monitors over the whole trajectory.
pub fn monitor_reports(cfg: &RunConfig, traj: &Trajectory64) -> Result<Vec<MonitorReport>, CliError> {
    let m = &cfg.monitors;
    let mut out = Vec::new();
    let wrap = |e: EstimateError| match e {
        EstimateError::NotEnclosedInitially { .. } => CliError::invalid("monitors.comparison_r0", e.to_string()),
        other => CliError::invalid("monitors", other.to_string()),
    };
    for kind in &m.enabled {
        let report = match kind {
            MonitorKind::GradientEstimate => monitor_gradient_estimate(traj, m.cutoff.as_ref().expect("validated")),
            MonitorKind::LambdaMin => monitor_lambda_min(traj, m.cutoff.as_ref().expect("validated")),
            MonitorKind::SpeedBound => monitor_speed_bound(traj, m.cutoff.expect("validated").r),
            MonitorKind::Comparison => comparison_check(
                traj,
                m.comparison_r0.expect("validated"),
                m.comparison_center.expect("validated"),
            ),
        }
        .map_err(wrap)?;
        out.push(report);
    }
    Ok(out)
}

/// The local estimates concern a complete graph, so the cutoff support
/// `{u ≤ R}` must stay away from the grid edge. Boundary heights never
/// decrease under either boundary rule, so checking `t = 0` suffices.
fn check_cutoff_interior(cfg: &RunConfig, state: &GraphState64) -> Result<(), CliError> {
    let Some(p) = cfg.monitors.cutoff else {
        return Ok(());
    };
    let uses_cutoff = cfg.monitors.enabled.iter().any(|k| *k != MonitorKind::Comparison);
    let rim = state
        .grid
        .boundary()
        .iter()
        .map(|&k| state.w[k])
        .fold(f64::INFINITY, f64::min);
    if uses_cutoff && rim <= p.r {
        return Err(CliError::invalid(
            "monitors.R",
            format!("cutoff region {{u <= R}} reaches the grid boundary: R = {}, lowest boundary height {rim}", p.r),
        ));
    }
    Ok(())
}

/// Integrates the configured flow, writes the trajectory table, optional
/// field snapshots and `manifest.json` into `out_dir`, and returns the exit
/// code: 0 on success, 2 on a numerical abort, 3 if a monitor failed.
pub fn cmd_run(cfg: &RunConfig, config_text: &str, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let state = initial_state(cfg)?;
    check_cutoff_interior(cfg, &state)?;
    let fc = flow_config(cfg);
    let beta = cfg.spec.beta;
    let mut streaming: Vec<Box<dyn Monitor<f64>>> = Vec::new();
    if let Some(p) = cfg.monitors.cutoff {
        for kind in &cfg.monitors.enabled {
            match kind {
                MonitorKind::GradientEstimate => streaming.push(Box::new(GradientMonitor::new(p, beta))),
                MonitorKind::LambdaMin => streaming.push(Box::new(LambdaMinMonitor::new(p))),
                MonitorKind::SpeedBound => streaming.push(Box::new(SpeedBoundMonitor::new(p.r, beta))),
                MonitorKind::Comparison => {}
            }
        }
    }
    let traj = run(state, &fc, &mut streaming).map_err(|e| match e {
        curvflow_core::flow::FlowError::InvalidConfig(m) => CliError::invalid("flow", m),
        // Anything else rejected before the first step is a problem with
        // the initial data.
        other => CliError::invalid("initial", other.to_string()),
    })?;
    drop(streaming);
    let reports = monitor_reports(cfg, &traj)?;

    create_dir(out_dir)?;
    let mut files = Vec::new();
    if cfg.output.formats.contains(&OutputFormat::Trajectory) {
        let path = out_dir.join("trajectory.csv");
        write_file(&path, |w| write_trajectory_csv(w, &traj))?;
        files.push("trajectory.csv".to_string());
    }
    let mut snapshots = Vec::new();
    if cfg.output.formats.contains(&OutputFormat::Fields) {
        let dir = out_dir.join("snapshots");
        create_dir(&dir)?;
        for snap in &traj.snapshots {
            let name = format!("snapshots/fields_{:08}.csv", snap.step);
            write_file(&out_dir.join(&name), |w| write_snapshot_csv(w, &snap.state, &snap.fields))?;
            snapshots.push(SnapshotEntry {
                file: name.clone(),
                step: snap.step,
                header: SnapshotHeader::new(&snap.state, &cfg.spec),
            });
            files.push(name);
        }
    }

    let failed: Vec<MonitorReport> = reports.iter().filter(|r| !r.pass).cloned().collect();
    let (status, exit_code) = if traj.abort.is_some() {
        ("aborted", EXIT_NUMERICAL)
    } else if !failed.is_empty() {
        ("monitor_failure", EXIT_MONITOR)
    } else {
        ("completed", EXIT_OK)
    };
    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: tool_info(),
        command: "run",
        seed: cfg.seed,
        config_text: config_text.to_string(),
        config: cfg.clone(),
        status,
        exit_code,
        steps: traj.steps,
        t_final: traj.last().t(),
        abort: traj.abort.clone(),
        monitors: reports,
        files,
        snapshots,
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = out_dir.join("manifest.json");
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    Ok(RunOutcome {
        exit_code,
        manifest,
        out_dir: out_dir.to_path_buf(),
        trajectory: traj,
    })
}

/// Error to report for a finished run with a nonzero exit code.
pub fn outcome_error(outcome: &RunOutcome) -> Option<CliError> {
    match outcome.exit_code {
        EXIT_NUMERICAL => outcome.manifest.abort.as_ref().map(|a| CliError::Numerical {
            kind: a.kind.clone(),
            message: a.message.clone(),
        }),
        EXIT_MONITOR => Some(CliError::MonitorFailure(
            outcome.manifest.monitors.iter().filter(|r| !r.pass).cloned().collect(),
        )),
        _ => None,
    }
}
