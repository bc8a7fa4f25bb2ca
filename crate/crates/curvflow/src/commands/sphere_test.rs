use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use curvflow_core::flow::{run, sphere_cap_reference, Boundary, FlowConfig};
use curvflow_core::geometry::{GraphGrid, GraphState};
use curvflow_core::symfun::parse_function;
use curvflow_core::CurvatureSpec64;

use super::{create_dir, write_file};
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct SphereTestArgs {
    pub r0: f64,
    pub beta: f64,
    pub expr: String,
    pub n: usize,
    /// Radius of the disk (half-length of the interval for `n = 1`).
    pub extent: f64,
    pub grids: Vec<usize>,
    pub t_end: f64,
    pub safety: f64,
}

impl Default for SphereTestArgs {
    fn default() -> Self {
        Self {
            r0: 1.0,
            beta: 1.0,
            expr: "mean".into(),
            n: 2,
            extent: 0.5,
            grids: vec![33, 65, 129],
            t_end: 0.2,
            safety: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub spacing: f64,
    pub steps: usize,
    pub max_error: f64,
    /// `log(e_prev/e) / log(Δx_prev/Δx)`; absent on the coarsest grid.
    pub observed_order: Option<f64>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Runs the cap of the sphere of radius `r0` centred at height `r0` with
/// exact Dirichlet data on each grid and measures the largest interior
/// error against the exact solution at `t_end`.
pub fn sphere_convergence(args: &SphereTestArgs) -> Result<Vec<ConvergenceRow>, CliError> {
    let f = parse_function::<f64>(&args.expr).map_err(|e| CliError::invalid("expr", e.to_string()))?;
    let spec = CurvatureSpec64::new(f, args.n, args.beta).map_err(|e| CliError::invalid("expr", e.to_string()))?;
    if !(args.extent > 0.0 && args.extent < args.r0) {
        return Err(CliError::invalid("extent", format!("must lie in (0, r0) = (0, {}), got {}", args.r0, args.extent)));
    }
    if args.grids.is_empty() {
        return Err(CliError::invalid("grids", "at least one grid size is required".into()));
    }
    let c = args.r0;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &nodes in &args.grids {
        let start = std::time::Instant::now();
        let grid = match args.n {
            1 => GraphGrid::interval(-args.extent, args.extent, nodes),
            2 => GraphGrid::disk(args.extent, nodes),
            n => return Err(CliError::invalid("n", format!("must be 1 or 2, got {n}"))),
        }
        .map_err(|e| CliError::invalid("grids", e.to_string()))?;
        let grid = Arc::new(grid);
        let r0 = args.r0;
        let w0 = GraphState::from_fn(grid.clone(), 0.0, |x| c - (r0 * r0 - x[0] * x[0] - x[1] * x[1]).sqrt());
        let mut fc = FlowConfig::new(spec.clone(), args.t_end, Boundary::ExactSphere { r0, center_height: c });
        fc.safety = args.safety;
        fc.snapshot_every = usize::MAX;
        let traj = run(w0, &fc, &mut []).map_err(|e| CliError::invalid("t_end", e.to_string()))?;
        if let Some(a) = &traj.abort {
            return Err(CliError::Numerical {
                kind: a.kind.clone(),
                message: format!("{} nodes: {}", nodes, a.message),
            });
        }
        let last = traj.last();
        let mut err = 0.0_f64;
        for &k in grid.interior() {
            let exact = sphere_cap_reference(r0, args.beta, c, args.t_end, grid.coords(k)).map_err(|e| {
                CliError::Numerical {
                    kind: e.kind().into(),
                    message: e.to_string(),
                }
            })?;
            err = err.max((last.state.w[k] - exact).abs());
        }
        let spacing = grid.spacing();
        let observed_order = rows
            .last()
            .map(|p| (p.max_error / err).ln() / (p.spacing / spacing).ln());
        rows.push(ConvergenceRow {
            nodes,
            spacing,
            steps: traj.steps,
            max_error: err,
            observed_order,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// [`sphere_convergence`], written to `convergence.csv` under `out`.
pub fn cmd_sphere_test(args: &SphereTestArgs, out: Option<&Path>) -> Result<Vec<ConvergenceRow>, CliError> {
    let rows = sphere_convergence(args)?;
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("convergence.csv"), |w| {
            writeln!(w, "nodes,spacing,steps,max_error,observed_order")?;
            for r in &rows {
                let order = r.observed_order.map(|o| o.to_string()).unwrap_or_default();
                writeln!(w, "{},{},{},{},{}", r.nodes, r.spacing, r.steps, r.max_error, order)?;
            }
            Ok(())
        })?;
    }
    Ok(rows)
}
