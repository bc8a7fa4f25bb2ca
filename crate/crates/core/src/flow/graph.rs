//! Explicit time stepping of `w_t = √(1+|Dw|²)·F^β` on a masked grid.

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::sphere::{sphere_cap_reference, sphere_radius};
use super::{Boundary, FlowConfig, FlowError};
use crate::geometry::{field_summary, point_curvature, stencil, FieldSummary, GraphGrid, GraphState};
use crate::scalar::Real;
use crate::symfun::CurvatureSpec;

const BLOW_UP: f64 = 1e12;
const CHUNK: usize = 1024;

/// Normal speed and CFL coefficient at one interior node, or the offending
/// smallest curvature.
#[inline]
fn eval_node<T: Real>(
    grid: &GraphGrid<T>,
    w: &[T],
    k: usize,
    spec: &CurvatureSpec<T>,
    floor: T,
) -> Result<(T, T), T> {
    let n = grid.n();
    let pc = point_curvature(n, &stencil(grid, w, k));
    if !(pc.lam[0] >= floor) || pc.lam[0] <= T::zero() {
        return Err(pc.lam[0]);
    }
    let mut grad = [T::zero(); 2];
    let f = spec.function.value_grad(&pc.lam[..n], &mut grad[..n]);
    let gmax = grad[..n].iter().copied().fold(T::zero(), T::max);
    let beta = spec.beta;
    let (phi, dphi) = if beta == T::one() {
        (f, T::one())
    } else {
        let p = f.powf(beta - T::one());
        (p * f, beta * p)
    };
    Ok((pc.v * phi, pc.v * dphi * gmax * pc.det_g))
}

/// Fills `out` (aligned with `grid.interior()`) with the speed and returns
/// `(max CFL coefficient, max |rhs|)`. The reduction is order independent
/// and errors are reported for the first failing node in storage order, so
/// the outcome does not depend on the thread count.
fn evaluate<T: Real>(
    grid: &GraphGrid<T>,
    w: &[T],
    spec: &CurvatureSpec<T>,
    floor: T,
    t: T,
    out: &mut [T],
) -> Result<(T, T), FlowError> {
    let interior = grid.interior();
    let chunk_eval = |nodes: &[usize], slots: &mut [T]| -> Result<(T, T), (usize, T)> {
        let (mut cmax, mut rmax) = (T::zero(), T::zero());
        for (&k, slot) in nodes.iter().zip(slots.iter_mut()) {
            let (r, c) = eval_node(grid, w, k, spec, floor).map_err(|l| (k, l))?;
            *slot = r;
            cmax = cmax.max(c);
            rmax = rmax.max(r.abs());
        }
        Ok((cmax, rmax))
    };
    let parts: Vec<Result<(T, T), (usize, T)>> = if rayon::current_num_threads() == 1 {
        vec![chunk_eval(interior, out)]
    } else {
        interior
            .par_chunks(CHUNK)
            .zip(out.par_chunks_mut(CHUNK))
            .map(|(nodes, slots)| chunk_eval(nodes, slots))
            .collect()
    };
    let (mut cmax, mut rmax) = (T::zero(), T::zero());
    for p in parts {
        match p {
            Ok((c, r)) => {
                cmax = cmax.max(c);
                rmax = rmax.max(r);
            }
            Err((k, l)) => {
                return Err(FlowError::NonConvexState {
                    node: k,
                    x: grid.coords(k).map(|c| c.to_f64_lossy()),
                    lambda_min: l.to_f64_lossy(),
                    t: t.to_f64_lossy(),
                })
            }
        }
    }
    if !(rmax.to_f64_lossy() <= BLOW_UP) {
        return Err(FlowError::BlowUp {
            t: t.to_f64_lossy(),
            max_rhs: rmax.to_f64_lossy(),
        });
    }
    Ok((cmax, rmax))
}

/// `√(1+|Dw|²)·F^β` at every interior node (aligned with `grid.interior()`).
pub fn rhs<T: Real>(state: &GraphState<T>, spec: &CurvatureSpec<T>, lambda_floor: T) -> Result<Vec<T>, FlowError> {
    let mut out = vec![T::zero(); state.grid.interior().len()];
    evaluate(&state.grid, &state.w, spec, lambda_floor, state.t, &mut out)?;
    Ok(out)
}

fn dt_from_coef<T: Real>(grid: &GraphGrid<T>, coef: T, safety: T) -> T {
    let dx = grid.spacing();
    safety * dx * dx / (T::two() * T::from_usize_lossy(grid.n()) * coef)
}

/// `safety·Δx² / (2n·max(v·βF^{β−1}·max ḟ·(1+|Dw|²)))`.
pub fn cfl_dt<T: Real>(
    state: &GraphState<T>,
    spec: &CurvatureSpec<T>,
    safety: T,
    lambda_floor: T,
) -> Result<T, FlowError> {
    let mut out = vec![T::zero(); state.grid.interior().len()];
    let (coef, _) = evaluate(&state.grid, &state.w, spec, lambda_floor, state.t, &mut out)?;
    Ok(dt_from_coef(&state.grid, coef, safety))
}

/// Dirichlet data at time `t` for the boundary policy.
fn apply_boundary<T: Real>(config: &FlowConfig<T>, grid: &GraphGrid<T>, w: &mut [T], t: T) -> Result<(), FlowError> {
    match config.boundary {
        Boundary::Frozen => Ok(()),
        Boundary::ExactSphere { r0, center_height } => {
            let beta = config.spec.beta;
            for &k in grid.boundary() {
                w[k] = sphere_cap_reference(r0, beta, center_height, t, grid.coords(k)).map_err(|e| match e {
                    FlowError::OutsideCap { .. } => FlowError::ExtinctionReached {
                        t: t.to_f64_lossy(),
                        extinction: domain_extinction(grid, r0, beta).to_f64_lossy(),
                    },
                    other => other,
                })?;
            }
            Ok(())
        }
    }
}

/// First time at which the exact shrinking sphere no longer covers every
/// boundary node of `grid`.
pub fn domain_extinction<T: Real>(grid: &GraphGrid<T>, r0: T, beta: T) -> T {
    let rho = grid
        .boundary()
        .iter()
        .map(|&k| grid.radius_sq(k))
        .fold(T::zero(), T::max)
        .sqrt();
    let b1 = beta + T::one();
    ((r0.powf(b1) - rho.powf(b1)) / b1).max(T::zero())
}

/// Reusable buffers for midpoint steps.
pub struct Stepper<T> {
    config: FlowConfig<T>,
    k1: Vec<T>,
    k2: Vec<T>,
    mid: Vec<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(config: FlowConfig<T>, grid: &GraphGrid<T>) -> Self {
        let m = grid.interior().len();
        Self {
            config,
            k1: vec![T::zero(); m],
            k2: vec![T::zero(); m],
            mid: Vec::new(),
        }
    }

    pub fn config(&self) -> &FlowConfig<T> {
        &self.config
    }

    /// One midpoint step of size `min(CFL, max_dt)`. On error `state` is
    /// left unchanged. Returns the step taken.
    pub fn advance(&mut self, state: &mut GraphState<T>, max_dt: T) -> Result<T, FlowError> {
        let grid = state.grid.clone();
        let cfg = &self.config;
        let (coef, _) = evaluate(&grid, &state.w, &cfg.spec, cfg.lambda_floor, state.t, &mut self.k1)?;
        let dt = dt_from_coef(&grid, coef, cfg.safety).min(max_dt);
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(FlowError::BlowUp {
                t: state.t.to_f64_lossy(),
                max_rhs: f64::INFINITY,
            });
        }
        self.stages(state, &grid, dt)?;
        Ok(dt)
    }

    /// One midpoint step of the given size, ignoring the CFL bound.
    pub fn advance_fixed(&mut self, state: &mut GraphState<T>, dt: T) -> Result<(), FlowError> {
        let grid = state.grid.clone();
        let cfg = &self.config;
        evaluate(&grid, &state.w, &cfg.spec, cfg.lambda_floor, state.t, &mut self.k1)?;
        self.stages(state, &grid, dt)
    }

    fn stages(&mut self, state: &mut GraphState<T>, grid: &GraphGrid<T>, dt: T) -> Result<(), FlowError> {
        let cfg = &self.config;
        let half = dt * T::half();
        self.mid.clear();
        self.mid.extend_from_slice(&state.w);
        for (&k, &r) in grid.interior().iter().zip(&self.k1) {
            self.mid[k] = state.w[k] + half * r;
        }
        let t_half = state.t + half;
        apply_boundary(cfg, grid, &mut self.mid, t_half)?;
        evaluate(grid, &self.mid, &cfg.spec, cfg.lambda_floor, t_half, &mut self.k2)?;
        let t_new = state.t + dt;
        // Boundary data is validated before anything is committed.
        apply_boundary(cfg, grid, &mut self.mid, t_new)?;
        for &k in grid.boundary() {
            state.w[k] = self.mid[k];
        }
        for (&k, &r) in grid.interior().iter().zip(&self.k2) {
            state.w[k] = state.w[k] + dt * r;
        }
        state.t = t_new;
        Ok(())
    }
}

/// One CFL-limited midpoint step (capped so as not to pass `t_end`).
pub fn step<T: Real>(state: &GraphState<T>, config: &FlowConfig<T>) -> Result<GraphState<T>, FlowError> {
    let mut next = state.clone();
    let mut s = Stepper::new(config.clone(), &state.grid);
    s.advance(&mut next, config.t_end - state.t)?;
    Ok(next)
}

/// A quantity evaluated on every snapshot of a run.
pub trait Monitor<T: Real> {
    fn name(&self) -> String;
    /// Called on each snapshot in time order; returns the current margin.
    fn observe(&mut self, snapshot: &Snapshot<T>) -> f64;
}

#[derive(Clone, Debug)]
pub struct Snapshot<T> {
    pub step: usize,
    /// Size of the step that produced this snapshot (zero initially).
    pub dt: T,
    pub state: GraphState<T>,
    pub fields: FieldSummary<T>,
}

impl<T: Real> Snapshot<T> {
    pub fn t(&self) -> T {
        self.state.t
    }

    /// Height at the `slot`-th interior node.
    #[inline]
    pub fn w_interior(&self, slot: usize) -> T {
        self.state.w[self.state.grid.interior()[slot]]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub dt: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub max_v: f64,
    pub min_lambda_min: f64,
    #[serde(rename = "max_F")]
    pub max_f: f64,
    pub monitors: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbortRecord {
    pub t: f64,
    pub step: usize,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub config: FlowConfig<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub rows: Vec<TrajectoryRow>,
    pub monitor_names: Vec<String>,
    pub abort: Option<AbortRecord>,
    pub steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }

    pub fn last(&self) -> &Snapshot<T> {
        self.snapshots.last().expect("trajectory has an initial snapshot")
    }

    fn push(&mut self, snap: Snapshot<T>, monitors: &mut [Box<dyn Monitor<T> + '_>]) {
        let (min_w, max_w) = snap.state.range();
        let values = monitors.iter_mut().map(|m| m.observe(&snap)).collect();
        self.rows.push(TrajectoryRow {
            t: snap.t().to_f64_lossy(),
            dt: snap.dt.to_f64_lossy(),
            min_w: min_w.to_f64_lossy(),
            max_w: max_w.to_f64_lossy(),
            max_v: snap.fields.max_v().to_f64_lossy(),
            min_lambda_min: snap.fields.min_lambda_min().to_f64_lossy(),
            max_f: snap.fields.max_f().to_f64_lossy(),
            monitors: values,
        });
        self.snapshots.push(snap);
    }
}

/// Integrates from `w0` to `config.t_end`, taking a snapshot at `t = 0`,
/// every `snapshot_every` steps and at the final time. Numerical failures
/// end the run early and are recorded in `Trajectory::abort`; invalid
/// configurations and non-convex initial data are returned as errors.
pub fn run<T: Real>(
    w0: GraphState<T>,
    config: &FlowConfig<T>,
    monitors: &mut [Box<dyn Monitor<T> + '_>],
) -> Result<Trajectory<T>, FlowError> {
    config.validate()?;
    if config.spec.n != w0.grid.n() {
        return Err(FlowError::InvalidConfig(format!(
            "spec dimension {} does not match grid dimension {}",
            config.spec.n,
            w0.grid.n()
        )));
    }
    w0.validate()?;
    let mut state = w0;
    apply_boundary(config, &state.grid.clone(), &mut state.w, state.t)?;
    let fields = field_summary(&state, &config.spec, config.lambda_floor)?;
    let mut traj = Trajectory {
        config: config.clone(),
        snapshots: Vec::new(),
        rows: Vec::new(),
        monitor_names: monitors.iter().map(|m| m.name()).collect(),
        abort: None,
        steps: 0,
    };
    traj.push(
        Snapshot {
            step: 0,
            dt: T::zero(),
            state: state.clone(),
            fields,
        },
        monitors,
    );

    let mut stepper = Stepper::new(config.clone(), &state.grid);
    let mut since = 0usize;
    let end = config.t_end;
    let fail = |traj: &mut Trajectory<T>, state: &GraphState<T>, e: FlowError| {
        traj.abort = Some(AbortRecord {
            t: state.t.to_f64_lossy(),
            step: traj.steps,
            kind: e.kind().to_string(),
            message: e.to_string(),
        });
    };
    let mut last_dt = T::zero();
    while state.t < end {
        if traj.steps >= config.max_steps {
            let e = FlowError::MaxSteps {
                steps: traj.steps,
                t: state.t.to_f64_lossy(),
            };
            fail(&mut traj, &state, e);
            break;
        }
        let remaining = end - state.t;
        match stepper.advance(&mut state, remaining) {
            Ok(dt) => {
                last_dt = dt;
                traj.steps += 1;
                since += 1;
                // Land exactly on t_end when the remaining interval is a
                // rounding error.
                if end - state.t <= T::lit(1e-12) * end {
                    state.t = end;
                }
            }
            Err(e) => {
                fail(&mut traj, &state, e);
                break;
            }
        }
        if since >= config.snapshot_every || state.t >= end {
            match field_summary(&state, &config.spec, config.lambda_floor) {
                Ok(fields) => {
                    since = 0;
                    traj.push(
                        Snapshot {
                            step: traj.steps,
                            dt: last_dt,
                            state: state.clone(),
                            fields,
                        },
                        monitors,
                    );
                }
                Err(e) => {
                    fail(&mut traj, &state, e.into());
                    break;
                }
            }
        }
    }
    if traj.abort.is_some() && traj.last().step != traj.steps {
        if let Ok(fields) = field_summary(&state, &config.spec, config.lambda_floor) {
            traj.push(
                Snapshot {
                    step: traj.steps,
                    dt: last_dt,
                    state,
                    fields,
                },
                monitors,
            );
        }
    }
    Ok(traj)
}

/// Trajectory of the exact shrinking sphere sampled on `grid` at `times`,
/// with analytic fields (`v = r/√(r²−|x|²)`, `λ = 1/r`, `F = 1/r`).
pub fn exact_sphere_trajectory<T: Real>(
    grid: Arc<GraphGrid<T>>,
    spec: &CurvatureSpec<T>,
    r0: T,
    center_height: T,
    times: &[T],
) -> Result<Trajectory<T>, FlowError> {
    let t_end = *times.last().ok_or_else(|| FlowError::InvalidConfig("no sample times".into()))?;
    let mut config = FlowConfig::new(spec.clone(), t_end.max(T::min_positive_value()), Boundary::ExactSphere { r0, center_height });
    config.snapshot_every = 1;
    let mut traj = Trajectory {
        config,
        snapshots: Vec::new(),
        rows: Vec::new(),
        monitor_names: Vec::new(),
        abort: None,
        steps: 0,
    };
    let mut prev = T::zero();
    for (step, &t) in times.iter().enumerate() {
        let r = sphere_radius(r0, spec.beta, t)?;
        let mut w = vec![T::nan(); grid.len()];
        for k in 0..grid.len() {
            if grid.in_domain(k) {
                w[k] = sphere_cap_reference(r0, spec.beta, center_height, t, grid.coords(k))?;
            }
        }
        let mut fields = FieldSummary::default();
        for &k in grid.interior() {
            let s = (r * r - grid.radius_sq(k)).sqrt();
            fields.v.push(r / s);
            fields.lam_min.push(r.recip());
            fields.lam_max.push(r.recip());
            fields.f.push(r.recip());
        }
        let snap = Snapshot {
            step,
            dt: t - prev,
            state: GraphState {
                grid: grid.clone(),
                w,
                t,
            },
            fields,
        };
        prev = t;
        traj.push(snap, &mut []);
        traj.steps = step;
    }
    Ok(traj)
}

pub const TRAJECTORY_COLUMNS: &str = "t,dt,min_w,max_w,max_v,min_lambda_min,max_F";

/// One row per snapshot, followed by one column per monitor.
pub fn write_trajectory_csv<T: Real, W: Write>(out: &mut W, traj: &Trajectory<T>) -> io::Result<()> {
    write!(out, "{TRAJECTORY_COLUMNS}")?;
    for name in &traj.monitor_names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for r in &traj.rows {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.dt, r.min_w, r.max_w, r.max_v, r.min_lambda_min, r.max_f
        )?;
        for m in &r.monitors {
            write!(out, ",{m}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
