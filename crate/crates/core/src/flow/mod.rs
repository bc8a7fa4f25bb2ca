//! Time integration of the graph flow, the exact shrinking-sphere solution,
//! and the support-function flow of closed convex curves.

mod graph;
mod sphere;
mod support;

pub use graph::{
    cfl_dt, domain_extinction, exact_sphere_trajectory, rhs, run, step, write_trajectory_csv,
    AbortRecord, Monitor, Snapshot, Stepper, Trajectory, TrajectoryRow, TRAJECTORY_COLUMNS,
};
pub use sphere::{extinction_time, sphere_cap_reference, sphere_cap_time_derivative, sphere_radius};
pub use support::{
    collapse_time, double_and_envelope, hausdorff_polylines, parallel_lower_graph, run_support_flow,
    support_cfl_dt, support_flow_step, CollapseReport, SupportCurve, MIN_SUPPORT_NODES,
};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::scalar::Real;
use crate::symfun::CurvatureSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(
        "state is not strictly convex: lambda_min = {lambda_min:e} at node {node} (x = {x:?}, t = {t})"
    )]
    NonConvexState {
        node: usize,
        x: [f64; 2],
        lambda_min: f64,
        t: f64,
    },
    #[error("speed exceeded the blow-up threshold at t = {t}: max rhs = {max_rhs:e}")]
    BlowUp { t: f64, max_rhs: f64 },
    /// The exact sphere no longer exists on the computational domain at `t`.
    /// `extinction` is the time it stops covering the domain (the extinction
    /// time itself for point queries).
    #[error("exact sphere solution ended at t = {extinction} (queried at t = {t})")]
    ExtinctionReached { t: f64, extinction: f64 },
    #[error("point at distance {distance} lies outside the cap of radius {radius}")]
    OutsideCap { distance: f64, radius: f64 },
    #[error("support curve lost convexity at node {node}: radius of curvature {radius:e} at t = {t}")]
    NonConvexCurve { node: usize, radius: f64, t: f64 },
    #[error("profile lies above the truncation level everywhere")]
    EmptySublevel,
    #[error("step limit of {steps} reached at t = {t}")]
    MaxSteps { steps: usize, t: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(GeometryError),
}

impl From<GeometryError> for FlowError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NonConvexState {
                node,
                x,
                lambda_min,
                t,
            } => FlowError::NonConvexState {
                node,
                x,
                lambda_min,
                t,
            },
            other => FlowError::Geometry(other),
        }
    }
}

impl FlowError {
    /// Stable variant name for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            FlowError::NonConvexState { .. } => "NonConvexState",
            FlowError::BlowUp { .. } => "BlowUp",
            FlowError::ExtinctionReached { .. } => "ExtinctionReached",
            FlowError::OutsideCap { .. } => "OutsideCap",
            FlowError::NonConvexCurve { .. } => "NonConvexCurve",
            FlowError::EmptySublevel => "EmptySublevel",
            FlowError::MaxSteps { .. } => "MaxSteps",
            FlowError::InvalidConfig(_) => "InvalidConfig",
            FlowError::Geometry(_) => "Geometry",
        }
    }
}

/// Dirichlet data on boundary nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Boundary<T> {
    /// Lower cap of the shrinking sphere centred at `(0, center_height)`.
    ExactSphere { r0: T, center_height: T },
    /// Initial values are kept.
    Frozen,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowConfig<T> {
    pub spec: CurvatureSpec<T>,
    /// CFL safety factor in `(0, 1]`.
    pub safety: T,
    pub t_end: T,
    pub boundary: Boundary<T>,
    pub snapshot_every: usize,
    pub lambda_floor: T,
    pub max_steps: usize,
}

impl<T: Real> FlowConfig<T> {
    pub const DEFAULT_SAFETY: f64 = 0.5;
    pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-10;

    pub fn new(spec: CurvatureSpec<T>, t_end: T, boundary: Boundary<T>) -> Self {
        Self {
            spec,
            safety: T::lit(Self::DEFAULT_SAFETY),
            t_end,
            boundary,
            snapshot_every: 100,
            lambda_floor: T::lit(Self::DEFAULT_LAMBDA_FLOOR),
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        self.spec
            .validate()
            .map_err(|e| FlowError::InvalidConfig(e.to_string()))?;
        if !(self.safety > T::zero() && self.safety <= T::one()) {
            return Err(FlowError::InvalidConfig(format!(
                "safety must lie in (0, 1], got {}",
                self.safety
            )));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(FlowError::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshot_every == 0 {
            return Err(FlowError::InvalidConfig("snapshot_every must be at least 1".into()));
        }
        if !(self.lambda_floor >= T::zero()) {
            return Err(FlowError::InvalidConfig("lambda_floor must be nonnegative".into()));
        }
        if let Boundary::ExactSphere { r0, .. } = self.boundary {
            if !(r0 > T::zero()) {
                return Err(FlowError::InvalidConfig("sphere radius must be positive".into()));
            }
        }
        Ok(())
    }
}
