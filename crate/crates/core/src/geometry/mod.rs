//! Discrete differential geometry of graphs `x ↦ (x, w(x))` over uniform
//! grids, and closed-form curvatures of rotationally symmetric graphs.

mod export;
mod fields;
mod grid;
mod rotational;

pub use export::{field_summary, write_snapshot_csv, FieldSummary, SnapshotHeader, SNAPSHOT_COLUMNS};
pub use fields::{
    differentiate, euler_bound_check, geom_fields, node_fields, point_curvature, stencil, stencil_at,
    weingarten_explicit, GeomFields, NodeFields, PointCurvature, Stencil,
};
pub use grid::{GraphGrid, GraphState, NodeKind};
pub use rotational::{
    curvatures_from_derivatives, rotational_curvatures, BarrierProfile, RadialProfile, RotationalCurvatures, SphereProfile,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(
        "state is not strictly convex: lambda_min = {lambda_min:e} at node {node} (x = {x:?}, t = {t})"
    )]
    NonConvexState {
        node: usize,
        x: [f64; 2],
        lambda_min: f64,
        t: f64,
    },
    #[error("matrix is singular or not positive definite to working precision")]
    SingularInput,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite height at node {node}")]
    NonFinite { node: usize },
}
