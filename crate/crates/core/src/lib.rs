//! Numerical toolkit for flows of convex graphs by powers of curvature
//! functions: symmetric curvature functions, discrete graph geometry, explicit
//! time stepping with exact-solution oracles, and runtime monitors for
//! interior estimates.
//!
//! Everything is generic over the scalar type through [`Real`]; the `*64`
//! aliases below fix it to `f64`, which is what the command-line tool uses.

pub mod estimates;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod symfun;

pub use scalar::Real;
pub use symfun::{CurvatureFn, CurvatureSpec, Lambda};

pub type Lambda64 = Lambda<f64>;
pub type CurvatureSpec64 = CurvatureSpec<f64>;
pub type CurvatureFn64 = CurvatureFn<f64>;
pub type GraphGrid64 = geometry::GraphGrid<f64>;
pub type GraphState64 = geometry::GraphState<f64>;
pub type FlowConfig64 = flow::FlowConfig<f64>;
pub type Trajectory64 = flow::Trajectory<f64>;
pub type SupportCurve64 = flow::SupportCurve<f64>;
pub type CutoffParams64 = estimates::CutoffParams<f64>;
pub type BarrierParams64 = estimates::BarrierParams<f64>;
