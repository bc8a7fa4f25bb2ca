//! Configuration, orchestration and export for curvature-flow runs.
//!
//! The binary is a thin wrapper over [`commands`]; everything it does is
//! reachable from here so that tests can drive it in-process.

pub mod commands;
pub mod config;
pub mod error;
