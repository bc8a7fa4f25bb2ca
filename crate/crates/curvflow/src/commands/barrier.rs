use std::path::Path;

use serde::Serialize;

use curvflow_core::estimates::{barrier_supersolution_check, max_delta, EstimateError, MonitorReport};
use curvflow_core::BarrierParams64;

use super::{create_dir, write_json};
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct BarrierArgs {
    pub s: f64,
    pub beta: f64,
    pub n: usize,
    pub r0: f64,
    pub sigma: f64,
    pub t0: f64,
    /// `None` picks the largest admissible value.
    pub delta: Option<f64>,
    pub l: f64,
    pub samples: usize,
}

impl Default for BarrierArgs {
    fn default() -> Self {
        Self {
            s: 1.0,
            beta: 1.0,
            n: 2,
            r0: 0.5,
            sigma: 0.5,
            t0: 0.1,
            delta: None,
            l: 0.0,
            samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrierOutput {
    pub params: BarrierParams64,
    pub delta_maximal: bool,
    pub report: MonitorReport,
}

/// Checks the barrier inequalities and, with `out`, writes `barrier.json`.
pub fn cmd_barrier(args: &BarrierArgs, out: Option<&Path>) -> Result<BarrierOutput, CliError> {
    let mut params = BarrierParams64 {
        r0: args.r0,
        sigma: args.sigma,
        delta: args.delta.unwrap_or(1.0),
        l: args.l,
        s: args.s,
        beta: args.beta,
        n: args.n,
        t0: args.t0,
    };
    if args.delta.is_none() {
        params.delta = max_delta(&params);
    }
    let report = barrier_supersolution_check(&params, args.samples).map_err(|e| match e {
        EstimateError::ConstraintViolated { .. } => CliError::invalid("delta", e.to_string()),
        other => CliError::invalid("barrier", other.to_string()),
    })?;
    let output = BarrierOutput {
        params,
        delta_maximal: args.delta.is_none(),
        report,
    };
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("barrier.json"), &output)?;
    }
    Ok(output)
}
