//! Runtime checks of the interior a priori estimates on computed
//! trajectories, the rotational barrier used to keep the domain from
//! shrinking, and the evolution identities on the exact sphere.

mod barrier;
mod identities;
mod monitors;

pub use barrier::{barrier_supersolution_check, max_delta, BarrierParams};
pub use identities::{sphere_evolution_identities, IdentityResidual};
pub use monitors::{
    comparison_check, monitor_gradient_estimate, monitor_lambda_min, monitor_speed_bound, speed_constant,
    GradientMonitor, LambdaMinMonitor, SpeedBoundMonitor,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("barrier smallness constraint violated: {lhs} > {rhs}")]
    ConstraintViolated { lhs: f64, rhs: f64 },
    #[error("sphere is not enclosed at t = 0: clearance {clearance:e} at node {node}")]
    NotEnclosedInitially { clearance: f64, node: usize },
    #[error("trajectory has no snapshots")]
    EmptyTrajectory,
}

/// Radius `R`, time decay `γ` and sublevel fraction `σ` of the cutoffs
/// `(R − u − γt)_+` and `(R − u)_+`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffParams<T> {
    #[serde(rename = "R")]
    pub r: T,
    pub gamma: T,
    pub sigma: T,
}

impl<T: Real> CutoffParams<T> {
    pub fn new(r: T, gamma: T, sigma: T) -> Result<Self, EstimateError> {
        let p = Self { r, gamma, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        if !(self.r > T::zero()) || !self.r.is_finite() {
            return Err(EstimateError::InvalidParams(format!("R must be positive, got {}", self.r)));
        }
        if !(self.gamma > T::zero() && self.gamma <= self.r) {
            return Err(EstimateError::InvalidParams(format!(
                "gamma must lie in (0, R] = (0, {}], got {}",
                self.r, self.gamma
            )));
        }
        if !(self.sigma > T::zero() && self.sigma < T::one()) {
            return Err(EstimateError::InvalidParams(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// `(R − u − γt)_+` when `with_gamma`, otherwise `(R − u)_+`.
pub fn cutoff<T: Real>(u: T, t: T, p: &CutoffParams<T>, with_gamma: bool) -> T {
    let decay = if with_gamma { p.gamma * t } else { T::zero() };
    (p.r - u - decay).max(T::zero())
}

/// Outcome of checking an inequality `lhs ≤ rhs`, reported at its worst
/// point over a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub t: f64,
    /// Grid node (or sample index) where the worst case occurred.
    pub node: Option<usize>,
    /// Monitor-specific quantities, such as computed constants.
    pub extra: BTreeMap<String, f64>,
}

impl MonitorReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, t: f64, node: Option<usize>) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            t,
            node,
            extra: BTreeMap::new(),
        }
    }

    /// `margin + tolerance`; negative exactly when the check fails.
    pub fn slack(&self) -> f64 {
        self.margin + self.tolerance
    }

    fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

/// Keeps the report with the smallest slack. NaN slacks count as worst.
#[derive(Default)]
struct Worst(Option<MonitorReport>);

impl Worst {
    fn offer(&mut self, r: MonitorReport) {
        let replace = match &self.0 {
            None => true,
            Some(cur) => r.slack().is_nan() || (!cur.slack().is_nan() && r.slack() < cur.slack()),
        };
        if replace {
            self.0 = Some(r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_values() {
        let p = CutoffParams::new(2.0_f64, 0.5, 0.5).unwrap();
        assert_eq!(cutoff(2.0, 0.0, &p, true), 0.0);
        assert_eq!(cutoff(0.0, 0.0, &p, true), 2.0);
        assert_eq!(cutoff(0.0, 4.0, &p, true), 0.0);
        assert_eq!(cutoff(0.0, 4.0, &p, false), 2.0);
        assert_eq!(cutoff(3.0, 0.0, &p, false), 0.0);
    }

    #[test]
    fn cutoff_params_validation() {
        assert!(CutoffParams::new(1.0_f64, 2.0, 0.5).is_err());
        assert!(CutoffParams::new(1.0_f64, 0.0, 0.5).is_err());
        assert!(CutoffParams::new(1.0_f64, 1.0, 1.0).is_err());
        assert!(CutoffParams::new(-1.0_f64, 0.1, 0.5).is_err());
        assert!(CutoffParams::new(1.0_f64, 1.0, 0.5).is_ok());
    }

    #[test]
    fn report_pass_uses_tolerance() {
        assert!(MonitorReport::new("x", 1.0, 0.99, 0.02, 0.0, None).pass);
        assert!(!MonitorReport::new("x", 1.0, 0.97, 0.02, 0.0, None).pass);
        assert!(!MonitorReport::new("x", f64::NAN, 0.97, 0.02, 0.0, None).pass);
    }
}
