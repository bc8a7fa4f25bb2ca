use super::{cutoff, CutoffParams, EstimateError, MonitorReport, Worst};
use crate::flow::{sphere_radius, Monitor, Snapshot, Trajectory};
use crate::scalar::Real;

fn node_of<T: Real>(snap: &Snapshot<T>, slot: usize) -> usize {
    snap.state.grid.interior()[slot]
}

/// Streaming form of [`monitor_gradient_estimate`]: `max v·(R − u − γt)_+`
/// against `R·max{sup v over {u(·,0) ≤ R}, (β−1)/γ}`.
pub struct GradientMonitor<T> {
    p: CutoffParams<T>,
    beta: T,
    bound: Option<(f64, f64)>,
    worst: Worst,
}

impl<T: Real> GradientMonitor<T> {
    pub const NAME: &'static str = "gradient_estimate";
    pub const RELATIVE_TOLERANCE: f64 = 1e-2;

    pub fn new(p: CutoffParams<T>, beta: T) -> Self {
        Self {
            p,
            beta,
            bound: None,
            worst: Worst::default(),
        }
    }

    /// Checks one snapshot; the first one observed defines the initial data.
    pub fn check(&mut self, snap: &Snapshot<T>) -> MonitorReport {
        let (rhs, sup_v0) = *self.bound.get_or_insert_with(|| {
            let sup_v0 = (0..snap.fields.len())
                .filter(|&i| snap.w_interior(i) <= self.p.r)
                .map(|i| snap.fields.v[i])
                .fold(T::zero(), T::max);
            let branch = (self.beta - T::one()) / self.p.gamma;
            ((self.p.r * sup_v0.max(branch)).to_f64_lossy(), sup_v0.to_f64_lossy())
        });
        let t = snap.t();
        let mut lhs = T::zero();
        let mut node = None;
        for i in 0..snap.fields.len() {
            let val = snap.fields.v[i] * cutoff(snap.w_interior(i), t, &self.p, true);
            if val > lhs || val.is_nan() {
                lhs = val;
                node = Some(node_of(snap, i));
            }
        }
        let report = MonitorReport::new(
            Self::NAME,
            lhs.to_f64_lossy(),
            rhs,
            Self::RELATIVE_TOLERANCE * rhs,
            t.to_f64_lossy(),
            node,
        )
        .with_extra("sup_v0", sup_v0)
        .with_extra("beta_branch", ((self.beta - T::one()) / self.p.gamma).to_f64_lossy());
        self.worst.offer(report.clone());
        report
    }

    pub fn report(&self) -> Option<MonitorReport> {
        self.worst.0.clone()
    }
}

impl<T: Real> Monitor<T> for GradientMonitor<T> {
    fn name(&self) -> String {
        Self::NAME.into()
    }

    fn observe(&mut self, snapshot: &Snapshot<T>) -> f64 {
        self.check(snapshot).margin
    }
}

/// Streaming form of [`monitor_lambda_min`].
pub struct LambdaMinMonitor<T> {
    p: CutoffParams<T>,
    initial: Option<Option<f64>>,
    worst: Worst,
}

impl<T: Real> LambdaMinMonitor<T> {
    pub const NAME: &'static str = "lambda_min";
    pub const RELATIVE_TOLERANCE: f64 = 5e-2;

    pub fn new(p: CutoffParams<T>) -> Self {
        Self {
            p,
            initial: None,
            worst: Worst::default(),
        }
    }

    /// `inf (R − u)_+·λ_min` over `{u ≤ σR}` and the node attaining it.
    fn region_inf(&self, snap: &Snapshot<T>) -> Option<(f64, usize)> {
        let level = self.p.sigma * self.p.r;
        let mut best: Option<(T, usize)> = None;
        for i in 0..snap.fields.len() {
            let u = snap.w_interior(i);
            if u > level {
                continue;
            }
            let val = cutoff(u, snap.t(), &self.p, false) * snap.fields.lam_min[i];
            if best.map_or(true, |(b, _)| val < b) {
                best = Some((val, node_of(snap, i)));
            }
        }
        best.map(|(v, k)| (v.to_f64_lossy(), k))
    }

    /// Returns `None` when the sublevel set holds no grid node, either now
    /// or initially.
    pub fn check(&mut self, snap: &Snapshot<T>) -> Option<MonitorReport> {
        let current = self.region_inf(snap);
        let initial = *self.initial.get_or_insert_with(|| current.map(|c| c.0));
        let (lhs, (rhs, node)) = (initial?, current?);
        let report = MonitorReport::new(
            Self::NAME,
            lhs,
            rhs,
            Self::RELATIVE_TOLERANCE * lhs,
            snap.t().to_f64_lossy(),
            Some(node),
        );
        self.worst.offer(report.clone());
        Some(report)
    }

    pub fn report(&self) -> Option<MonitorReport> {
        self.worst.0.clone()
    }
}

impl<T: Real> Monitor<T> for LambdaMinMonitor<T> {
    fn name(&self) -> String {
        Self::NAME.into()
    }

    fn observe(&mut self, snapshot: &Snapshot<T>) -> f64 {
        self.check(snapshot).map_or(f64::NAN, |r| r.margin)
    }
}

/// `C₀ = 2^{1+1/(2β)}(2βΛ(1 + 4β(θ+1)) + R² + 2(β−1)R)`.
pub fn speed_constant<T: Real>(beta: T, theta: T, lambda: T, r: T) -> T {
    let two = T::two();
    let four = two * two;
    let exponent = T::one() + (two * beta).recip();
    two.powf(exponent)
        * (two * beta * lambda * (T::one() + four * beta * (theta + T::one())) + r * r + two * (beta - T::one()) * r)
}

/// Streaming form of [`monitor_speed_bound`]. The sups `θ` and `Λ` are
/// accumulated over the snapshots seen so far, so the streamed margins use
/// provisional constants.
pub struct SpeedBoundMonitor<T> {
    r: T,
    beta: T,
    theta: T,
    lambda: T,
    region_nodes: usize,
    worst: Worst,
}

impl<T: Real> SpeedBoundMonitor<T> {
    pub const NAME: &'static str = "speed_bound";
    pub const RELATIVE_TOLERANCE: f64 = 1e-2;

    pub fn new(r: T, beta: T) -> Self {
        Self {
            r,
            beta,
            theta: T::one(),
            lambda: T::zero(),
            region_nodes: 0,
            worst: Worst::default(),
        }
    }

    fn accumulate(&mut self, snap: &Snapshot<T>) {
        for i in 0..snap.fields.len() {
            if snap.w_interior(i) <= self.r {
                let v = snap.fields.v[i];
                self.theta = self.theta.max(v * v);
                self.lambda = self.lambda.max(snap.fields.lam_min[i].recip());
                self.region_nodes += 1;
            }
        }
    }

    fn evaluate(&mut self, snap: &Snapshot<T>) -> MonitorReport {
        let t = snap.t();
        let xi = t / (T::one() + t);
        let mut lhs = T::zero();
        let mut node = None;
        for i in 0..snap.fields.len() {
            let phi = (self.r - snap.w_interior(i)).max(T::zero());
            let val = xi * snap.fields.f[i] * phi * phi;
            if val > lhs || val.is_nan() {
                lhs = val;
                node = Some(node_of(snap, i));
            }
        }
        let c0 = speed_constant(self.beta, self.theta, self.lambda, self.r);
        let rhs = c0 * self.theta.powf(T::one() + (T::two() * self.beta).recip());
        let rhs = rhs.to_f64_lossy();
        let report = MonitorReport::new(
            Self::NAME,
            lhs.to_f64_lossy(),
            rhs,
            Self::RELATIVE_TOLERANCE * rhs,
            t.to_f64_lossy(),
            node,
        )
        .with_extra("theta", self.theta.to_f64_lossy())
        .with_extra("Lambda", self.lambda.to_f64_lossy())
        .with_extra("C0", c0.to_f64_lossy())
        .with_extra("region_nodes", self.region_nodes as f64);
        self.worst.offer(report.clone());
        report
    }

    pub fn check(&mut self, snap: &Snapshot<T>) -> MonitorReport {
        self.accumulate(snap);
        self.evaluate(snap)
    }

    pub fn report(&self) -> Option<MonitorReport> {
        self.worst.0.clone()
    }
}

impl<T: Real> Monitor<T> for SpeedBoundMonitor<T> {
    fn name(&self) -> String {
        Self::NAME.into()
    }

    fn observe(&mut self, snapshot: &Snapshot<T>) -> f64 {
        self.check(snapshot).margin
    }
}

fn first_snapshot<T: Real>(traj: &Trajectory<T>) -> Result<(), EstimateError> {
    if traj.snapshots.is_empty() {
        return Err(EstimateError::EmptyTrajectory);
    }
    Ok(())
}

/// Worst case over all snapshots of the interior gradient estimate
/// `v·(R − u − γt)_+ ≤ R·max{sup_{u(·,0) ≤ R} v(·,0), (β−1)/γ}`.
pub fn monitor_gradient_estimate<T: Real>(
    traj: &Trajectory<T>,
    p: &CutoffParams<T>,
) -> Result<MonitorReport, EstimateError> {
    p.validate()?;
    first_snapshot(traj)?;
    let mut m = GradientMonitor::new(*p, traj.config.spec.beta);
    for s in &traj.snapshots {
        m.check(s);
    }
    Ok(m.report().expect("at least one snapshot"))
}

/// Worst case over all snapshots of
/// `inf_{u(·,t) ≤ σR} φλ_min(·,t) ≥ inf_{u(·,0) ≤ σR} φλ_min(·,0)` with
/// `φ = (R − u)_+`. Snapshots whose sublevel set misses every node are
/// skipped; if all are, the report is vacuous with `lhs = rhs = 0`.
pub fn monitor_lambda_min<T: Real>(traj: &Trajectory<T>, p: &CutoffParams<T>) -> Result<MonitorReport, EstimateError> {
    p.validate()?;
    first_snapshot(traj)?;
    let mut m = LambdaMinMonitor::new(*p);
    let mut checked = 0usize;
    for s in &traj.snapshots {
        checked += m.check(s).is_some() as usize;
    }
    let report = m.report().unwrap_or_else(|| {
        MonitorReport::new(LambdaMinMonitor::<T>::NAME, 0.0, 0.0, 0.0, 0.0, None)
    });
    Ok(report.with_extra("snapshots_checked", checked as f64))
}

/// Worst case over all snapshots of `(t/(1+t))·F·φ² ≤ C₀θ^{1+1/(2β)}`,
/// with `θ = sup v²` and `Λ = sup 1/λ_min` taken over `{u ≤ R}` across the
/// whole trajectory before any snapshot is checked.
pub fn monitor_speed_bound<T: Real>(traj: &Trajectory<T>, r: T) -> Result<MonitorReport, EstimateError> {
    if !(r > T::zero()) {
        return Err(EstimateError::InvalidParams(format!("R must be positive, got {r}")));
    }
    first_snapshot(traj)?;
    let mut m = SpeedBoundMonitor::new(r, traj.config.spec.beta);
    for s in &traj.snapshots {
        m.accumulate(s);
    }
    for s in &traj.snapshots {
        m.evaluate(s);
    }
    Ok(m.report().expect("at least one snapshot"))
}

/// Checks that the shrinking sphere of initial radius `r0` centred at
/// `center = (x₁, x₂, height)` stays inside the region above the graph:
/// its lower cap must lie on or above `w` wherever it is defined. The
/// reported margin is the smallest clearance `cap − w` over the run.
/// `x₂` is ignored for curves.
pub fn comparison_check<T: Real>(traj: &Trajectory<T>, r0: T, center: [T; 3]) -> Result<MonitorReport, EstimateError> {
    const NAME: &str = "comparison";
    const TOLERANCE: f64 = 1e-10;
    if !(r0 > T::zero()) {
        return Err(EstimateError::InvalidParams(format!("sphere radius must be positive, got {r0}")));
    }
    first_snapshot(traj)?;
    let beta = traj.config.spec.beta;
    let mut worst = Worst::default();
    let mut initial = f64::INFINITY;
    let mut last = f64::NAN;
    for (idx, snap) in traj.snapshots.iter().enumerate() {
        let Ok(r) = sphere_radius(r0, beta, snap.t()) else {
            break;
        };
        let grid = &snap.state.grid;
        let mut best: Option<(T, usize)> = None;
        for k in (0..grid.len()).filter(|&k| grid.in_domain(k)) {
            let x = grid.coords(k);
            let d0 = x[0] - center[0];
            let d1 = if grid.n() == 1 { T::zero() } else { x[1] - center[1] };
            let s2 = r * r - d0 * d0 - d1 * d1;
            if !(s2 > T::zero()) {
                continue;
            }
            let clearance = center[2] - s2.sqrt() - snap.state.w[k];
            if best.map_or(true, |(b, _)| clearance < b) {
                best = Some((clearance, k));
            }
        }
        let Some((clearance, node)) = best else {
            continue;
        };
        let c = clearance.to_f64_lossy();
        if idx == 0 {
            if c < -TOLERANCE {
                return Err(EstimateError::NotEnclosedInitially { clearance: c, node });
            }
            initial = c;
        }
        last = c;
        let w = snap.state.w[node].to_f64_lossy();
        worst.offer(MonitorReport::new(NAME, w, w + c, TOLERANCE, snap.t().to_f64_lossy(), Some(node)));
    }
    let report = worst
        .0
        .unwrap_or_else(|| MonitorReport::new(NAME, 0.0, 0.0, TOLERANCE, 0.0, None));
    Ok(report
        .with_extra("initial_clearance", initial)
        .with_extra("final_clearance", last))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flow::exact_sphere_trajectory;
    use crate::geometry::GraphGrid;
    use crate::symfun::CurvatureSpec;

    fn sphere_traj(beta: f64) -> Trajectory<f64> {
        let grid = Arc::new(GraphGrid::disk(0.5, 33).unwrap());
        let times: Vec<f64> = (0..=10).map(|k| 0.02 * k as f64).collect();
        exact_sphere_trajectory(grid, &CurvatureSpec::mean(2, beta), 1.0, 1.0, &times).unwrap()
    }

    #[test]
    fn speed_constant_spot_value() {
        let c0 = speed_constant(1.0_f64, 2.0, 1.0, 1.0);
        assert!((c0 - 2f64.powf(1.5) * 27.0).abs() < 1e-12);
        assert!((c0 - 76.367532).abs() < 1e-5);
    }

    #[test]
    fn gradient_estimate_on_sphere() {
        let traj = sphere_traj(1.0);
        let p = CutoffParams::new(0.2, 0.2, 0.5).unwrap();
        let r = monitor_gradient_estimate(&traj, &p).unwrap();
        assert!(r.pass && r.margin > 0.0, "{r:?}");
        // With β = 1 the bound is R·sup v over the initial sublevel set.
        assert!((r.rhs - 0.2 * r.extra["sup_v0"]).abs() < 1e-15);
    }

    #[test]
    fn gradient_estimate_beta_branch() {
        let traj = sphere_traj(2.0);
        let p = CutoffParams::new(0.2, 0.1, 0.5).unwrap();
        let r = monitor_gradient_estimate(&traj, &p).unwrap();
        assert_eq!(r.extra["beta_branch"], 10.0);
        assert!((r.rhs - 2.0).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn initial_snapshot_only() {
        let mut traj = sphere_traj(1.0);
        traj.snapshots.truncate(1);
        let p = CutoffParams::new(0.3, 0.1, 0.5).unwrap();
        assert!(monitor_gradient_estimate(&traj, &p).unwrap().pass);
        let s = monitor_speed_bound(&traj, 0.3).unwrap();
        assert_eq!(s.lhs, 0.0);
        assert!(s.pass);
    }

    #[test]
    fn lambda_min_grows_on_sphere() {
        let traj = sphere_traj(1.0);
        let p = CutoffParams::new(0.2, 0.1, 0.5).unwrap();
        let r = monitor_lambda_min(&traj, &p).unwrap();
        assert!(r.pass, "{r:?}");
        // Worst case is the initial snapshot, compared with itself.
        assert_eq!(r.margin, 0.0);
        let mut later = LambdaMinMonitor::new(p);
        let margins: Vec<f64> = traj.snapshots.iter().filter_map(|s| later.check(s)).map(|r| r.margin).collect();
        assert!(margins.len() > 2);
        assert!(margins.windows(2).all(|w| w[1] >= w[0]), "{margins:?}");
    }

    #[test]
    fn repeated_static_snapshot_has_zero_margin() {
        let mut traj = sphere_traj(1.0);
        let first = traj.snapshots[0].clone();
        traj.snapshots = vec![first.clone(), first];
        let p = CutoffParams::new(0.2, 0.1, 0.5).unwrap();
        assert_eq!(monitor_lambda_min(&traj, &p).unwrap().margin, 0.0);
    }

    #[test]
    fn speed_bound_on_sphere_has_wide_margin() {
        let traj = sphere_traj(1.0);
        let r = monitor_speed_bound(&traj, 0.3).unwrap();
        assert!(r.pass);
        assert!(r.margin > 10.0 * r.lhs, "{r:?}");
        assert!(r.extra["theta"] >= 1.0);
        let expected = speed_constant(1.0, r.extra["theta"], r.extra["Lambda"], 0.3);
        assert_eq!(r.extra["C0"], expected);
    }

    #[test]
    fn monitors_are_pure() {
        let traj = sphere_traj(2.0);
        let p = CutoffParams::new(0.2, 0.1, 0.5).unwrap();
        assert_eq!(monitor_gradient_estimate(&traj, &p), monitor_gradient_estimate(&traj, &p));
        assert_eq!(monitor_speed_bound(&traj, 0.2), monitor_speed_bound(&traj, 0.2));
    }

    #[test]
    fn comparison_with_itself_is_tight() {
        let traj = sphere_traj(1.0);
        let r = comparison_check(&traj, 1.0, [0.0, 0.0, 1.0]).unwrap();
        assert!(r.pass);
        assert!(r.margin.abs() < 1e-14);
    }

    #[test]
    fn comparison_rejects_protruding_sphere() {
        let traj = sphere_traj(1.0);
        let e = comparison_check(&traj, 1.2, [0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(e, EstimateError::NotEnclosedInitially { .. }));
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let mut traj = sphere_traj(1.0);
        traj.snapshots.clear();
        let p = CutoffParams::new(0.2, 0.1, 0.5).unwrap();
        assert_eq!(monitor_gradient_estimate(&traj, &p), Err(EstimateError::EmptyTrajectory));
    }
}
