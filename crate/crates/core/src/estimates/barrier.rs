use serde::Serialize;

use super::{EstimateError, MonitorReport, Worst};
use crate::geometry::{curvatures_from_derivatives, BarrierProfile};
use crate::scalar::Real;

/// Rotational barrier below a ball `B_{R₀}`: level sets of radius
/// `R₀ − δ(h − l)² − A·t` over the band `h ∈ [l − 1, l)`, valid up to `t₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BarrierParams<T> {
    #[serde(rename = "R0")]
    pub r0: T,
    pub sigma: T,
    pub delta: T,
    pub l: T,
    pub s: T,
    pub beta: T,
    pub n: usize,
    pub t0: T,
}

impl<T: Real> BarrierParams<T> {
    /// `A / δ^{sβ/n}`, the part of the time coefficient independent of `δ`.
    fn coefficient_base(&self) -> T {
        let n = T::from_usize_lossy(self.n);
        let one = T::one();
        let exp2 = (one - self.s + self.s / n) * self.beta + T::two();
        T::two().powf(exp2)
            * (one - self.sigma).powf(-self.beta)
            * n.powf((one - self.s) * self.beta)
            * self.r0.powf(-self.beta)
    }

    /// Time coefficient `A = 2^{(1−s+s/n)β+2}(1−σ)^{−β}n^{(1−s)β}R₀^{−β}δ^{sβ/n}`.
    pub fn time_coefficient(&self) -> T {
        let n = T::from_usize_lossy(self.n);
        self.coefficient_base() * self.delta.powf(self.s * self.beta / n)
    }

    /// Speed bound `F̂ = 2^{1−s+s/n}n^{1−s}(1−σ)^{−1}R₀^{−1}δ^{s/n}`.
    pub fn speed_bound(&self) -> T {
        let n = T::from_usize_lossy(self.n);
        let one = T::one();
        T::two().powf(one - self.s + self.s / n)
            * n.powf(one - self.s)
            * self.delta.powf(self.s / n)
            / ((one - self.sigma) * self.r0)
    }

    /// Left side `δ + A·t₀` of the smallness constraint `δ + A·t₀ ≤ σR₀`.
    pub fn constraint_lhs(&self) -> T {
        self.delta + self.time_coefficient() * self.t0
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let zero = T::zero();
        let one = T::one();
        let bad = |m: String| Err(EstimateError::InvalidParams(m));
        if !(self.r0 > zero && self.r0 < one) {
            return bad(format!("R0 must lie in (0, 1), got {}", self.r0));
        }
        if !(self.sigma > zero && self.sigma < one) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        if !(self.delta > zero) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.s > zero && self.s <= one) {
            return bad(format!("s must lie in (0, 1], got {}", self.s));
        }
        if !(self.beta >= one) {
            return bad(format!("beta must be at least 1, got {}", self.beta));
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.t0 > zero) || !self.l.is_finite() {
            return bad(format!("t0 must be positive and l finite, got t0 = {}, l = {}", self.t0, self.l));
        }
        let lhs = self.constraint_lhs();
        let rhs = self.sigma * self.r0;
        if !(lhs <= rhs) {
            return Err(EstimateError::ConstraintViolated {
                lhs: lhs.to_f64_lossy(),
                rhs: rhs.to_f64_lossy(),
            });
        }
        Ok(())
    }

    pub fn profile(&self, t: T) -> BarrierProfile<T> {
        BarrierProfile {
            r0: self.r0,
            delta: self.delta,
            l: self.l,
            a: self.time_coefficient(),
            t,
            n: self.n,
        }
    }
}

/// Largest `δ` satisfying the smallness constraint for the other
/// parameters of `p` (its own `delta` is ignored), found by bisection on
/// the increasing map `δ ↦ δ + A(δ)t₀`.
pub fn max_delta<T: Real>(p: &BarrierParams<T>) -> T {
    let target = p.sigma * p.r0;
    let g = |d: T| BarrierParams { delta: d, ..*p }.constraint_lhs();
    let (mut lo, mut hi) = (T::zero(), target);
    for _ in 0..200 {
        let mid = T::half() * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Evaluates the four inequalities behind the barrier's supersolution
/// property at `samples` points of `[l − 1, l) × [0, t₀]`:
/// (a) `K ≤ 2R₀^{−n}(1−σ)^{−n}δ`, (b) `H ≤ 2n/((1−σ)R₀)`,
/// (c) `v ≤ 2/(δ(l−h))`, (d) `∂_tφ⁻¹ ≥ F̂^β v`.
/// Heights within `1e-6` of `l` are excluded, where (c) degenerates.
/// The report carries the smallest relative slack over all four; a pass
/// requires every inequality to hold strictly.
pub fn barrier_supersolution_check<T: Real>(p: &BarrierParams<T>, samples: usize) -> Result<MonitorReport, EstimateError> {
    const NAME: &str = "barrier";
    const BAND_EXCLUSION: f64 = 1e-6;
    p.validate()?;
    if samples == 0 {
        return Err(EstimateError::InvalidParams("samples must be positive".into()));
    }
    let one = T::one();
    let n = T::from_usize_lossy(p.n);
    let nh = (samples as f64).sqrt().ceil() as usize;
    let nt = samples.div_ceil(nh);
    let frac = |i: usize, m: usize| {
        if m <= 1 {
            T::zero()
        } else {
            T::from_usize_lossy(i) / T::from_usize_lossy(m - 1)
        }
    };
    let a = p.time_coefficient();
    let f_hat = p.speed_bound();
    let k_bound = T::two() * p.delta / ((one - p.sigma) * p.r0).powi(p.n as i32);
    let h_bound = T::two() * n / ((one - p.sigma) * p.r0);

    let mut worst = Worst::default();
    let mut min_slack = [f64::INFINITY; 4];
    let mut failures = 0usize;
    let mut speed_ratio = f64::INFINITY;
    for idx in 0..samples {
        let (i, j) = (idx % nh, idx / nh);
        let h = p.l - one + (one - T::lit(BAND_EXCLUSION)) * frac(i, nh);
        let t = p.t0 * frac(j, nt);
        let prof = p.profile(t);
        let r = prof.radius_at(h);
        let (dp, dq) = prof.inverse_derivatives_at_height(h);
        let c = curvatures_from_derivatives(p.n, r, dp, dq).map_err(|e| EstimateError::InvalidParams(e.to_string()))?;
        let gap = p.l - h;
        let dt_inv = prof.time_derivative_at_height(h);
        debug_assert!((dt_inv - a / (T::two() * p.delta * gap)).abs() <= T::lit(1e-12) * dt_inv);
        let checks = [
            (c.k, k_bound),
            (c.h, h_bound),
            (c.v, T::two() / (p.delta * gap)),
            (f_hat.powf(p.beta) * c.v, dt_inv),
        ];
        for (slot, &(lhs, rhs)) in checks.iter().enumerate() {
            let (l64, r64) = (lhs.to_f64_lossy(), rhs.to_f64_lossy());
            let rel = (r64 - l64) / r64.abs();
            if !(lhs < rhs) {
                failures += 1;
            }
            min_slack[slot] = min_slack[slot].min(rel);
            let mut rep = MonitorReport::new(NAME, l64, r64, 0.0, t.to_f64_lossy(), Some(idx));
            rep.pass = lhs < rhs;
            rep.extra.insert("inequality".into(), slot as f64);
            rep.extra.insert("h".into(), h.to_f64_lossy());
            // Rank by relative slack so inequalities of different scale compare.
            rep.margin = rel;
            rep.lhs = l64;
            rep.rhs = r64;
            worst.offer(rep);
        }
        // Actual speed of the barrier for F = K^{s/n}H^{1−s}, for reference.
        let f_actual = c.k.powf(p.s / n) * c.h.powf(one - p.s);
        let ratio = (dt_inv / (f_actual.powf(p.beta) * c.v)).to_f64_lossy();
        speed_ratio = speed_ratio.min(ratio);
    }
    let mut report = worst.0.expect("at least one sample");
    report.pass = failures == 0;
    report.name = NAME.into();
    let report = report
        .with_extra("failures", failures as f64)
        .with_extra("min_rel_slack_a", min_slack[0])
        .with_extra("min_rel_slack_b", min_slack[1])
        .with_extra("min_rel_slack_c", min_slack[2])
        .with_extra("min_rel_slack_d", min_slack[3])
        .with_extra("min_speed_ratio", speed_ratio)
        .with_extra("delta", p.delta.to_f64_lossy())
        .with_extra("A", a.to_f64_lossy())
        .with_extra("F_hat", f_hat.to_f64_lossy())
        .with_extra("samples", samples as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, beta: f64, delta: f64, t0: f64) -> BarrierParams<f64> {
        BarrierParams {
            r0: 0.5,
            sigma: 0.5,
            delta,
            l: 0.0,
            s,
            beta,
            n: 2,
            t0,
        }
    }

    #[test]
    fn constraint_coefficient_spot_value() {
        let p = params(1.0, 1.0, 1.0, 0.1);
        // 2^{2.5}·(1/2)^{-1}·2^0·(1/2)^{-1} at δ = 1.
        assert!((p.time_coefficient() - 2f64.powf(2.5) * 4.0).abs() < 1e-12);
        assert!((p.time_coefficient() - 22.627417).abs() < 1e-6);
        let q = params(1.0, 1.0, 0.01, 0.1);
        let t0_max = (0.25 - 0.01) / q.time_coefficient();
        assert!((t0_max - 0.10607).abs() < 1e-4, "{t0_max}");
        assert!(params(1.0, 1.0, 0.01, 0.105).validate().is_ok());
        assert!(matches!(
            params(1.0, 1.0, 0.01, 0.11).validate(),
            Err(EstimateError::ConstraintViolated { .. })
        ));
    }

    #[test]
    fn time_coefficient_is_four_speed_bounds() {
        for (s, beta) in [(0.25, 1.0), (0.5, 2.0), (1.0, 1.5)] {
            let p = params(s, beta, 0.003, 0.01);
            let ratio = p.time_coefficient() / p.speed_bound().powf(beta);
            assert!((ratio - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_delta_saturates_constraint() {
        let p = params(0.5, 2.0, 1.0, 0.1);
        let d = max_delta(&p);
        let q = BarrierParams { delta: d, ..p };
        assert!(q.validate().is_ok());
        assert!((q.constraint_lhs() - 0.25).abs() < 1e-12);
        let bigger = BarrierParams { delta: d * (1.0 + 1e-9), ..p };
        assert!(bigger.validate().is_err());
    }

    #[test]
    fn endpoint_velocity_bound() {
        let p = params(1.0, 1.0, 0.01, 0.1);
        let prof = p.profile(0.0);
        let (dp, _) = prof.inverse_derivatives_at_height(-1.0);
        let v = (1.0 + dp * dp).sqrt();
        assert!(v <= 2.0 / 0.01);
    }

    #[test]
    fn chain_holds_on_small_sweep() {
        for s in [0.25, 0.5, 1.0] {
            for beta in [1.0, 2.0] {
                let mut p = params(s, beta, 1.0, 0.1);
                p.delta = max_delta(&p);
                let r = barrier_supersolution_check(&p, 400).unwrap();
                assert!(r.pass, "s {s} beta {beta}: {r:?}");
                assert_eq!(r.extra["failures"], 0.0);
            }
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(barrier_supersolution_check(&params(1.0, 0.5, 0.01, 0.1), 10).is_err());
        assert!(barrier_supersolution_check(&params(0.0, 1.0, 0.01, 0.1), 10).is_err());
        let mut p = params(1.0, 1.0, 0.01, 0.1);
        p.r0 = 1.5;
        assert!(p.validate().is_err());
    }
}
