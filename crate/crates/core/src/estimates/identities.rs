use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::EstimateError;
use crate::flow::{extinction_time, sphere_radius};
use crate::scalar::Real;
use crate::symfun::{derivatives, CurvatureSpec, Lambda};

/// Both sides of the height and gradient-function evolution equations at
/// one material point of the exact shrinking sphere.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    /// `"u"` for the height equation, `"v"` for the gradient function.
    pub equation: &'static str,
    pub t: f64,
    /// Vertical component of the unit normal `X/r` (negative on the lower
    /// hemisphere).
    pub normal_height: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs|` divided by the largest term involved (at least 1).
    pub residual: f64,
}

const SEED: u64 = 0x5eed_0f_5a4e;

/// Evaluates, at `sample_points` material points `X(t) = (r(t)/r₀)X₀` of
/// the sphere centred at the origin,
/// `∂_t u = 𝓛u + (1−β)Φ/v` and
/// `∂_t v = 𝓛v − 2|∇v|²_𝓛/v − vΦ̇^{ij}h_{ik}h^k_j`,
/// with `𝓛 = Φ̇^{kl}∇_k∇_l` and `Φ = F^β`. Every term is computed in closed
/// form from the radius, the normal and the spec's first derivatives at the
/// umbilic point. Points stay at least `0.1·r` below the equator and times
/// in `[0, 0.9T]`; sampling is deterministic.
pub fn sphere_evolution_identities<T: Real>(
    r0: T,
    beta: T,
    spec: &CurvatureSpec<T>,
    sample_points: usize,
) -> Result<Vec<IdentityResidual>, EstimateError> {
    if !(r0 > T::zero()) || !(beta >= T::one()) {
        return Err(EstimateError::InvalidParams(format!(
            "need r0 > 0 and beta >= 1, got r0 = {r0}, beta = {beta}"
        )));
    }
    let n = spec.n;
    let bad = |e: &dyn std::fmt::Display| EstimateError::InvalidParams(e.to_string());
    let spec = spec.with_beta(beta).map_err(|e| bad(&e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let b1 = beta + T::one();
    let end = extinction_time(r0, beta);
    let mut out = Vec::with_capacity(2 * sample_points);
    for _ in 0..sample_points {
        let t = end * T::lit(0.9 * rng.gen::<f64>());
        // Vertical normal component ω ∈ [−1, −0.1].
        let omega = T::lit(-0.1 - 0.9 * rng.gen::<f64>());
        let r = sphere_radius(r0, beta, t).map_err(|e| bad(&e))?;
        // dr/dt from the closed-form radius, independently of the ODE.
        let dr = -(r0.powf(b1) - b1 * t).powf(b1.recip() - T::one());

        let lam = Lambda::new(&vec![r.recip(); n]).map_err(|e| bad(&e))?;
        let d = derivatives(&spec, &lam).map_err(|e| bad(&e))?;
        let f = d.value;
        let phi = f.powf(beta);
        // Φ̇^{ii} in an orthonormal frame; at an umbilic point any frame is principal.
        let a: Vec<T> = d.grad.iter().map(|&g| beta * f.powf(beta - T::one()) * g).collect();
        let trace_a: T = a.iter().copied().sum();

        let u = r * omega;
        let v = -omega.recip();
        // ∇u is tangential e_{n+1}, placed along the first frame vector.
        let grad_u_sq = T::one() - omega * omega;
        // ∇²u = −h⟨ν, e_{n+1}⟩ = −(ω/r)g.
        let hess_u = -omega / r;

        let dt_u = dr * omega;
        let l_u = trace_a * hess_u;
        let source_u = (T::one() - beta) * phi / v;
        out.push(residual("u", t, omega, dt_u, &[l_u, source_u]));

        // v = −r/u as a function of the height on the sphere.
        let dv = r / (u * u);
        let ddv = -T::two() * r / (u * u * u);
        let l_v = trace_a * dv * hess_u + a[0] * ddv * grad_u_sq;
        let grad_v_l = a[0] * dv * dv * grad_u_sq;
        let curv = trace_a / (r * r);
        let dt_v = T::zero();
        out.push(residual("v", t, omega, dt_v, &[l_v, -T::two() * grad_v_l / v, -v * curv]));
    }
    Ok(out)
}

fn residual<T: Real>(equation: &'static str, t: T, omega: T, lhs: T, terms: &[T]) -> IdentityResidual {
    let rhs: T = terms.iter().copied().sum();
    let scale = terms
        .iter()
        .fold(lhs.abs(), |m, x| m.max(x.abs()))
        .max(T::one());
    IdentityResidual {
        equation,
        t: t.to_f64_lossy(),
        normal_height: omega.to_f64_lossy(),
        lhs: lhs.to_f64_lossy(),
        rhs: rhs.to_f64_lossy(),
        residual: ((lhs - rhs).abs() / scale).to_f64_lossy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residuals_vanish_for_mean_curvature() {
        for beta in [1.0, 2.0] {
            let res = sphere_evolution_identities(1.0_f64, beta, &CurvatureSpec::mean(2, beta), 50).unwrap();
            assert_eq!(res.len(), 100);
            let worst = res.iter().map(|r| r.residual).fold(0.0, f64::max);
            assert!(worst <= 1e-12, "beta {beta}: {worst:e}");
        }
    }

    #[test]
    fn south_pole_height_equation() {
        // At ω = −1: ∂_t u = r'·(−1) = r^{−β}, and 𝓛u + (1−β)Φ/v = βr^{−β} + (1−β)r^{−β}.
        let beta = 2.0_f64;
        let r = sphere_radius(1.0, beta, 0.1).unwrap();
        let lhs = r.powf(-beta);
        let rhs = beta * r.powf(-beta) + (1.0 - beta) * r.powf(-beta);
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn sampled_points_respect_the_band() {
        let res = sphere_evolution_identities(0.7_f64, 1.0, &CurvatureSpec::gauss(3, 1.0), 40).unwrap();
        let end = extinction_time(0.7, 1.0);
        assert!(res.iter().all(|r| r.normal_height <= -0.1 && r.normal_height >= -1.0));
        assert!(res.iter().all(|r| r.t >= 0.0 && r.t <= 0.9 * end));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sphere_evolution_identities(1.0_f64, 0.5, &CurvatureSpec::mean(2, 1.0), 1).is_err());
        assert!(sphere_evolution_identities(0.0_f64, 1.0, &CurvatureSpec::mean(2, 1.0), 1).is_err());
    }
}
