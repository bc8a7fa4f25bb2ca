//! Symmetric curvature functions: evaluation, derivatives, the dual function
//! on principal radii, and sampled certification of the structural
//! conditions the flow relies on.

mod cert;
mod expr;
mod family;
mod lambda;

pub use cert::{check_condition1, CertEntry, CertReport};
pub use expr::{format_function, parse_function, ExprError};
pub use family::{CurvatureFn, CurvatureSpec};
pub use lambda::Lambda;

use serde::Serialize;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymfunError {
    #[error("principal curvature #{index} = {value} lies outside the positive cone")]
    Domain { index: usize, value: f64 },
    #[error("empty curvature vector")]
    Empty,
    #[error("dimension mismatch: spec has n = {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("direction matrix is not symmetric (asymmetry {0:e})")]
    AsymmetricDirection(f64),
    #[error("invalid curvature spec: {0}")]
    InvalidSpec(String),
}

/// `f(λ)` with gradient `ḟⁱ` and Hessian `f̈ⁱʲ`, indexed like the (sorted)
/// `Lambda` it was evaluated at.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeBundle<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Matrix<T>,
}

impl<T: Real> DerivativeBundle<T> {
    /// `Σ ḟⁱ λᵢ − f`, zero for degree-one homogeneous `f`.
    pub fn euler_defect(&self, lam: &Lambda<T>) -> T {
        self.grad
            .iter()
            .zip(lam.as_slice())
            .map(|(&g, &l)| g * l)
            .sum::<T>()
            - self.value
    }
}

/// Residuals of the two inverse-concavity inequalities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaResiduals<T> {
    /// `Σ ḟⁱ λᵢ² − f²`.
    pub sum_residual: T,
    /// Minimum over pairs `k ≠ l` of
    /// `(ḟᵏ − ḟˡ)/(λ_k − λ_l) + ḟᵏ/λ_l + ḟˡ/λ_k`; `None` when `n = 1`.
    pub pair_residual: Option<T>,
    /// `sum_residual / f²`.
    pub sum_relative: T,
    /// Pair residual scaled by `λ_k λ_l / (ḟᵏλ_k + ḟˡλ_l)` (minimum over pairs).
    pub pair_relative: Option<T>,
}

fn check_dim<T: Real>(spec: &CurvatureSpec<T>, n: usize) -> Result<(), SymfunError> {
    if spec.n != n {
        return Err(SymfunError::DimensionMismatch {
            expected: spec.n,
            found: n,
        });
    }
    Ok(())
}

/// `f(λ)`.
pub fn eval_f<T: Real>(spec: &CurvatureSpec<T>, lam: &Lambda<T>) -> Result<T, SymfunError> {
    check_dim(spec, lam.n())?;
    Ok(spec.function.value(lam.as_slice()))
}

/// Closed-form gradient and Hessian of `f` at `λ`.
pub fn derivatives<T: Real>(
    spec: &CurvatureSpec<T>,
    lam: &Lambda<T>,
) -> Result<DerivativeBundle<T>, SymfunError> {
    check_dim(spec, lam.n())?;
    let n = lam.n();
    let mut grad = vec![T::zero(); n];
    let mut hess = vec![T::zero(); n * n];
    let value = spec
        .function
        .value_grad_hess(lam.as_slice(), &mut grad, &mut hess);
    Ok(DerivativeBundle {
        value,
        grad,
        hess: Matrix::from_row_major(n, hess),
    })
}

/// Dual function `f_*(τ) = 1 / f(1/τ₁, …, 1/τₙ)`.
pub fn eval_dual<T: Real>(spec: &CurvatureSpec<T>, tau: &Lambda<T>) -> Result<T, SymfunError> {
    check_dim(spec, tau.n())?;
    let mu: SmallVec<[T; 8]> = tau.as_slice().iter().map(|&t| t.recip()).collect();
    Ok(spec.function.value(&mu).recip())
}

/// Hessian of `f_*` at `τ` after the congruence `diag(τ) · ∇²f_* · diag(τ) / f_*`.
///
/// The congruence preserves inertia, so negative semidefiniteness of the
/// returned matrix is equivalent to concavity of `f_*` at `τ`, while its
/// entries stay O(1) regardless of how spread out `τ` is.
pub fn dual_hessian_scaled<T: Real>(
    spec: &CurvatureSpec<T>,
    tau: &Lambda<T>,
) -> Result<Matrix<T>, SymfunError> {
    check_dim(spec, tau.n())?;
    let n = tau.n();
    let mu: SmallVec<[T; 8]> = tau.as_slice().iter().map(|&t| t.recip()).collect();
    let mut grad: SmallVec<[T; 8]> = smallvec![T::zero(); n];
    let mut hess: SmallVec<[T; 36]> = smallvec![T::zero(); n * n];
    let f = spec.function.value_grad_hess(&mu, &mut grad, &mut hess);
    let e: SmallVec<[T; 8]> = (0..n).map(|k| grad[k] * mu[k] / f).collect();
    Ok(Matrix::from_fn(n, |k, l| {
        let mut m = -hess[k * n + l] * mu[k] * mu[l] / f + T::two() * e[k] * e[l];
        if k == l {
            m = m - T::two() * e[k];
        }
        m
    }))
}

/// Gradient and Hessian of the dual function `f_*` at `τ`.
pub fn dual_derivatives<T: Real>(
    spec: &CurvatureSpec<T>,
    tau: &Lambda<T>,
) -> Result<DerivativeBundle<T>, SymfunError> {
    let scaled = dual_hessian_scaled(spec, tau)?;
    let n = tau.n();
    let t = tau.as_slice();
    let mu: SmallVec<[T; 8]> = t.iter().map(|&x| x.recip()).collect();
    let mut grad = vec![T::zero(); n];
    let f = spec.function.value_grad(&mu, &mut grad);
    let value = f.recip();
    for k in 0..n {
        grad[k] = grad[k] * mu[k] * mu[k] / (f * f);
    }
    let hess = Matrix::from_fn(n, |k, l| scaled[(k, l)] * value / (t[k] * t[l]));
    Ok(DerivativeBundle { value, grad, hess })
}

fn repeated<T: Real>(a: T, b: T, scale: T) -> bool {
    (a - b).abs() < T::lit(1e-9) * scale
}

/// Divided difference `(ḟⁱ − ḟᵏ)/(λᵢ − λ_k)` with its continuous extension
/// `f̈ⁱⁱ − f̈ⁱᵏ` at (numerically) repeated eigenvalues.
fn grad_quotient<T: Real>(bundle: &DerivativeBundle<T>, lam: &[T], i: usize, k: usize) -> T {
    let scale = lam.iter().fold(T::zero(), |m, &x| m.max(x));
    if repeated(lam[i], lam[k], scale) {
        bundle.hess[(i, i)] - bundle.hess[(i, k)]
    } else {
        (bundle.grad[i] - bundle.grad[k]) / (lam[i] - lam[k])
    }
}

/// Second derivative of `F(A) = f(λ(A))` at `A = diag(λ)` in the symmetric
/// direction `B` (expressed in the eigenbasis ordered like `lam`).
pub fn ddf_direction<T: Real>(
    spec: &CurvatureSpec<T>,
    lam: &Lambda<T>,
    b: &Matrix<T>,
) -> Result<T, SymfunError> {
    check_dim(spec, lam.n())?;
    check_dim(spec, b.dim())?;
    let asym = b.asymmetry();
    if asym > T::lit(1e-12) * b.max_abs().max(T::one()) {
        return Err(SymfunError::AsymmetricDirection(asym.to_f64_lossy()));
    }
    let bundle = derivatives(spec, lam)?;
    let l = lam.as_slice();
    let n = l.len();
    let mut total = T::zero();
    for i in 0..n {
        for k in 0..n {
            total = total + bundle.hess[(i, k)] * b[(i, i)] * b[(k, k)];
        }
    }
    for i in 0..n {
        for k in 0..i {
            let bik = (b[(i, k)] + b[(k, i)]) * T::half();
            total = total + T::two() * grad_quotient(&bundle, l, i, k) * bik * bik;
        }
    }
    Ok(total)
}

/// Evaluates both inverse-concavity inequalities at `λ`.
pub fn verify_lemma2<T: Real>(
    spec: &CurvatureSpec<T>,
    lam: &Lambda<T>,
) -> Result<LemmaResiduals<T>, SymfunError> {
    let bundle = derivatives(spec, lam)?;
    let l = lam.as_slice();
    let f = bundle.value;
    let sum_residual = bundle
        .grad
        .iter()
        .zip(l)
        .map(|(&g, &x)| g * x * x)
        .sum::<T>()
        - f * f;
    let mut pair: Option<T> = None;
    let mut pair_rel: Option<T> = None;
    for k in 0..l.len() {
        for m in 0..k {
            let (gk, gm) = (bundle.grad[k], bundle.grad[m]);
            let r = grad_quotient(&bundle, l, k, m) + gk / l[m] + gm / l[k];
            let rel = r * l[k] * l[m] / (gk * l[k] + gm * l[m]);
            pair = Some(pair.map_or(r, |p| p.min(r)));
            pair_rel = Some(pair_rel.map_or(rel, |p| p.min(rel)));
        }
    }
    Ok(LemmaResiduals {
        sum_residual,
        pair_residual: pair,
        sum_relative: sum_residual / (f * f),
        pair_relative: pair_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(v: &[f64]) -> Lambda<f64> {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn mean_is_normalized() {
        let spec = CurvatureSpec::mean(3, 1.0);
        assert_eq!(eval_f(&spec, &lam(&[1.0, 1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn gauss_of_one_two_four_is_two() {
        let spec = CurvatureSpec::gauss(3, 1.0);
        let v = eval_f(&spec, &lam(&[1.0, 2.0, 4.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = CurvatureSpec::gauss(3, 1.0);
        assert_eq!(
            eval_f(&spec, &lam(&[1.0, 2.0])),
            Err(SymfunError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn mean_derivatives_are_flat() {
        let spec = CurvatureSpec::mean(4, 1.0);
        let b = derivatives(&spec, &lam(&[0.1, 2.0, 3.0, 7.0])).unwrap();
        assert!(b.grad.iter().all(|&g| g == 0.25));
        assert_eq!(b.hess.max_abs(), 0.0);
    }

    #[test]
    fn gauss_gradient_at_one_four() {
        // (λ₁λ₂)^{1/2}: ∂₁ = λ₂^{1/2}/(2λ₁^{1/2}) = 1, ∂₂ = 1/4.
        let spec = CurvatureSpec::gauss(2, 1.0);
        let b = derivatives(&spec, &lam(&[1.0, 4.0])).unwrap();
        assert!((b.value - 2.0).abs() < 1e-15);
        assert!((b.grad[0] - 1.0).abs() < 1e-15);
        assert!((b.grad[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn harmonic_mean_is_dual_of_mean() {
        let spec = CurvatureSpec::mean(2, 1.0);
        let v = eval_dual(&spec, &lam(&[1.0, 2.0])).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-15);
        let gauss = CurvatureSpec::gauss(5, 1.0);
        assert_eq!(eval_dual(&gauss, &lam(&[1.0; 5])).unwrap(), 1.0);
    }

    #[test]
    fn dual_derivatives_match_finite_differences() {
        let spec = CurvatureSpec::gauss_mean_product(3, 0.4, 1.0).unwrap();
        let tau = [0.3, 1.7, 4.0];
        let b = dual_derivatives(&spec, &lam(&tau)).unwrap();
        let fstar = |t: &[f64]| eval_dual(&spec, &lam(t)).unwrap();
        for k in 0..3 {
            let h = 1e-5 * tau[k];
            let mut p = tau;
            let mut m = tau;
            p[k] += h;
            m[k] -= h;
            let g = (fstar(&p) - fstar(&m)) / (2.0 * h);
            assert!((b.grad[k] - g).abs() < 1e-8, "grad {k}");
            let hkk = (fstar(&p) - 2.0 * fstar(&tau) + fstar(&m)) / (h * h);
            assert!((b.hess[(k, k)] - hkk).abs() < 1e-4 * hkk.abs().max(1.0), "hess {k}");
        }
    }

    #[test]
    fn ddf_vanishes_for_linear_mean() {
        let spec = CurvatureSpec::mean(3, 1.0);
        let b = Matrix::from_row_major(3, vec![1.0, 0.3, -2.0, 0.3, 4.0, 0.5, -2.0, 0.5, 0.1]);
        let v = ddf_direction(&spec, &lam(&[0.5, 1.0, 3.0]), &b).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn ddf_rejects_asymmetric_direction() {
        let spec = CurvatureSpec::mean(2, 1.0);
        let b = Matrix::from_row_major(2, vec![1.0, 0.3, 0.2, 1.0]);
        assert!(matches!(
            ddf_direction(&spec, &lam(&[1.0, 2.0]), &b),
            Err(SymfunError::AsymmetricDirection(_))
        ));
    }

    #[test]
    fn ddf_repeated_eigenvalues_use_the_limit() {
        let spec = CurvatureSpec::gauss_mean_product(2, 0.5, 1.0).unwrap();
        let b = Matrix::from_row_major(2, vec![0.0, 1.0, 1.0, 0.0]);
        let at = ddf_direction(&spec, &lam(&[1.5, 1.5]), &b).unwrap();
        let near = ddf_direction(&spec, &lam(&[1.5, 1.5 + 1e-8]), &b).unwrap();
        assert!(at.is_finite());
        assert!((at - near).abs() <= 1e-6 * at.abs());
    }

    #[test]
    fn lemma_residuals_for_mean() {
        let spec = CurvatureSpec::mean(3, 1.0);
        let r = verify_lemma2(&spec, &lam(&[1.0, 2.0, 3.0])).unwrap();
        assert!((r.sum_residual - 2.0 / 3.0).abs() < 1e-14);
        let u = verify_lemma2(&spec, &lam(&[2.5, 2.5, 2.5])).unwrap();
        assert!(u.sum_residual.abs() < 1e-14);
    }
}
