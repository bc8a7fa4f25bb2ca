//! Closed-form values and derivatives of the built-in curvature functions.
//!
//! All routines take raw slices in any order and write derivatives in the
//! same order; ordering/validation lives in the public operations.

use serde::Serialize;
use smallvec::{smallvec, SmallVec};

use super::SymfunError;
use crate::scalar::Real;

type Buf<T> = SmallVec<[T; 8]>;
type HessBuf<T> = SmallVec<[T; 36]>;

/// Symmetric, increasing, degree-one homogeneous function of the principal
/// curvatures, normalized so that `f(1, …, 1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CurvatureFn<T> {
    /// `((1/n) Σ λᵢʳ)^{1/r}`, `r > 0`.
    PowerMean { r: T },
    /// `(E_k / C(n, k))^{1/k}` with `E_k` the k-th elementary symmetric polynomial.
    ElemSymRoot { k: usize },
    /// `(Π λᵢ)^{1/n}`.
    GaussPower,
    /// `Π fⱼ^{wⱼ}` with weights in `[0, 1]` summing to one.
    WeightedProduct(Vec<(CurvatureFn<T>, T)>),
}

/// A curvature function together with its dimension and the speed exponent
/// `β` of the normal velocity `F^β`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureSpec<T> {
    pub function: CurvatureFn<T>,
    pub n: usize,
    pub beta: T,
}

impl<T: Real> CurvatureSpec<T> {
    pub fn new(function: CurvatureFn<T>, n: usize, beta: T) -> Result<Self, SymfunError> {
        let spec = Self { function, n, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mean(n: usize, beta: T) -> Self {
        Self::new(CurvatureFn::PowerMean { r: T::one() }, n, beta).expect("valid mean spec")
    }

    pub fn gauss(n: usize, beta: T) -> Self {
        Self::new(CurvatureFn::GaussPower, n, beta).expect("valid gauss spec")
    }

    /// `K^{s/n} · mean^{1-s}`, the product family the long-time barrier is
    /// built for.
    pub fn gauss_mean_product(n: usize, s: T, beta: T) -> Result<Self, SymfunError> {
        Self::new(
            CurvatureFn::WeightedProduct(vec![
                (CurvatureFn::GaussPower, s),
                (CurvatureFn::PowerMean { r: T::one() }, T::one() - s),
            ]),
            n,
            beta,
        )
    }

    pub fn with_beta(&self, beta: T) -> Result<Self, SymfunError> {
        Self::new(self.function.clone(), self.n, beta)
    }

    pub fn validate(&self) -> Result<(), SymfunError> {
        if self.n == 0 {
            return Err(SymfunError::InvalidSpec("dimension n must be at least 1".into()));
        }
        if !(self.beta >= T::one()) || !self.beta.is_finite() {
            return Err(SymfunError::InvalidSpec(format!(
                "beta must be >= 1 (got {})",
                self.beta
            )));
        }
        self.function.validate(self.n)
    }
}

impl<T: Real> CurvatureFn<T> {
    pub fn validate(&self, n: usize) -> Result<(), SymfunError> {
        match self {
            CurvatureFn::PowerMean { r } => {
                if !(*r > T::zero()) || !r.is_finite() {
                    return Err(SymfunError::InvalidSpec(format!(
                        "power mean exponent must be > 0 (got {r})"
                    )));
                }
            }
            CurvatureFn::ElemSymRoot { k } => {
                if *k == 0 || *k > n {
                    return Err(SymfunError::InvalidSpec(format!(
                        "elementary symmetric order k = {k} must lie in 1..={n}"
                    )));
                }
            }
            CurvatureFn::GaussPower => {}
            CurvatureFn::WeightedProduct(parts) => {
                if parts.is_empty() {
                    return Err(SymfunError::InvalidSpec("empty product".into()));
                }
                let mut sum = T::zero();
                for (f, w) in parts {
                    if !(*w >= T::zero() && *w <= T::one()) {
                        return Err(SymfunError::InvalidSpec(format!(
                            "product weight {w} outside [0, 1]"
                        )));
                    }
                    sum = sum + *w;
                    f.validate(n)?;
                }
                if (sum - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
                    return Err(SymfunError::InvalidSpec(format!(
                        "product weights must sum to 1 (got {sum})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True if the tree contains an `ElemSymRoot(k)` with `k < n`.
    pub fn has_partial_elem_sym(&self, n: usize) -> bool {
        match self {
            CurvatureFn::ElemSymRoot { k } => *k < n,
            CurvatureFn::WeightedProduct(parts) => {
                parts.iter().any(|(f, w)| *w > T::zero() && f.has_partial_elem_sym(n))
            }
            _ => false,
        }
    }

    /// `f(λ)` for `λ` in the positive cone.
    pub fn value(&self, lam: &[T]) -> T {
        let n = lam.len();
        match self {
            CurvatureFn::PowerMean { r } => power_mean(lam, *r),
            CurvatureFn::GaussPower => geometric_mean(lam),
            CurvatureFn::ElemSymRoot { k } => {
                let m = max_of(lam);
                let mu: Buf<T> = lam.iter().map(|&x| x / m).collect();
                let e = elem_sym_upto(&mu, *k);
                m * (e[*k] / binomial::<T>(n, *k)).powf(T::one() / T::from_usize_lossy(*k))
            }
            CurvatureFn::WeightedProduct(parts) => parts
                .iter()
                .filter(|(_, w)| *w > T::zero())
                .fold(T::one(), |acc, (f, w)| acc * f.value(lam).powf(*w)),
        }
    }

    /// `f(λ)` and its gradient, written into `grad`.
    pub fn value_grad(&self, lam: &[T], grad: &mut [T]) -> T {
        let n = lam.len();
        debug_assert_eq!(grad.len(), n);
        match self {
            CurvatureFn::PowerMean { r } => {
                let f = power_mean(lam, *r);
                let nn = T::from_usize_lossy(n);
                for (g, &x) in grad.iter_mut().zip(lam) {
                    *g = if *r == T::one() {
                        nn.recip()
                    } else {
                        (x / f).powf(*r - T::one()) / nn
                    };
                }
                f
            }
            CurvatureFn::GaussPower => {
                let f = geometric_mean(lam);
                let nn = T::from_usize_lossy(n);
                for (g, &x) in grad.iter_mut().zip(lam) {
                    *g = f / (nn * x);
                }
                f
            }
            CurvatureFn::ElemSymRoot { k } => {
                let mut hess: HessBuf<T> = smallvec![T::zero(); n * n];
                elem_sym_root_derivs(lam, *k, grad, &mut hess, false)
            }
            CurvatureFn::WeightedProduct(parts) => {
                let mut sub: Buf<T> = smallvec![T::zero(); n];
                grad.iter_mut().for_each(|g| *g = T::zero());
                let mut log_f = T::zero();
                for (f, w) in parts.iter().filter(|(_, w)| *w > T::zero()) {
                    let fj = f.value_grad(lam, &mut sub);
                    log_f = log_f + *w * fj.ln();
                    for (g, s) in grad.iter_mut().zip(&sub) {
                        *g = *g + *w * *s / fj;
                    }
                }
                let f = product_value(parts, lam, log_f);
                grad.iter_mut().for_each(|g| *g = *g * f);
                f
            }
        }
    }

    /// `f(λ)`, gradient and row-major Hessian.
    pub fn value_grad_hess(&self, lam: &[T], grad: &mut [T], hess: &mut [T]) -> T {
        let n = lam.len();
        debug_assert_eq!(hess.len(), n * n);
        match self {
            CurvatureFn::PowerMean { r } => {
                let f = self.value_grad(lam, grad);
                let one_minus_r = T::one() - *r;
                for i in 0..n {
                    for j in 0..n {
                        let mut h = one_minus_r / f * grad[i] * grad[j];
                        if i == j {
                            h = h - one_minus_r * grad[i] / lam[i];
                        }
                        hess[i * n + j] = h;
                    }
                }
                f
            }
            CurvatureFn::GaussPower => {
                let f = self.value_grad(lam, grad);
                let nn = T::from_usize_lossy(n);
                for i in 0..n {
                    for j in 0..n {
                        let mut h = f / (nn * nn * lam[i] * lam[j]);
                        if i == j {
                            h = h - f / (nn * lam[i] * lam[i]);
                        }
                        hess[i * n + j] = h;
                    }
                }
                f
            }
            CurvatureFn::ElemSymRoot { k } => elem_sym_root_derivs(lam, *k, grad, hess, true),
            CurvatureFn::WeightedProduct(parts) => {
                let mut sub_g: Buf<T> = smallvec![T::zero(); n];
                let mut sub_h: HessBuf<T> = smallvec![T::zero(); n * n];
                // Accumulate log-derivatives: a = Σ wⱼ ∇fⱼ/fⱼ and
                // B = Σ wⱼ (∇²fⱼ/fⱼ − ∇fⱼ∇fⱼᵀ/fⱼ²).
                let mut a: Buf<T> = smallvec![T::zero(); n];
                hess.iter_mut().for_each(|h| *h = T::zero());
                let mut log_f = T::zero();
                for (f, w) in parts.iter().filter(|(_, w)| *w > T::zero()) {
                    let fj = f.value_grad_hess(lam, &mut sub_g, &mut sub_h);
                    log_f = log_f + *w * fj.ln();
                    for i in 0..n {
                        a[i] = a[i] + *w * sub_g[i] / fj;
                        for j in 0..n {
                            hess[i * n + j] = hess[i * n + j]
                                + *w * (sub_h[i * n + j] / fj - sub_g[i] * sub_g[j] / (fj * fj));
                        }
                    }
                }
                let f = product_value(parts, lam, log_f);
                for i in 0..n {
                    grad[i] = f * a[i];
                    for j in 0..n {
                        hess[i * n + j] = f * (hess[i * n + j] + a[i] * a[j]);
                    }
                }
                f
            }
        }
    }
}

fn product_value<T: Real>(parts: &[(CurvatureFn<T>, T)], lam: &[T], log_f: T) -> T {
    // Direct product keeps f(1,…,1) = 1 exact; the log-sum is only a fallback
    // for extreme ratios where the powers would overflow.
    let direct = parts
        .iter()
        .filter(|(_, w)| *w > T::zero())
        .fold(T::one(), |acc, (f, w)| acc * f.value(lam).powf(*w));
    if direct.is_finite() && direct > T::zero() {
        direct
    } else {
        log_f.exp()
    }
}

fn max_of<T: Real>(lam: &[T]) -> T {
    lam.iter().fold(T::zero(), |m, &x| m.max(x))
}

fn power_mean<T: Real>(lam: &[T], r: T) -> T {
    let nn = T::from_usize_lossy(lam.len());
    if r == T::one() {
        return lam.iter().copied().sum::<T>() / nn;
    }
    let m = max_of(lam);
    let s = lam.iter().map(|&x| (x / m).powf(r)).sum::<T>() / nn;
    m * s.powf(r.recip())
}

fn geometric_mean<T: Real>(lam: &[T]) -> T {
    let m = max_of(lam);
    let p = lam.iter().fold(T::one(), |acc, &x| acc * (x / m));
    let root = match lam.len() {
        1 => p,
        2 => p.sqrt(),
        3 => p.cbrt(),
        n => p.powf(T::from_usize_lossy(n).recip()),
    };
    m * root
}

fn binomial<T: Real>(n: usize, k: usize) -> T {
    let mut c = 1f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    T::lit(c.round())
}

/// `[E_0, …, E_k]` of `x`.
fn elem_sym_upto<T: Real>(x: &[T], k: usize) -> Buf<T> {
    let mut e: Buf<T> = smallvec![T::zero(); k + 1];
    e[0] = T::one();
    for &xi in x {
        for j in (1..=k).rev() {
            e[j] = e[j] + xi * e[j - 1];
        }
    }
    e
}

/// `E_m` of `x` with the entries at `skip` removed.
fn elem_sym_excluding<T: Real>(x: &[T], m: usize, skip: &[usize]) -> T {
    let mut e: Buf<T> = smallvec![T::zero(); m + 1];
    e[0] = T::one();
    for (i, &xi) in x.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        for j in (1..=m).rev() {
            e[j] = e[j] + xi * e[j - 1];
        }
    }
    e[m]
}

fn elem_sym_root_derivs<T: Real>(
    lam: &[T],
    k: usize,
    grad: &mut [T],
    hess: &mut [T],
    want_hess: bool,
) -> T {
    let n = lam.len();
    // Homogeneity: evaluate on λ/m, gradient is degree 0, Hessian degree −1.
    let m = max_of(lam);
    let mu: Buf<T> = lam.iter().map(|&x| x / m).collect();
    let ek = elem_sym_upto(&mu, k)[k];
    let kk = T::from_usize_lossy(k);
    let f_mu = (ek / binomial::<T>(n, k)).powf(kk.recip());
    let coef = f_mu / (kk * ek);
    let partial: Buf<T> = (0..n).map(|i| elem_sym_excluding(&mu, k - 1, &[i])).collect();
    for i in 0..n {
        grad[i] = coef * partial[i];
    }
    if want_hess {
        for i in 0..n {
            for j in 0..n {
                let mixed = if i != j && k >= 2 {
                    elem_sym_excluding(&mu, k - 2, &[i, j])
                } else {
                    T::zero()
                };
                let h = coef * ((kk.recip() - T::one()) * partial[i] * partial[j] / ek + mixed);
                hess[i * n + j] = h / m;
            }
        }
    }
    m * f_mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(f: &CurvatureFn<f64>, lam: &[f64]) -> Vec<f64> {
        (0..lam.len())
            .map(|i| {
                let h = 1e-6 * lam[i];
                let mut p = lam.to_vec();
                let mut m = lam.to_vec();
                p[i] += h;
                m[i] -= h;
                (f.value(&p) - f.value(&m)) / (2.0 * h)
            })
            .collect()
    }

    fn zoo() -> Vec<CurvatureFn<f64>> {
        vec![
            CurvatureFn::PowerMean { r: 0.5 },
            CurvatureFn::PowerMean { r: 1.0 },
            CurvatureFn::PowerMean { r: 2.0 },
            CurvatureFn::GaussPower,
            CurvatureFn::ElemSymRoot { k: 1 },
            CurvatureFn::ElemSymRoot { k: 2 },
            CurvatureFn::ElemSymRoot { k: 3 },
            CurvatureFn::WeightedProduct(vec![
                (CurvatureFn::GaussPower, 0.3),
                (CurvatureFn::PowerMean { r: 2.0 }, 0.7),
            ]),
        ]
    }

    #[test]
    fn gradients_match_central_differences() {
        let lam = [0.7, 1.3, 2.9];
        for f in zoo() {
            let mut g = [0.0; 3];
            f.value_grad(&lam, &mut g);
            for (a, b) in g.iter().zip(fd_grad(&f, &lam)) {
                assert!((a - b).abs() <= 1e-6 * b.abs(), "{f:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hessians_match_differenced_gradients() {
        let lam = [0.7, 1.3, 2.9];
        for f in zoo() {
            let mut g = [0.0; 3];
            let mut h = [0.0; 9];
            f.value_grad_hess(&lam, &mut g, &mut h);
            for j in 0..3 {
                let step = 1e-5 * lam[j];
                let mut p = lam;
                let mut m = lam;
                p[j] += step;
                m[j] -= step;
                let (mut gp, mut gm) = ([0.0; 3], [0.0; 3]);
                f.value_grad(&p, &mut gp);
                f.value_grad(&m, &mut gm);
                for i in 0..3 {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    assert!((h[i * 3 + j] - fd).abs() < 1e-7, "{f:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn elem_sym_extremes_reduce_to_mean_and_gauss() {
        let lam = [0.4_f64, 1.1, 5.0, 2.2];
        let mean = CurvatureFn::PowerMean { r: 1.0 }.value(&lam);
        let gauss = CurvatureFn::GaussPower.value(&lam);
        assert!((CurvatureFn::ElemSymRoot { k: 1 }.value(&lam) - mean).abs() < 1e-14);
        assert!((CurvatureFn::ElemSymRoot { k: 4 }.value(&lam) - gauss).abs() < 1e-14);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let bad = CurvatureFn::WeightedProduct(vec![
            (CurvatureFn::GaussPower, 0.5),
            (CurvatureFn::PowerMean { r: 1.0 }, 0.6),
        ]);
        assert!(bad.validate(2).is_err());
        assert!(CurvatureFn::<f64>::ElemSymRoot { k: 4 }.validate(3).is_err());
        assert!(CurvatureFn::PowerMean { r: 0.0 }.validate(3).is_err());
    }
}
