use serde::Serialize;

use super::GeometryError;
use crate::scalar::Real;
use crate::symfun::Lambda;

/// Height of a rotationally symmetric graph as a function of the radius,
/// `r ↦ φ⁻¹(r)`, with its first two radial derivatives.
pub trait RadialProfile<T: Real> {
    /// Dimension of the graph's base.
    fn n(&self) -> usize;

    /// `(φ⁻¹, φ⁻¹_r, φ⁻¹_rr)` at radius `r`.
    fn eval(&self, r: T) -> Result<(T, T, T), GeometryError>;
}

/// Lower cap `c − √(r₀² − r²)` of a sphere of radius `r₀`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SphereProfile<T> {
    pub r0: T,
    pub center_height: T,
    pub n: usize,
}

impl<T: Real> RadialProfile<T> for SphereProfile<T> {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, r: T) -> Result<(T, T, T), GeometryError> {
        let s2 = self.r0 * self.r0 - r * r;
        if !(s2 > T::zero()) {
            return Err(GeometryError::Domain(format!(
                "radius {r} outside the cap of radius {}",
                self.r0
            )));
        }
        let s = s2.sqrt();
        Ok((self.center_height - s, r / s, self.r0 * self.r0 / (s2 * s)))
    }
}

/// Rotational barrier obtained by inverting the radius-of-height profile
/// `φ(h, t) = R₀ − δ(h − l)² − A·t` on the band `h < l`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BarrierProfile<T> {
    pub r0: T,
    pub delta: T,
    pub l: T,
    /// Time coefficient `A`.
    pub a: T,
    pub t: T,
    pub n: usize,
}

impl<T: Real> BarrierProfile<T> {
    /// `φ(h, t)`, the radius of the level set at height `h`.
    pub fn radius_at(&self, h: T) -> T {
        self.r0 - self.delta * (h - self.l) * (h - self.l) - self.a * self.t
    }

    /// Height on the lower branch `h < l` where the radius equals `r`.
    pub fn height_at(&self, r: T) -> Result<T, GeometryError> {
        let d = (self.r0 - self.a * self.t - r) / self.delta;
        if !(d > T::zero()) {
            return Err(GeometryError::Domain(format!(
                "radius {r} is at or beyond the widest level of the barrier"
            )));
        }
        Ok(self.l - d.sqrt())
    }

    /// `(φ⁻¹_r, φ⁻¹_rr)` at height `h`, i.e. `1/(2δ(l−h))` and `2δ/(2δ(l−h))³`.
    pub fn inverse_derivatives_at_height(&self, h: T) -> (T, T) {
        let d = T::two() * self.delta * (self.l - h);
        (d.recip(), T::two() * self.delta / (d * d * d))
    }

    /// `∂_t φ⁻¹ = A / (2δ(l − h))` at fixed radius.
    pub fn time_derivative_at_height(&self, h: T) -> T {
        self.a / (T::two() * self.delta * (self.l - h))
    }
}

impl<T: Real> RadialProfile<T> for BarrierProfile<T> {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, r: T) -> Result<(T, T, T), GeometryError> {
        let h = self.height_at(r)?;
        let (p, q) = self.inverse_derivatives_at_height(h);
        Ok((h, p, q))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationalCurvatures<T> {
    /// Gauss curvature.
    pub k: T,
    /// Mean curvature (sum of principal curvatures).
    pub h: T,
    pub lam: Lambda<T>,
    /// Gradient function `√(1 + (φ⁻¹_r)²)`.
    pub v: T,
}

/// Gauss and mean curvature of a rotational graph from the closed-form
/// expressions in the radial derivatives, plus the principal curvatures
/// (`n − 1` tangential copies of `p/(r√(1+p²))` and the radial
/// `q/(1+p²)^{3/2}`).
pub fn rotational_curvatures<T: Real, P: RadialProfile<T> + ?Sized>(
    profile: &P,
    r: T,
) -> Result<RotationalCurvatures<T>, GeometryError> {
    if !(r > T::zero()) {
        return Err(GeometryError::Domain(format!("radius must be positive, got {r}")));
    }
    let (_, p, q) = profile.eval(r)?;
    curvatures_from_derivatives(profile.n(), r, p, q)
}

/// Same as [`rotational_curvatures`] with `p = φ⁻¹_r` and `q = φ⁻¹_rr`
/// supplied directly.
pub fn curvatures_from_derivatives<T: Real>(
    n: usize,
    r: T,
    p: T,
    q: T,
) -> Result<RotationalCurvatures<T>, GeometryError> {
    if !(r > T::zero()) {
        return Err(GeometryError::Domain(format!("radius must be positive, got {r}")));
    }
    if n == 0 {
        return Err(GeometryError::Domain("dimension must be positive".into()));
    }
    let one_p = T::one() + p * p;
    let v = one_p.sqrt();
    let nm1 = T::from_usize_lossy(n - 1);
    let k = q * p.abs().powi(n as i32 - 1) / (r.powi(n as i32 - 1) * one_p.powf(T::lit((n + 2) as f64 / 2.0)));
    let h = (nm1 * p / r + q / one_p) / v;
    let tangential = p / (r * v);
    let radial = q / (one_p * v);
    let mut values = vec![tangential; n - 1];
    values.push(radial);
    let lam = Lambda::new(&values).map_err(|e| GeometryError::Domain(e.to_string()))?;
    Ok(RotationalCurvatures { k, h, lam, v })
}
