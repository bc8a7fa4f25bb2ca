//! The shrinking sphere: the exact solution every normalized speed agrees on.

use super::FlowError;
use crate::scalar::Real;

/// Time at which a sphere of radius `r0` shrinks to a point.
pub fn extinction_time<T: Real>(r0: T, beta: T) -> T {
    r0.powf(beta + T::one()) / (beta + T::one())
}

/// `r(t) = (r₀^{β+1} − (β+1)t)^{1/(β+1)}`, the solution of `r' = −r^{−β}`.
pub fn sphere_radius<T: Real>(r0: T, beta: T, t: T) -> Result<T, FlowError> {
    let b1 = beta + T::one();
    let base = r0.powf(b1) - b1 * t;
    if !(base > T::zero()) {
        return Err(FlowError::ExtinctionReached {
            t: t.to_f64_lossy(),
            extinction: extinction_time(r0, beta).to_f64_lossy(),
        });
    }
    if t == T::zero() {
        return Ok(r0);
    }
    Ok(base.powf(b1.recip()))
}

/// Height `c − √(r(t)² − |x|²)` of the lower cap of the shrinking sphere
/// centred at `(0, c)`.
pub fn sphere_cap_reference<T: Real>(r0: T, beta: T, center_height: T, t: T, x: [T; 2]) -> Result<T, FlowError> {
    let r = sphere_radius(r0, beta, t)?;
    let rho2 = x[0] * x[0] + x[1] * x[1];
    let s2 = r * r - rho2;
    if !(s2 > T::zero()) {
        return Err(FlowError::OutsideCap {
            distance: rho2.sqrt().to_f64_lossy(),
            radius: r.to_f64_lossy(),
        });
    }
    Ok(center_height - s2.sqrt())
}

/// `∂_t` of [`sphere_cap_reference`]: `r^{1−β} / √(r² − |x|²)`.
pub fn sphere_cap_time_derivative<T: Real>(r0: T, beta: T, t: T, x: [T; 2]) -> Result<T, FlowError> {
    let r = sphere_radius(r0, beta, t)?;
    let rho2 = x[0] * x[0] + x[1] * x[1];
    let s2 = r * r - rho2;
    if !(s2 > T::zero()) {
        return Err(FlowError::OutsideCap {
            distance: rho2.sqrt().to_f64_lossy(),
            radius: r.to_f64_lossy(),
        });
    }
    Ok(r.powf(T::one() - beta) / s2.sqrt())
}
