//! Closed convex curves evolved through their support function,
//! `∂_t S = −κ^β` with `1/κ = S_θθ + S`.
//!
//! The second difference uses the denominator `2 − 2cos Δθ` instead of
//! `Δθ²`. Both are second-order consistent, but this one annihilates
//! `cos θ` and `sin θ` exactly, so translating the curve (adding
//! `a₁cos θ + a₂sin θ` to `S`) commutes with the discrete flow.

use std::io::{self, Write};

use serde::Serialize;

use super::FlowError;
use crate::scalar::Real;

pub const MIN_SUPPORT_NODES: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct SupportCurve<T> {
    /// Support function samples at `θᵢ = 2πi/m` relative to `center`.
    pub s: Vec<T>,
    pub t: T,
    pub beta: T,
    pub center: [T; 2],
}

impl<T: Real> SupportCurve<T> {
    pub fn new(s: Vec<T>, beta: T, center: [T; 2]) -> Result<Self, FlowError> {
        if s.len() < MIN_SUPPORT_NODES {
            return Err(FlowError::InvalidConfig(format!(
                "support curve needs at least {MIN_SUPPORT_NODES} nodes, got {}",
                s.len()
            )));
        }
        if !(beta >= T::one()) {
            return Err(FlowError::InvalidConfig(format!("beta must be >= 1, got {beta}")));
        }
        let c = Self {
            s,
            t: T::zero(),
            beta,
            center,
        };
        c.check_convex()?;
        Ok(c)
    }

    /// Circle of radius `r0` about the origin.
    pub fn circle(r0: T, m: usize, beta: T) -> Result<Self, FlowError> {
        Self::new(vec![r0; m], beta, [T::zero(), T::zero()])
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.s.len()
    }

    pub fn dtheta(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.m())
    }

    pub fn theta(&self, i: usize) -> T {
        self.dtheta() * T::from_usize_lossy(i)
    }

    fn denom(&self) -> T {
        T::two() - T::two() * self.dtheta().cos()
    }

    /// Discrete radius of curvature `S_θθ + S` at every node.
    pub fn radii(&self) -> Vec<T> {
        radii_of(&self.s, self.denom())
    }

    pub fn curvature(&self) -> Vec<T> {
        self.radii().into_iter().map(|r| r.recip()).collect()
    }

    fn check_convex(&self) -> Result<(), FlowError> {
        check_radii(&self.radii(), self.t)
    }

    /// Mean width `(1/m) Σ (S(θ) + S(θ + π))`, i.e. twice the mean of `S`.
    pub fn mean_width(&self) -> T {
        T::two() * self.s.iter().copied().sum::<T>() / T::from_usize_lossy(self.m())
    }

    /// Points `X(θ) = S·(cos θ, sin θ) + S_θ·(−sin θ, cos θ)` in world
    /// coordinates.
    pub fn points(&self) -> Vec<[T; 2]> {
        let m = self.m();
        let d = self.dtheta();
        let two_sin = T::two() * d.sin();
        (0..m)
            .map(|i| {
                let th = self.theta(i);
                let (s, c) = th.sin_cos();
                let ds = (self.s[(i + 1) % m] - self.s[(i + m - 1) % m]) / two_sin;
                [
                    self.center[0] + self.s[i] * c - ds * s,
                    self.center[1] + self.s[i] * s + ds * c,
                ]
            })
            .collect()
    }

    /// Height of the lower boundary above `x`: the upper envelope of the
    /// support lines with downward normals,
    /// `sup_{θ ∈ (−π, 0)} (x cos θ − S(θ)) / (−sin θ)`.
    pub fn lower_graph(&self, x: T) -> T {
        let m = self.m();
        let xr = x - self.center[0];
        let mut best = T::neg_infinity();
        for i in 0..m {
            let (s, c) = self.theta(i).sin_cos();
            if s < -T::lit(1e-9) {
                best = best.max((xr * c - self.s[i]) / (-s));
            }
        }
        self.center[1] + best
    }

    /// `theta,S,kappa` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "theta,S,kappa")?;
        for (i, k) in self.curvature().into_iter().enumerate() {
            writeln!(out, "{},{},{}", self.theta(i), self.s[i], k)?;
        }
        Ok(())
    }
}

fn radii_of<T: Real>(s: &[T], denom: T) -> Vec<T> {
    let m = s.len();
    (0..m)
        .map(|i| (s[(i + 1) % m] - s[i] - s[i] + s[(i + m - 1) % m]) / denom + s[i])
        .collect()
}

fn check_radii<T: Real>(radii: &[T], t: T) -> Result<(), FlowError> {
    match radii.iter().position(|&r| !(r > T::zero()) || !r.is_finite()) {
        Some(node) => Err(FlowError::NonConvexCurve {
            node,
            radius: radii[node].to_f64_lossy(),
            t: t.to_f64_lossy(),
        }),
        None => Ok(()),
    }
}

/// `safety·(2 − 2cos Δθ) / (2β·κ_max^{β+1})`, the explicit stability limit
/// of the linearized operator `βκ^{β+1}∂_θθ`.
pub fn support_cfl_dt<T: Real>(curve: &SupportCurve<T>, safety: T) -> T {
    let kmax = curve
        .radii()
        .into_iter()
        .fold(T::zero(), |m, r| m.max(r.recip()));
    safety * curve.denom() / (T::two() * curve.beta * kmax.powf(curve.beta + T::one()))
}

/// One explicit midpoint step of `∂_t S = −κ^β`.
pub fn support_flow_step<T: Real>(curve: &SupportCurve<T>, dt: T) -> Result<SupportCurve<T>, FlowError> {
    let denom = curve.denom();
    let beta = curve.beta;
    let speed = |radii: &[T]| -> Vec<T> { radii.iter().map(|&r| r.recip().powf(beta)).collect() };
    let r1 = radii_of(&curve.s, denom);
    check_radii(&r1, curve.t)?;
    let k1 = speed(&r1);
    let half = dt * T::half();
    let mid: Vec<T> = curve.s.iter().zip(&k1).map(|(&s, &k)| s - half * k).collect();
    let r2 = radii_of(&mid, denom);
    check_radii(&r2, curve.t + half)?;
    let k2 = speed(&r2);
    let s: Vec<T> = curve.s.iter().zip(&k2).map(|(&s, &k)| s - dt * k).collect();
    let next = SupportCurve {
        s,
        t: curve.t + dt,
        beta,
        center: curve.center,
    };
    next.check_convex()?;
    Ok(next)
}

/// Integrates to `t_end` with CFL-limited steps.
pub fn run_support_flow<T: Real>(
    curve: &SupportCurve<T>,
    t_end: T,
    safety: T,
    max_steps: usize,
) -> Result<SupportCurve<T>, FlowError> {
    let mut c = curve.clone();
    let mut steps = 0;
    while c.t < t_end {
        if steps >= max_steps {
            return Err(FlowError::MaxSteps {
                steps,
                t: c.t.to_f64_lossy(),
            });
        }
        let mut dt = support_cfl_dt(&c, safety);
        let last = t_end - c.t <= dt;
        if last {
            dt = t_end - c.t;
        }
        c = support_flow_step(&c, dt)?;
        if last {
            c.t = t_end;
        }
        steps += 1;
    }
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    /// Time at which the mean width first drops below the threshold.
    pub t_collapse: f64,
    pub steps: usize,
    pub final_width: f64,
    pub width_fraction: f64,
}

/// Flows until the mean width falls below `width_fraction` of its initial
/// value and reports the time.
pub fn collapse_time<T: Real>(
    curve: &SupportCurve<T>,
    safety: T,
    width_fraction: T,
    max_steps: usize,
) -> Result<CollapseReport, FlowError> {
    let target = curve.mean_width() * width_fraction;
    let mut c = curve.clone();
    let mut steps = 0;
    while c.mean_width() > target {
        if steps >= max_steps {
            return Err(FlowError::MaxSteps {
                steps,
                t: c.t.to_f64_lossy(),
            });
        }
        c = support_flow_step(&c, support_cfl_dt(&c, safety))?;
        steps += 1;
    }
    Ok(CollapseReport {
        t_collapse: c.t.to_f64_lossy(),
        steps,
        final_width: c.mean_width().to_f64_lossy(),
        width_fraction: width_fraction.to_f64_lossy(),
    })
}

/// Reflects the part of the graph of `w0` below `level` across the line
/// `y = level`, closing it into a convex body symmetric about that line,
/// and returns the support function of its outer parallel body at distance
/// `eps` on `m` directions. The support function is taken about the point of
/// the level line above the middle of the sublevel interval.
pub fn double_and_envelope<T: Real>(
    xs: &[T],
    w0: &[T],
    level: T,
    eps: T,
    m: usize,
    beta: T,
) -> Result<SupportCurve<T>, FlowError> {
    if xs.len() != w0.len() || xs.len() < 2 {
        return Err(FlowError::InvalidConfig("profile needs matching x and w samples".into()));
    }
    if !(eps > T::zero()) {
        return Err(FlowError::InvalidConfig("eps must be positive".into()));
    }
    let mut lower: Vec<[T; 2]> = Vec::new();
    for i in 0..xs.len() {
        if w0[i] <= level {
            lower.push([xs[i], w0[i]]);
        }
        if i + 1 < xs.len() && (w0[i] <= level) != (w0[i + 1] <= level) {
            let a = (level - w0[i]) / (w0[i + 1] - w0[i]);
            lower.push([xs[i] + a * (xs[i + 1] - xs[i]), level]);
        }
    }
    if lower.is_empty() {
        return Err(FlowError::EmptySublevel);
    }
    let xmin = lower.iter().map(|p| p[0]).fold(T::infinity(), T::min);
    let xmax = lower.iter().map(|p| p[0]).fold(T::neg_infinity(), T::max);
    let center = [(xmin + xmax) * T::half(), level];
    // Relative to the centre the doubled body is {|y| ≤ level − w0(x)}.
    let pts: Vec<[T; 2]> = lower
        .iter()
        .flat_map(|p| {
            let x = p[0] - center[0];
            let y = level - p[1];
            [[x, -y], [x, y]]
        })
        .collect();
    let dth = T::TAU() / T::from_usize_lossy(m.max(1));
    let s = (0..m)
        .map(|i| {
            let (sn, cs) = (dth * T::from_usize_lossy(i)).sin_cos();
            pts.iter()
                .map(|p| p[0] * cs + p[1] * sn)
                .fold(T::neg_infinity(), T::max)
                + eps
        })
        .collect();
    SupportCurve::new(s, beta, center)
}

/// Height of the lower boundary of the parallel body at distance `eps`
/// below a convex graph, at abscissa `x`. `profile` returns `(w, w')`.
/// Solves `x₀ + eps·w'(x₀)/√(1+w'(x₀)²) = x` by bisection.
pub fn parallel_lower_graph<T: Real>(profile: impl Fn(T) -> (T, T), eps: T, x: T) -> T {
    let foot = |x0: T| {
        let (_, d) = profile(x0);
        x0 + eps * d / (T::one() + d * d).sqrt()
    };
    let (mut lo, mut hi) = (x - eps - eps, x + eps + eps);
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if foot(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * (T::one() + x.abs()) {
            break;
        }
    }
    let x0 = (lo + hi) * T::half();
    let (w, d) = profile(x0);
    w - eps / (T::one() + d * d).sqrt()
}

fn point_segment_distance<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let u = if len2 > T::zero() {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let d = [ap[0] - u * ab[0], ap[1] - u * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

fn directed<T: Real>(from: &[[T; 2]], to: &[[T; 2]]) -> T {
    from.iter()
        .map(|&p| {
            if to.len() == 1 {
                return point_segment_distance(p, to[0], to[0]);
            }
            to.windows(2)
                .map(|s| point_segment_distance(p, s[0], s[1]))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max)
}

/// Symmetric Hausdorff distance between two polylines (vertex lists).
pub fn hausdorff_polylines<T: Real>(a: &[[T; 2]], b: &[[T; 2]]) -> T {
    if a.is_empty() || b.is_empty() {
        return T::infinity();
    }
    directed(a, b).max(directed(b, a))
}
