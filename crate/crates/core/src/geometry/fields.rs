use rayon::prelude::*;
use serde::Serialize;

use super::{GeometryError, GraphGrid, GraphState};
use crate::linalg::{generalized_eigenvalues, Matrix};
use crate::scalar::Real;
use crate::symfun::{CurvatureSpec, Lambda};

/// Central-difference first and second derivatives at one node.
///
/// `d2w` holds `(w₁₁, w₁₂, w₂₂)`; unused entries are zero for `n = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil<T> {
    pub dw: [T; 2],
    pub d2w: [T; 3],
}

impl<T: Real> Stencil<T> {
    pub fn grad_sq(&self) -> T {
        self.dw[0] * self.dw[0] + self.dw[1] * self.dw[1]
    }

    pub fn hessian(&self, n: usize) -> Matrix<T> {
        if n == 1 {
            Matrix::from_diagonal(&[self.d2w[0]])
        } else {
            Matrix::from_row_major(2, vec![self.d2w[0], self.d2w[1], self.d2w[1], self.d2w[2]])
        }
    }
}

/// Second-order central differences at node `k`, which must be interior.
#[inline]
pub fn stencil_at<T: Real>(state: &GraphState<T>, k: usize) -> Stencil<T> {
    stencil(&state.grid, &state.w, k)
}

/// [`stencil_at`] on a bare height vector laid out like `grid`.
#[inline]
pub fn stencil<T: Real>(grid: &GraphGrid<T>, w: &[T], k: usize) -> Stencil<T> {
    let dx = grid.spacing();
    let inv2 = (T::two() * dx).recip();
    let inv_sq = (dx * dx).recip();
    let c = w[k];
    let (e, we) = (w[k + 1], w[k - 1]);
    let dw0 = (e - we) * inv2;
    let d00 = (e - c - c + we) * inv_sq;
    if grid.n() == 1 {
        return Stencil {
            dw: [dw0, T::zero()],
            d2w: [d00, T::zero(), T::zero()],
        };
    }
    let s = grid.stride(1);
    let (nn, ss) = (w[k + s], w[k - s]);
    let dw1 = (nn - ss) * inv2;
    let d11 = (nn - c - c + ss) * inv_sq;
    let d01 = (w[k + s + 1] - w[k + s - 1] - w[k - s + 1] + w[k - s - 1]) * inv_sq * T::lit(0.25);
    Stencil {
        dw: [dw0, dw1],
        d2w: [d00, d01, d11],
    }
}

/// Finite-difference `(Dw, D²w)` at every interior node, in the order of
/// `grid.interior()`.
pub fn differentiate<T: Real>(state: &GraphState<T>) -> Vec<Stencil<T>> {
    state
        .grid
        .interior()
        .iter()
        .map(|&k| stencil_at(state, k))
        .collect()
}

/// Gradient function and principal curvatures (ascending) of a graph point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCurvature<T> {
    pub v: T,
    /// `1 + |Dw|²`.
    pub det_g: T,
    pub lam: [T; 2],
}

/// Principal curvatures from `(Dw, D²w)` by the closed-form solution of the
/// `n × n` (n ≤ 2) pencil `h x = λ g x`.
#[inline]
pub fn point_curvature<T: Real>(n: usize, st: &Stencil<T>) -> PointCurvature<T> {
    let det_g = T::one() + st.grad_sq();
    let v = det_g.sqrt();
    if n == 1 {
        let l = st.d2w[0] / (det_g * v);
        return PointCurvature { v, det_g, lam: [l, l] };
    }
    let [p, q] = st.dw;
    let (h11, h12, h22) = (st.d2w[0] / v, st.d2w[1] / v, st.d2w[2] / v);
    // det(h − λg) = det g·λ² − bλ + det h with g = I + Dw⊗Dw.
    let b = h11 * (T::one() + q * q) + h22 * (T::one() + p * p) - T::two() * h12 * p * q;
    let det_h = h11 * h22 - h12 * h12;
    let disc = (b * b - T::lit(4.0) * det_g * det_h).max(T::zero()).sqrt();
    let (lo, hi) = if b > T::zero() {
        let hi = (b + disc) / (T::two() * det_g);
        (det_h / (det_g * hi), hi)
    } else {
        ((b - disc) / (T::two() * det_g), (b + disc) / (T::two() * det_g))
    };
    PointCurvature {
        v,
        det_g,
        lam: [lo.min(hi), hi.max(lo)],
    }
}

/// Full pointwise geometry of the graph at one interior node.
#[derive(Clone, Debug, Serialize)]
pub struct NodeFields<T> {
    pub node: usize,
    pub dw: Vec<T>,
    pub d2w: Matrix<T>,
    pub g: Matrix<T>,
    pub g_inv: Matrix<T>,
    pub h: Matrix<T>,
    pub lam: Lambda<T>,
    pub v: T,
    /// Unit normal `(Dw, −1)/v`.
    pub nu: Vec<T>,
    #[serde(rename = "F")]
    pub f: T,
    /// Normal speed `F^β`.
    pub phi: T,
}

impl<T: Real> NodeFields<T> {
    /// Weingarten map `g⁻¹h`.
    pub fn weingarten(&self) -> Matrix<T> {
        self.g_inv.mul(&self.h)
    }

    /// `b = h⁻¹`, formed on demand.
    pub fn h_inverse(&self) -> Option<Matrix<T>> {
        self.h.spd_inverse()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeomFields<T> {
    pub t: T,
    pub nodes: Vec<NodeFields<T>>,
}

/// Metric, second fundamental form, normal and curvatures at one node
/// using the general factor-and-reduce path. Fails with `NonConvexState`
/// (position and time left unset) below `lambda_floor`.
pub fn node_fields<T: Real>(
    n: usize,
    node: usize,
    st: &Stencil<T>,
    spec: &CurvatureSpec<T>,
    lambda_floor: T,
) -> Result<NodeFields<T>, GeometryError> {
    let dw: Vec<T> = st.dw[..n].to_vec();
    let d2w = st.hessian(n);
    let kron = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
    let g = Matrix::from_fn(n, |i, j| kron(i, j) + dw[i] * dw[j]);
    let det_g = T::one() + dw.iter().map(|&x| x * x).sum::<T>();
    let v = det_g.sqrt();
    let g_inv = Matrix::from_fn(n, |i, j| kron(i, j) - dw[i] * dw[j] / det_g);
    let h = d2w.scale(v.recip());
    let raw = generalized_eigenvalues(&h, &g).ok_or(GeometryError::SingularInput)?;
    if !(raw[0] >= lambda_floor) || raw[0] <= T::zero() {
        return Err(GeometryError::NonConvexState {
            node,
            x: [f64::NAN; 2],
            lambda_min: raw[0].to_f64_lossy(),
            t: f64::NAN,
        });
    }
    let lam = Lambda::new(&raw).map_err(|_| GeometryError::SingularInput)?;
    let mut nu: Vec<T> = dw.iter().map(|&x| x / v).collect();
    nu.push(-v.recip());
    let f = spec.function.value(lam.as_slice());
    Ok(NodeFields {
        node,
        dw,
        d2w,
        g,
        g_inv,
        h,
        lam,
        v,
        nu,
        f,
        phi: f.powf(spec.beta),
    })
}

/// Geometry at every interior node. Fails with `NonConvexState` at the first
/// node (in storage order) whose smallest principal curvature is below
/// `lambda_floor`.
pub fn geom_fields<T: Real>(
    state: &GraphState<T>,
    spec: &CurvatureSpec<T>,
    lambda_floor: T,
) -> Result<GeomFields<T>, GeometryError> {
    let grid = &state.grid;
    if spec.n != grid.n() {
        return Err(GeometryError::InvalidGrid(format!(
            "spec dimension {} does not match grid dimension {}",
            spec.n,
            grid.n()
        )));
    }
    let n = grid.n();
    let nodes: Vec<Result<NodeFields<T>, GeometryError>> = grid
        .interior()
        .par_iter()
        .map(|&k| {
            let st = stencil_at(state, k);
            node_fields(n, k, &st, spec, lambda_floor).map_err(|e| match e {
                GeometryError::NonConvexState { node, lambda_min, .. } => {
                    GeometryError::NonConvexState {
                        node,
                        x: grid.coords(k).map(|c| c.to_f64_lossy()),
                        lambda_min,
                        t: state.t.to_f64_lossy(),
                    }
                }
                other => other,
            })
        })
        .collect();
    let nodes = nodes.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(GeomFields { t: state.t, nodes })
}

/// Weingarten map `hⁱⱼ = w_jk/v · (δⁱᵏ − wⁱwᵏ/v²)` assembled entrywise from
/// the derivatives (independent of `g⁻¹h`).
pub fn weingarten_explicit<T: Real>(dw: &[T], d2w: &Matrix<T>) -> Matrix<T> {
    let n = dw.len();
    let det_g = T::one() + dw.iter().map(|&x| x * x).sum::<T>();
    let v = det_g.sqrt();
    Matrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| {
                let d = if i == k { T::one() } else { T::zero() };
                d2w[(j, k)] / v * (d - dw[i] * dw[k] / det_g)
            })
            .sum()
    })
}

/// `minᵢ (1/λ_min − bⁱⁱ/gⁱⁱ)` with `b = h⁻¹`, which is nonnegative for SPD
/// `g` and `h` because `h ≥ λ_min g` implies `h⁻¹ ≤ g⁻¹/λ_min`.
pub fn euler_bound_check<T: Real>(g: &Matrix<T>, h: &Matrix<T>) -> Result<T, GeometryError> {
    let b = h.spd_inverse().ok_or(GeometryError::SingularInput)?;
    let g_inv = g.spd_inverse().ok_or(GeometryError::SingularInput)?;
    let lam = generalized_eigenvalues(h, g).ok_or(GeometryError::SingularInput)?;
    let lmin = lam[0];
    if !(lmin > T::zero()) {
        return Err(GeometryError::SingularInput);
    }
    Ok((0..g.dim())
        .map(|i| lmin.recip() - b[(i, i)] / g_inv[(i, i)])
        .fold(T::infinity(), T::min))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn square_state(f: impl Fn([f64; 2]) -> f64, nodes: usize) -> GraphState<f64> {
        let g = Arc::new(GraphGrid::square(1.0, nodes).unwrap());
        GraphState::from_fn(g, 0.0, f)
    }

    #[test]
    fn affine_and_quadratic_are_exact() {
        let s = square_state(|x| 0.3 * x[0] - 1.2 * x[1] + 4.0, 9);
        for st in differentiate(&s) {
            assert!((st.dw[0] - 0.3).abs() < 1e-14 && (st.dw[1] + 1.2).abs() < 1e-14);
            assert!(st.d2w.iter().all(|d| d.abs() < 1e-12));
        }
        let s = square_state(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]), 9);
        for st in differentiate(&s) {
            assert!((st.d2w[0] - 1.0).abs() < 1e-12);
            assert!(st.d2w[1].abs() < 1e-12);
            assert!((st.d2w[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn second_derivative_error_quarters_on_refinement() {
        let err = |nodes: usize| {
            let g = Arc::new(GraphGrid::<f64>::interval(0.0, 1.0, nodes).unwrap());
            let s = GraphState::from_fn(g.clone(), 0.0, |x| x[0].sin());
            g.interior()
                .iter()
                .zip(differentiate(&s))
                .map(|(&k, st)| (st.d2w[0] + g.coords(k)[0].sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(33) / err(65);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn closed_form_matches_reduction() {
        let spec = CurvatureSpec::mean(2, 1.0);
        let st = Stencil::<f64> {
            dw: [0.7, -1.3],
            d2w: [2.0, 0.4, 0.9],
        };
        let pc = point_curvature(2, &st);
        let nf = node_fields(2, 0, &st, &spec, 1e-10).unwrap();
        assert!((pc.lam[0] - nf.lam.min()).abs() < 1e-14);
        assert!((pc.lam[1] - nf.lam.max()).abs() < 1e-14);
        assert_eq!(pc.v, nf.v);
    }

    #[test]
    fn umbilic_point_of_paraboloid() {
        let spec = CurvatureSpec::gauss(2, 1.0);
        let s = square_state(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]), 9);
        let f = geom_fields(&s, &spec, 1e-10).unwrap();
        let centre = f.nodes.iter().find(|nf| nf.node == s.grid.index(4, 4)).unwrap();
        assert_eq!(centre.v, 1.0);
        assert!((centre.lam.min() - 1.0).abs() < 1e-12 && (centre.lam.max() - 1.0).abs() < 1e-12);
        assert!((centre.f - 1.0).abs() < 1e-12);
        assert_eq!(centre.nu, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn degenerate_cylinder_is_not_convex() {
        // w = x₁²/2 at (1, 0): Dw = (1, 0), g = diag(2, 1), h = diag(1/√2, 0).
        let st = Stencil {
            dw: [1.0, 0.0],
            d2w: [1.0, 0.0, 0.0],
        };
        let spec = CurvatureSpec::mean(2, 1.0);
        match node_fields(2, 0, &st, &spec, 1e-10) {
            Err(GeometryError::NonConvexState { lambda_min, .. }) => assert_eq!(lambda_min, 0.0),
            other => panic!("expected NonConvexState, got {other:?}"),
        }
        assert_eq!(point_curvature(2, &st).lam[0], 0.0);

        let s = square_state(|x| 0.5 * x[0] * x[0], 9);
        assert!(matches!(
            geom_fields(&s, &spec, 1e-10),
            Err(GeometryError::NonConvexState { .. })
        ));
    }

    #[test]
    fn explicit_weingarten_agrees() {
        let dw = [0.4_f64, -2.1];
        let d2w = Matrix::from_row_major(2, vec![3.0, 0.5, 0.5, 1.5]);
        let st = Stencil {
            dw,
            d2w: [3.0, 0.5, 1.5],
        };
        let nf = node_fields(2, 0, &st, &CurvatureSpec::mean(2, 1.0), 1e-10).unwrap();
        let a = nf.weingarten();
        let b = weingarten_explicit(&dw, &d2w);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[(i, j)] - b[(i, j)]).abs() <= 1e-12 * a.max_abs());
            }
        }
    }

    #[test]
    fn euler_bound_equality_cases() {
        let id = Matrix::<f64>::identity(2);
        let h = Matrix::from_diagonal(&[1.0, 2.0]);
        assert_eq!(euler_bound_check(&id, &h).unwrap(), 0.0);
        assert_eq!(euler_bound_check(&id, &id).unwrap(), 0.0);
        let sing = Matrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(euler_bound_check(&id, &sing), Err(GeometryError::SingularInput));
    }
}
