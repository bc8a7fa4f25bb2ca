use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use curvflow_core::geometry::{
    euler_bound_check, point_curvature, rotational_curvatures, stencil, weingarten_explicit, GraphGrid,
    GraphState, SphereProfile, Stencil,
};
use curvflow_core::linalg::Matrix;

fn spd(n: usize) -> impl Strategy<Value = Matrix<f64>> {
    (prop::collection::vec(-1.0f64..1.0, n * n), 0.05f64..2.0).prop_map(move |(a, eps)| {
        let a = Matrix::from_row_major(n, a);
        let mut m = a.transpose().mul(&a);
        for i in 0..n {
            m[(i, i)] += eps;
        }
        m
    })
}

/// Eigenvalues of a real 2×2 matrix with real spectrum, ascending.
fn eig2_general(m: &Matrix<f64>) -> [f64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let d = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 - d, tr / 2.0 + d]
}

fn convex_stencil() -> impl Strategy<Value = Stencil<f64>> {
    (-3.0f64..3.0, -3.0f64..3.0, spd(2)).prop_map(|(p, q, h)| Stencil {
        dw: [p, q],
        d2w: [h[(0, 0)], h[(0, 1)], h[(1, 1)]],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn pencil_roots_match_weingarten_spectrum(st in convex_stencil()) {
        let pc = point_curvature(2, &st);
        let w = weingarten_explicit(&st.dw, &st.hessian(2));
        let ev = eig2_general(&w);
        let scale = ev[1].abs().max(1e-300);
        prop_assert!((pc.lam[0] - ev[0]).abs() <= 1e-10 * scale);
        prop_assert!((pc.lam[1] - ev[1]).abs() <= 1e-10 * scale);
        prop_assert!(pc.lam[0] > 0.0);
    }

    #[test]
    fn curvatures_are_rotation_invariant(st in convex_stencil(), angle in 0.0f64..std::f64::consts::TAU) {
        let (c, s) = (angle.cos(), angle.sin());
        let r = Matrix::from_row_major(2, vec![c, -s, s, c]);
        let hr = r.mul(&st.hessian(2)).mul(&r.transpose());
        let rotated = Stencil {
            dw: [c * st.dw[0] - s * st.dw[1], s * st.dw[0] + c * st.dw[1]],
            d2w: [hr[(0, 0)], hr[(0, 1)], hr[(1, 1)]],
        };
        let a = point_curvature(2, &st);
        let b = point_curvature(2, &rotated);
        prop_assert!((a.lam[0] - b.lam[0]).abs() <= 1e-10 * a.lam[1]);
        prop_assert!((a.lam[1] - b.lam[1]).abs() <= 1e-10 * a.lam[1]);
        prop_assert!((a.v - b.v).abs() <= 1e-12 * a.v);
    }

    #[test]
    fn euler_margin_is_nonnegative_n2(g in spd(2), h in spd(2)) {
        prop_assert!(euler_bound_check(&g, &h).unwrap() >= -1e-12);
    }

    #[test]
    fn euler_margin_is_nonnegative_n3(g in spd(3), h in spd(3)) {
        prop_assert!(euler_bound_check(&g, &h).unwrap() >= -1e-12);
    }

    #[test]
    fn quadratics_are_differentiated_exactly(a in 0.1f64..3.0, b in -1.0f64..1.0, c in 0.1f64..3.0, px in -1.0f64..1.0) {
        let grid = Arc::new(GraphGrid::square(1.0, 9).unwrap());
        let s = GraphState::from_fn(grid.clone(), 0.0, |x| 0.5 * a * x[0] * x[0] + b * x[0] * x[1] + 0.5 * c * x[1] * x[1] + px * x[0]);
        for &k in grid.interior() {
            let st = stencil(&grid, &s.w, k);
            let x = grid.coords(k);
            prop_assert!((st.dw[0] - (a * x[0] + b * x[1] + px)).abs() < 1e-12);
            prop_assert!((st.dw[1] - (b * x[0] + c * x[1])).abs() < 1e-12);
            prop_assert!((st.d2w[0] - a).abs() < 1e-10 && (st.d2w[1] - b).abs() < 1e-10 && (st.d2w[2] - c).abs() < 1e-10);
        }
    }
}

#[test]
fn diagonal_pair_has_zero_euler_margin() {
    let g = Matrix::identity(3);
    let h = Matrix::from_diagonal(&[0.5, 2.0, 3.0]);
    let m: f64 = euler_bound_check(&g, &h).unwrap();
    assert!(m.abs() < 1e-15);
}

#[test]
fn sphere_cap_is_umbilic() {
    for n in [1usize, 2, 3] {
        let p = SphereProfile {
            r0: 2.0,
            center_height: 2.0,
            n,
        };
        for r in [0.1, 0.7, 1.5, 1.99] {
            let c = rotational_curvatures(&p, r).unwrap();
            for &l in c.lam.as_slice() {
                assert_relative_eq!(l, 0.5, max_relative = 1e-12);
            }
            assert_relative_eq!(c.k, 0.5f64.powi(n as i32), max_relative = 1e-12);
            assert_relative_eq!(c.h, 0.5 * n as f64, max_relative = 1e-12);
        }
    }
}

#[test]
fn sampled_sphere_converges_to_umbilic() {
    // Central differences on the cap: error in λ is O(Δx²).
    let mut errs = Vec::new();
    for nodes in [17usize, 33, 65] {
        let grid = Arc::new(GraphGrid::disk(0.5, nodes).unwrap());
        let s = GraphState::from_fn(grid.clone(), 0.0, |x: [f64; 2]| 1.0 - (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt());
        let err = grid
            .interior()
            .iter()
            .map(|&k| {
                let pc = point_curvature::<f64>(2, &stencil(&grid, &s.w, k));
                (pc.lam[0] - 1.0).abs().max((pc.lam[1] - 1.0).abs())
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
}
