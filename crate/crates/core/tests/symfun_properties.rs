use approx::assert_relative_eq;
use proptest::prelude::*;

use curvflow_core::linalg::{symmetric_eigen, Matrix};
use curvflow_core::symfun::{
    ddf_direction, derivatives, dual_derivatives, eval_dual, eval_f, parse_function, verify_lemma2,
};
use curvflow_core::{CurvatureFn64, CurvatureSpec64, Lambda64};

fn builtin(n: usize) -> Vec<CurvatureSpec64> {
    let mut fns = vec![
        CurvatureFn64::PowerMean { r: 0.5 },
        CurvatureFn64::PowerMean { r: 1.0 },
        CurvatureFn64::PowerMean { r: 2.0 },
        CurvatureFn64::GaussPower,
    ];
    fns.extend((1..=n).map(|k| CurvatureFn64::ElemSymRoot { k }));
    for s in [0.25, 0.5, 0.75] {
        fns.push(CurvatureFn64::WeightedProduct(vec![
            (CurvatureFn64::GaussPower, s),
            (CurvatureFn64::PowerMean { r: 1.0 }, 1.0 - s),
        ]));
    }
    fns.into_iter().map(|f| CurvatureSpec64::new(f, n, 1.0).unwrap()).collect()
}

fn f_of(spec: &CurvatureSpec64, v: &[f64]) -> f64 {
    eval_f(spec, &Lambda64::new(v).unwrap()).unwrap()
}

/// `F(A) = f(eig(A))` for symmetric `A`.
fn spectral(spec: &CurvatureSpec64, a: &Matrix<f64>) -> f64 {
    f_of(spec, &symmetric_eigen(a).values)
}

/// Fourth-order central second difference of `s ↦ F(diag(λ) + sB)`.
fn spectral_second_fd(spec: &CurvatureSpec64, lam: &[f64], b: &Matrix<f64>, h: f64) -> f64 {
    let n = lam.len();
    let at = |s: f64| spectral(spec, &Matrix::from_fn(n, |i, j| if i == j { lam[i] } else { 0.0 } + s * b[(i, j)]));
    (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
}

fn lambda_vec() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=5).prop_flat_map(|n| prop::collection::vec(-2.0f64..2.0, n).prop_map(|e| e.iter().map(|x| 10f64.powf(*x)).collect()))
}

fn sym_direction(n: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |raw| Matrix::from_fn(n, |i, j| 0.5 * (raw[i * n + j] + raw[j * n + i])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_is_permutation_invariant(lam in lambda_vec(), rot in 0usize..5) {
        for spec in builtin(lam.len()) {
            let mut p = lam.clone();
            p.rotate_left(rot % lam.len());
            p.reverse();
            assert_relative_eq!(f_of(&spec, &lam), f_of(&spec, &p), max_relative = 1e-13);
        }
    }

    #[test]
    fn value_is_one_homogeneous(lam in lambda_vec(), k in 0.01f64..100.0) {
        for spec in builtin(lam.len()) {
            let scaled: Vec<f64> = lam.iter().map(|x| k * x).collect();
            assert_relative_eq!(f_of(&spec, &scaled), k * f_of(&spec, &lam), max_relative = 1e-12);
        }
    }

    #[test]
    fn gradient_matches_central_differences(lam in lambda_vec()) {
        for spec in builtin(lam.len()) {
            let d = derivatives(&spec, &Lambda64::new(&lam).unwrap()).unwrap();
            let mut sorted = lam.clone();
            sorted.sort_by(f64::total_cmp);
            for i in 0..sorted.len() {
                let h = 1e-6 * sorted[i];
                let mut up = sorted.clone();
                let mut dn = sorted.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (f_of(&spec, &up) - f_of(&spec, &dn)) / (2.0 * h);
                let scale = d.value / sorted[i];
                prop_assert!((fd - d.grad[i]).abs() <= 1e-6 * scale.max(d.grad[i]), "{:?} i={} fd={} an={}", spec.function, i, fd, d.grad[i]);
            }
            // Euler's relation for degree-one homogeneity.
            prop_assert!(d.euler_defect(&Lambda64::new(&lam).unwrap()).abs() <= 1e-12 * d.value);
        }
    }

    #[test]
    fn dual_is_reciprocal_of_value_at_reciprocals(lam in lambda_vec()) {
        for spec in builtin(lam.len()) {
            let l = Lambda64::new(&lam).unwrap();
            let dual = eval_dual(&spec, &l.reciprocal()).unwrap();
            assert_relative_eq!(dual * eval_f(&spec, &l).unwrap(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn dual_gradient_matches_central_differences(lam in lambda_vec()) {
        for spec in builtin(lam.len()) {
            let tau = Lambda64::new(&lam).unwrap();
            let d = dual_derivatives(&spec, &tau).unwrap();
            let t = tau.as_slice().to_vec();
            for i in 0..t.len() {
                let h = 1e-6 * t[i];
                let (mut up, mut dn) = (t.clone(), t.clone());
                up[i] += h;
                dn[i] -= h;
                let e = |v: &[f64]| eval_dual(&spec, &Lambda64::new(v).unwrap()).unwrap();
                let fd = (e(&up) - e(&dn)) / (2.0 * h);
                prop_assert!((fd - d.grad[i]).abs() <= 1e-6 * (d.value / t[i]).max(d.grad[i]));
            }
        }
    }

    #[test]
    fn lemma_residuals_are_nonnegative(lam in lambda_vec()) {
        for spec in builtin(lam.len()) {
            let r = verify_lemma2(&spec, &Lambda64::new(&lam).unwrap()).unwrap();
            prop_assert!(r.sum_relative >= -1e-10, "{:?}: {}", spec.function, r.sum_relative);
            prop_assert!(r.pair_relative.unwrap() >= -1e-10, "{:?}: {:?}", spec.function, r.pair_relative);
        }
    }

    #[test]
    fn second_derivative_matches_spectral_differences(
        (lam, b) in (2usize..=4).prop_flat_map(|n| (prop::collection::vec(-1.0f64..1.0, n), sym_direction(n)))
    ) {
        let lam: Vec<f64> = {
            let mut v: Vec<f64> = lam.iter().map(|x| 10f64.powf(*x)).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for spec in builtin(lam.len()) {
            let an = ddf_direction(&spec, &Lambda64::new(&lam).unwrap(), &b).unwrap();
            let fd = spectral_second_fd(&spec, &lam, &b, 1e-3 * lam[0]);
            let f = f_of(&spec, &lam);
            let scale = an.abs().max(f * b.max_abs().powi(2) / (lam[0] * lam[0]));
            prop_assert!((an - fd).abs() <= 1e-6 * scale, "{:?}: an={} fd={}", spec.function, an, fd);
        }
    }
}

#[test]
fn linear_function_has_no_second_derivative() {
    let spec = CurvatureSpec64::mean(3, 1.0);
    let lam = Lambda64::new(&[0.3, 1.0, 7.0]).unwrap();
    let b = Matrix::from_fn(3, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    assert!(ddf_direction(&spec, &lam, &b).unwrap().abs() < 1e-15);
}

#[test]
fn repeated_eigenvalues_use_the_limit() {
    // At an umbilic point the quotient is replaced by f̈ⁱⁱ − f̈ⁱᵏ; the result
    // must agree with the spectral second difference.
    let spec = CurvatureSpec64::gauss(3, 1.0);
    let lam = [2.0, 2.0, 2.0];
    let b = Matrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
    let an = ddf_direction(&spec, &Lambda64::new(&lam).unwrap(), &b).unwrap();
    let fd = spectral_second_fd(&spec, &lam, &b, 1e-3);
    assert_relative_eq!(an, fd, max_relative = 1e-6);
}

#[test]
fn parsed_product_matches_hand_evaluation() {
    let f = parse_function::<f64>("product(gauss^0.5, mean^0.5)").unwrap();
    let spec = CurvatureSpec64::new(f, 2, 1.0).unwrap();
    let k: f64 = 1.0 * 4.0;
    let h: f64 = (1.0 + 4.0) / 2.0;
    assert_relative_eq!(f_of(&spec, &[1.0, 4.0]), k.sqrt().sqrt() * h.sqrt(), max_relative = 1e-14);
}
