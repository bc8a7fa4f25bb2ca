use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    dual_hessian_scaled, eval_dual, eval_f, format_function, verify_lemma2, CurvatureSpec, Lambda,
};
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;

const SAMPLE_LO: f64 = 1e-3;
const SAMPLE_HI: f64 = 1e3;
const HOMOGENEITY_FACTORS: [f64; 3] = [0.5, 2.0, 10.0];
const HOMOGENEITY_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-12;
const CONCAVITY_TOL: f64 = 1e-8;
const LEMMA_TOL: f64 = -1e-10;
/// Path `τ₁ = 10^{-k}` for `k` in this range.
const DECAY_EXPONENTS: std::ops::RangeInclusive<i32> = 2..=24;
const DECAY_TARGET: f64 = 1e-3;

/// Outcome of one sampled structural check.
#[derive(Clone, Debug, Serialize)]
pub struct CertEntry {
    pub condition: String,
    pub description: String,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Set when the property is only established by sampling here.
    pub sampled_only: bool,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertReport {
    pub function: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub entries: Vec<CertEntry>,
}

impl CertReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, condition: &str) -> Option<&CertEntry> {
        self.entries.iter().find(|e| e.condition == condition)
    }

    /// Fixed-width table, one row per condition.
    pub fn table(&self) -> String {
        let mut out = format!(
            "function {} (n = {}, {} samples, seed {})\n{:<8} {:<6} {:>14} {:>12}  {}\n",
            self.function, self.n, self.samples, self.seed, "cond", "pass", "worst", "threshold", "description"
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{:<8} {:<6} {:>14.6e} {:>12.3e}  {}{}\n",
                e.condition,
                if e.pass { "ok" } else { "FAIL" },
                e.worst,
                e.threshold,
                e.description,
                if e.sampled_only { " [sampled only]" } else { "" }
            ));
        }
        out
    }
}

fn log_uniform<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let (a, b) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    (0..n).map(|_| rng.gen_range(a..b).exp()).collect()
}

struct Tracker {
    worst: f64,
    failures: usize,
}

impl Tracker {
    fn max() -> Self {
        Self { worst: f64::NEG_INFINITY, failures: 0 }
    }
    fn min() -> Self {
        Self { worst: f64::INFINITY, failures: 0 }
    }
}

/// Samples the positive cone (log-uniform in `[1e-3, 1e3]ⁿ`) and checks
/// monotonicity, homogeneity, normalization, concavity of the dual, decay of
/// the dual at the boundary of the cone, and the two inverse-concavity
/// inequalities. Deterministic in `seed`.
pub fn check_condition1<T: Real>(spec: &CurvatureSpec<T>, sample_count: usize, seed: u64) -> CertReport {
    let n = spec.n;
    let f = &spec.function;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_count = sample_count.max(1);

    let mut monotone = Tracker::min();
    let mut homogeneity = Tracker::max();
    let mut concavity = Tracker::max();
    let mut decay = Tracker::max();
    let mut lemma_sum = Tracker::min();
    let mut lemma_pair = Tracker::min();

    let mut grad = vec![T::zero(); n];
    for _ in 0..sample_count {
        let raw = log_uniform(&mut rng, n);
        let lam_vals: Vec<T> = raw.iter().map(|&x| T::lit(x)).collect();
        let Ok(lam) = Lambda::new(&lam_vals) else {
            continue;
        };

        let fv = f.value_grad(lam.as_slice(), &mut grad);
        let gmin = grad.iter().fold(f64::INFINITY, |m, g| m.min(g.to_f64_lossy()));
        monotone.worst = monotone.worst.min(gmin);
        if !(gmin > 0.0) {
            monotone.failures += 1;
        }

        for k in HOMOGENEITY_FACTORS {
            let scaled = lam.scaled(T::lit(k)).expect("positive scaling");
            let fk = eval_f(spec, &scaled).expect("dimension checked").to_f64_lossy();
            let rel = ((fk - k * fv.to_f64_lossy()) / (k * fv.to_f64_lossy())).abs();
            homogeneity.worst = homogeneity.worst.max(rel);
            if rel > HOMOGENEITY_TOL {
                homogeneity.failures += 1;
            }
        }

        // The sampled point doubles as the dual argument τ.
        let scaled_hess = dual_hessian_scaled(spec, &lam).expect("dimension checked");
        let top = *symmetric_eigen(&scaled_hess).values.last().expect("n >= 1");
        concavity.worst = concavity.worst.max(top.to_f64_lossy());
        if top.to_f64_lossy() > CONCAVITY_TOL {
            concavity.failures += 1;
        }

        // Path toward the boundary of the cone: normalize max τ = 1, then
        // send the first coordinate to zero.
        let tmax = lam.max();
        let base: Vec<T> = lam.as_slice().iter().map(|&x| x / tmax).collect();
        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        let mut ok = true;
        for k in DECAY_EXPONENTS {
            let mut tau = base.clone();
            tau[0] = T::lit(10f64.powi(-k));
            let val = eval_dual(spec, &Lambda::new(&tau).expect("positive")).expect("dim");
            let val = val.to_f64_lossy();
            if !(val < prev) {
                ok = false;
            }
            prev = val;
            last = val;
        }
        if last >= DECAY_TARGET {
            ok = false;
        }
        decay.worst = decay.worst.max(last);
        if !ok {
            decay.failures += 1;
        }

        let lemma = verify_lemma2(spec, &lam).expect("dimension checked");
        let s = lemma.sum_relative.to_f64_lossy();
        lemma_sum.worst = lemma_sum.worst.min(s);
        if s < LEMMA_TOL {
            lemma_sum.failures += 1;
        }
        if let Some(p) = lemma.pair_relative {
            let p = p.to_f64_lossy();
            lemma_pair.worst = lemma_pair.worst.min(p);
            if p < LEMMA_TOL {
                lemma_pair.failures += 1;
            }
        }
    }

    let ones = Lambda::umbilic(n, T::one()).expect("positive");
    let norm_err = (eval_f(spec, &ones).expect("dim").to_f64_lossy() - 1.0).abs();
    let partial = f.has_partial_elem_sym(n);

    let entry = |condition: &str, description: &str, t: Tracker, threshold: f64, sampled_only: bool| CertEntry {
        condition: condition.to_string(),
        description: description.to_string(),
        worst: t.worst,
        threshold,
        pass: t.failures == 0,
        sampled_only,
        failures: t.failures,
    };

    let mut entries = vec![
        entry("ii", "min gradient entry (strict monotonicity)", monotone, 0.0, false),
        entry(
            "iii",
            "max relative homogeneity defect, k in {0.5, 2, 10}",
            homogeneity,
            HOMOGENEITY_TOL,
            false,
        ),
        CertEntry {
            condition: "iv".into(),
            description: "|f(1,...,1) - 1|".into(),
            worst: norm_err,
            threshold: NORMALIZATION_TOL,
            pass: norm_err <= NORMALIZATION_TOL,
            sampled_only: false,
            failures: usize::from(norm_err > NORMALIZATION_TOL),
        },
        entry(
            "v",
            "max eigenvalue of scaled dual Hessian (concavity of f_*)",
            concavity,
            CONCAVITY_TOL,
            true,
        ),
        entry(
            "vi",
            "f_* at tau_1 = 1e-24 (max tau = 1), strictly decreasing along the path",
            decay,
            DECAY_TARGET,
            partial,
        ),
        entry("lemma-i", "min (sum f^i lam_i^2 - f^2) / f^2", lemma_sum, LEMMA_TOL, false),
    ];
    if n > 1 {
        entries.push(entry(
            "lemma-ii",
            "min scaled pair inequality over k != l",
            lemma_pair,
            LEMMA_TOL,
            false,
        ));
    }

    CertReport {
        function: format_function(f),
        n,
        samples: sample_count,
        seed,
        entries,
    }
}
