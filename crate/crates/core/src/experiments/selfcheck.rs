//! Oracle-backed invariant suite run by `carms selfcheck`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sample_dirichlet_probs;
use crate::categorical::{
    all_anchored_orderings, bivariate_pmf_one_ordering, make_ordering, BivariatePmf, ProbVector,
    RatioMatrix, SampleMatrix,
};
use crate::error::Result;
use crate::estimators::{carms, carms_pairwise, loorf, two_sample_loorf, FunctionValues, GradientEstimate};
use crate::oracle::{exact_gradient_probs, pair_law_moments, probs_from_logits, ratios_for, TabulatedObjective};
use crate::par::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(Level::Fast),
            "full" => Some(Level::Full),
            _ => None,
        }
    }

    fn pick(self, fast: usize, full: usize) -> usize {
        match self {
            Level::Fast => fast,
            Level::Full => full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfCheckOptions {
    pub level: Level,
    pub seed: u64,
    /// Negates the `(0, 1)` ratio entries before they reach the estimators.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

pub fn run_selfcheck(options: &SelfCheckOptions) -> Result<SelfCheckReport> {
    let level = options.level;
    let rng = |k: u64| stream_rng(options.seed, k);
    let checks = vec![
        unbiasedness(level.pick(20, 100), options.inject_fault, &mut rng(1))?,
        matrix_form_equivalence(level.pick(200, 1000), options.inject_fault, &mut rng(2))?,
        pair_identity(level.pick(200, 1000), &mut rng(3))?,
        pmf_normalization(level.pick(50, 200), &mut rng(4))?,
        variance_ordering_example()?,
    ];
    Ok(SelfCheckReport { checks })
}

fn corrupt(r: &mut RatioMatrix) {
    let v = r.get(0, 1);
    r.set(0, 1, -v);
    r.set(1, 0, -v);
}

fn random_logits(rng: &mut ChaCha8Rng, c: usize) -> Vec<f64> {
    (0..c).map(|_| StandardNormal.sample(rng)).collect()
}

fn unbiasedness(instances: usize, fault: bool, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let c = rng.random_range(2..=5);
        let dims = rng.random_range(1..=2);
        let n = [2, 3, 5][rng.random_range(0..3)];
        let phi: Vec<Vec<f64>> = (0..dims).map(|_| random_logits(rng, c)).collect();
        let f = TabulatedObjective::from_fn(dims, c, |_| 0.0)?;
        let table: Vec<f64> = f.table().iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = TabulatedObjective::new(dims, c, table)?;
        let probs = probs_from_logits(&phi)?;
        let orderings = all_anchored_orderings(c)?;
        let pmfs = probs
            .iter()
            .map(|p| BivariatePmf::analytic(p, &orderings, n))
            .collect::<Result<Vec<_>>>()?;
        let mut ratios = probs
            .iter()
            .zip(&pmfs)
            .map(|(p, m)| ratios_for(p, m))
            .collect::<Result<Vec<_>>>()?;
        if fault {
            corrupt(&mut ratios[0]);
        }
        let moments = pair_law_moments(&f, &probs, &pmfs, &ratios)?;
        let truth = exact_gradient_probs(&f, &probs)?;
        worst = worst.max(moments.mean.max_abs_diff(&truth));
    }
    Ok(CheckResult {
        name: "unbiasedness-enumeration",
        passed: worst <= 1e-9,
        detail: format!("max |E[CARMS] - grad| = {worst:.3e} over {instances} instances (tol 1e-9)"),
    })
}

fn random_problem(rng: &mut ChaCha8Rng, max_c: usize, max_n: usize) -> Result<(FunctionValues, SampleMatrix, ProbVector)> {
    let c = rng.random_range(2..=max_c);
    let n = rng.random_range(2..=max_n);
    let rows = (0..n).map(|_| rng.random_range(0..c)).collect();
    let f = FunctionValues::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let p = ProbVector::from_logits(&random_logits(rng, c))?;
    Ok((f, SampleMatrix::new(c, rows)?, p))
}

fn random_symmetric_ratios(rng: &mut ChaCha8Rng, c: usize) -> Result<RatioMatrix> {
    let mut values = vec![0.0; c * c];
    for i in 0..c {
        for j in i..c {
            let r = rng.random_range(0.05..3.0);
            values[i * c + j] = r;
            values[j * c + i] = r;
        }
    }
    RatioMatrix::from_values(c, values)
}

fn relative_gap(a: &GradientEstimate, b: &GradientEstimate) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1e-300)
}

fn matrix_form_equivalence(instances: usize, fault: bool, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst_rel: f64 = 0.0;
    let mut worst_ones: f64 = 0.0;
    for _ in 0..instances {
        let (f, z, p) = random_problem(rng, 6, 8)?;
        let mut r = random_symmetric_ratios(rng, p.len())?;
        if fault {
            corrupt(&mut r);
        }
        let matrix = carms(&f, &z, &r, &p)?;
        let pairwise = carms_pairwise(&f, &z, &r)?;
        if pairwise.max_abs() > 1e-12 {
            worst_rel = worst_rel.max(relative_gap(&matrix, &pairwise));
        } else {
            worst_rel = worst_rel.max(matrix.max_abs_diff(&pairwise));
        }
        let ones = carms(&f, &z, &RatioMatrix::ones(p.len()), &p)?;
        worst_ones = worst_ones.max(ones.max_abs_diff(&loorf(&f, &z, &p)?));
    }
    Ok(CheckResult {
        name: "matrix-form-equivalence",
        passed: worst_rel <= 1e-12 && worst_ones <= 1e-13,
        detail: format!(
            "matrix vs pairwise rel {worst_rel:.3e} (tol 1e-12), unit ratios vs LOORF {worst_ones:.3e} (tol 1e-13), {instances} instances"
        ),
    })
}

fn pair_identity(instances: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (f, z, p) = random_problem(rng, 6, 8)?;
        let n = z.n_samples();
        let mut mean = GradientEstimate::zeros(1, p.len());
        let count = (n * (n - 1) / 2) as f64;
        for a in 0..n {
            for b in (a + 1)..n {
                let fv = f.as_slice();
                let term = two_sample_loorf(fv[a], fv[b], z.category(a), z.category(b), p.len());
                mean.add_scaled(&term, 1.0 / count);
            }
        }
        worst = worst.max(loorf(&f, &z, &p)?.max_abs_diff(&mean));
    }
    Ok(CheckResult {
        name: "pair-identity",
        passed: worst <= 1e-12,
        detail: format!("max |LOORF - mean pair LOORF| = {worst:.3e} over {instances} instances (tol 1e-12)"),
    })
}

fn pmf_normalization(instances: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult> {
    let mut worst_mass: f64 = 0.0;
    let mut worst_row: f64 = 0.0;
    let mut min_entry = f64::INFINITY;
    let mut min_anchor = f64::INFINITY;
    for _ in 0..instances {
        let c = rng.random_range(2..=6);
        let n = rng.random_range(2..=10);
        let raw = sample_dirichlet_probs(c, 1.0, rng)?;
        // keep every entry >= 1e-3
        let p = ProbVector::new(raw.as_slice().iter().map(|x| 0.99 * x + 0.01 / c as f64).collect())?;
        let pmf = BivariatePmf::analytic(&p, &all_anchored_orderings(c)?, n)?;
        worst_mass = worst_mass.max((pmf.total() - 1.0).abs());
        for (s, &pi) in pmf.row_sums().iter().zip(p.as_slice()) {
            worst_row = worst_row.max((s - pi).abs());
        }
        min_entry = pmf.as_slice().iter().cloned().fold(min_entry, f64::min);
        for i in 0..c {
            for j in 0..c {
                if i != j {
                    let o = make_ordering(i, j, c)?;
                    min_anchor = min_anchor.min(bivariate_pmf_one_ordering(&p, &o, i, j, n)?);
                    min_anchor = min_anchor.min(pmf.get(i, j));
                }
            }
        }
    }
    Ok(CheckResult {
        name: "pmf-normalization",
        passed: worst_mass <= 1e-10 && worst_row <= 1e-10 && min_entry >= 0.0 && min_anchor > 0.0,
        detail: format!(
            "mass err {worst_mass:.3e}, row err {worst_row:.3e}, min entry {min_entry:.3e}, min anchored pair {min_anchor:.3e}, {instances} instances"
        ),
    })
}

/// Marginals `(0.6, 0.3, 0.1)` and an antithetic pair law whose off-diagonal
/// entries dominate the independent ones.
pub fn variance_example_pmf() -> Result<(ProbVector, BivariatePmf)> {
    let p = ProbVector::new(vec![0.6, 0.3, 0.1])?;
    let pmf = BivariatePmf::from_rows(&[
        vec![0.30, 0.24, 0.06],
        vec![0.24, 0.02, 0.04],
        vec![0.06, 0.04, 0.00],
    ])?;
    Ok((p, pmf))
}

fn variance_ordering_example() -> Result<CheckResult> {
    let (p, anti) = variance_example_pmf()?;
    let f = TabulatedObjective::new(1, 3, vec![1.0, 2.0, 3.0])?;
    let probs = vec![p.clone()];
    let truth = exact_gradient_probs(&f, &probs)?;
    let carts = pair_law_moments(&f, &probs, std::slice::from_ref(&anti), &[ratios_for(&p, &anti)?])?;
    let indep = BivariatePmf::independent(&p);
    let loorf2 = pair_law_moments(&f, &probs, &[indep], &[RatioMatrix::ones(3)])?;
    let bias = carts.mean.max_abs_diff(&truth).max(loorf2.mean.max_abs_diff(&truth));
    let vc = carts.variance.as_slice();
    let vl = loorf2.variance.as_slice();
    let dominated = vc.iter().zip(vl).all(|(a, b)| *a <= *b + 1e-15);
    let strict = vc.iter().zip(vl).any(|(a, b)| *a < *b - 1e-12);
    Ok(CheckResult {
        name: "variance-ordering-example",
        passed: bias <= 1e-10 && dominated && strict,
        detail: format!(
            "var CARTS {:?} vs 2-LOORF {:?}, bias {bias:.3e}",
            vc.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>(),
            vl.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let options = SelfCheckOptions { level: Level::Fast, seed: 1, inject_fault: false };
        let report = run_selfcheck(&options).unwrap();
        assert!(report.all_passed(), "{}", report.render());
    }

    #[test]
    fn fault_breaks_unbiasedness_only() {
        let options = SelfCheckOptions { level: Level::Fast, seed: 1, inject_fault: true };
        let report = run_selfcheck(&options).unwrap();
        assert_eq!(report.failed(), vec!["unbiasedness-enumeration"], "{}", report.render());
    }
}
