//! Ground truth by enumeration.
//!
//! For a tabulated objective over `D` categorical variables with `C`
//! categories each, the exact gradient sums over all `C^D` assignments. The
//! exact mean and variance of a CARTS/CARMS pair term sum over all
//! `C^D x C^D` joint pairs, weighted by the product of per-dimension pair
//! laws. Paths whose ratios come from the draw itself (Gumbel) only get
//! Monte Carlo moments, see [`mc_estimator_moments`].

use crate::categorical::{BivariatePmf, ProbVector, RatioMatrix};
use crate::error::{invalid, Error, Result};
use crate::estimators::GradientEstimate;
use crate::method::{sampled_estimate, EstimatorKind, SamplerConfig};
use crate::par::{map_indexed, stream_rng};

/// Largest table or joint-pair enumeration the oracle accepts.
pub const MAX_ENUMERATION: usize = 1_000_000;
/// Allowed gap between a supplied pmf's marginals and `softmax(phi)`.
pub const MARGINAL_TOL: f64 = 1e-8;

/// `f` on every joint assignment `(a_1, ..., a_D)`, dimension 0 most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedObjective {
    dims: usize,
    categories: usize,
    table: Vec<f64>,
}

impl TabulatedObjective {
    pub fn new(dims: usize, categories: usize, table: Vec<f64>) -> Result<Self> {
        let size = table_size(dims, categories)?;
        if table.len() != size {
            return invalid(format!("table has {} entries, expected {size}", table.len()));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return invalid("table entries must be finite");
        }
        Ok(Self { dims, categories, table })
    }

    pub fn from_fn<F: Fn(&[usize]) -> f64>(dims: usize, categories: usize, f: F) -> Result<Self> {
        let size = table_size(dims, categories)?;
        let mut table = Vec::with_capacity(size);
        for_each_assignment(dims, categories, |a| table.push(f(a)));
        Self::new(dims, categories, table)
    }

    /// `f(z) = sum_d sum_c (d+1)(c+1) z_dc`, the toy objective with one-based
    /// weights.
    pub fn toy(dims: usize, categories: usize) -> Result<Self> {
        Self::from_fn(dims, categories, toy_value)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn index(&self, assignment: &[usize]) -> usize {
        assignment.iter().fold(0, |acc, &a| acc * self.categories + a)
    }

    pub fn value(&self, assignment: &[usize]) -> f64 {
        self.table[self.index(assignment)]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `E[f(z)]` under independent `z_d ~ Cat(p_d)`.
    pub fn expectation(&self, probs: &[ProbVector]) -> Result<f64> {
        self.check_probs(probs)?;
        let mut total = 0.0;
        let mut idx = 0;
        for_each_assignment(self.dims, self.categories, |a| {
            total += joint_prob(probs, a) * self.table[idx];
            idx += 1;
        });
        Ok(total)
    }

    fn check_probs(&self, probs: &[ProbVector]) -> Result<()> {
        if probs.len() != self.dims || probs.iter().any(|p| p.len() != self.categories) {
            return invalid(format!(
                "expected {} probability vectors over {} categories",
                self.dims, self.categories
            ));
        }
        Ok(())
    }
}

/// Toy objective value for a zero-based assignment.
pub fn toy_value(assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(d, &c)| ((d + 1) * (c + 1)) as f64)
        .sum()
}

fn table_size(dims: usize, categories: usize) -> Result<usize> {
    if dims == 0 || categories < 2 {
        return invalid(format!("need D >= 1 and C >= 2, got D = {dims}, C = {categories}"));
    }
    let mut size: usize = 1;
    for _ in 0..dims {
        size = size.saturating_mul(categories);
        if size > MAX_ENUMERATION {
            return invalid(format!("C^D exceeds the enumeration bound {MAX_ENUMERATION}"));
        }
    }
    Ok(size)
}

fn for_each_assignment<F: FnMut(&[usize])>(dims: usize, categories: usize, mut f: F) {
    let mut a = vec![0usize; dims];
    loop {
        f(&a);
        let mut k = dims;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            a[k] += 1;
            if a[k] < categories {
                break;
            }
            a[k] = 0;
        }
    }
}

fn joint_prob(probs: &[ProbVector], a: &[usize]) -> f64 {
    probs.iter().zip(a).map(|(p, &c)| p.get(c)).product()
}

/// Softmax of each logit row.
pub fn probs_from_logits(phi: &[Vec<f64>]) -> Result<Vec<ProbVector>> {
    phi.iter().map(|row| ProbVector::from_logits(row)).collect()
}

/// `grad_phi E[f(z)]`, using `d p_c / d phi_k = p_c (1{c=k} - p_k)`.
pub fn exact_gradient(f: &TabulatedObjective, phi: &[Vec<f64>]) -> Result<GradientEstimate> {
    let probs = probs_from_logits(phi)?;
    exact_gradient_probs(f, &probs)
}

pub fn exact_gradient_probs(f: &TabulatedObjective, probs: &[ProbVector]) -> Result<GradientEstimate> {
    f.check_probs(probs)?;
    let c = f.categories();
    let mut grad = GradientEstimate::zeros(f.dims(), c);
    let mut idx = 0;
    for_each_assignment(f.dims(), c, |a| {
        let w = joint_prob(probs, a) * f.table[idx];
        idx += 1;
        for (d, p) in probs.iter().enumerate() {
            let row = grad.row_mut(d);
            for (r, &pc) in row.iter_mut().zip(p.as_slice()) {
                *r -= w * pc;
            }
            row[a[d]] += w;
        }
    });
    Ok(grad)
}

/// Exact per-coordinate mean and variance of an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mean: GradientEstimate,
    pub variance: GradientEstimate,
}

impl ExactMoments {
    pub fn summed_variance(&self) -> f64 {
        self.variance.as_slice().iter().sum()
    }
}

/// Exact mean of CARMS (equal to that of its pair term) and the exact
/// per-coordinate variance of the CARTS pair term, with ratios derived from
/// `pmfs`. Each `pmfs[d]` must have row and column sums matching
/// `softmax(phi[d])`.
pub fn exact_carms_expectation(
    f: &TabulatedObjective,
    phi: &[Vec<f64>],
    pmfs: &[BivariatePmf],
) -> Result<ExactMoments> {
    let probs = probs_from_logits(phi)?;
    f.check_probs(&probs)?;
    if pmfs.len() != probs.len() {
        return invalid(format!("{} pmfs for {} dimensions", pmfs.len(), probs.len()));
    }
    for (d, (p, pmf)) in probs.iter().zip(pmfs).enumerate() {
        check_marginals(d, p, pmf)?;
    }
    let ratios = probs
        .iter()
        .zip(pmfs)
        .map(|(p, pmf)| ratios_for(p, pmf))
        .collect::<Result<Vec<_>>>()?;
    pair_law_moments(f, &probs, pmfs, &ratios)
}

fn check_marginals(d: usize, p: &ProbVector, pmf: &BivariatePmf) -> Result<()> {
    let c = p.len();
    if pmf.n_categories() != c {
        return invalid(format!("pmf {d} is over {} categories, expected {c}", pmf.n_categories()));
    }
    for i in 0..c {
        let row: f64 = (0..c).map(|j| pmf.get(i, j)).sum();
        let col: f64 = (0..c).map(|j| pmf.get(j, i)).sum();
        let gap = (row - p.get(i)).abs().max((col - p.get(i)).abs());
        if gap > MARGINAL_TOL {
            return Err(Error::InconsistentDistribution(format!(
                "dimension {d}, category {i}: pmf marginal differs from softmax(phi) by {gap:e}"
            )));
        }
    }
    Ok(())
}

/// `p_i p_j / P(i, j)` where the joint is positive; zero-probability pairs
/// never occur and get the inert value 1.
pub fn ratios_for(p: &ProbVector, pmf: &BivariatePmf) -> Result<RatioMatrix> {
    let c = p.len();
    let values = (0..c * c)
        .map(|k| {
            let (i, j) = (k / c, k % c);
            let joint = pmf.get(i, j);
            if joint > 0.0 {
                p.get(i) * p.get(j) / joint
            } else {
                1.0
            }
        })
        .collect();
    RatioMatrix::from_values(c, values)
}

/// Exact moments of the pair term
/// `row_d = (f(a) - f(b)) (e_{a_d} - e_{b_d}) R^d[a_d, b_d] / 2`
/// with `(a_d, b_d) ~ pmfs[d]` independently across dimensions.
///
/// No marginal check is made: this is the raw enumeration, also used to
/// evaluate deliberately inconsistent ratio matrices.
pub fn pair_law_moments(
    f: &TabulatedObjective,
    probs: &[ProbVector],
    pmfs: &[BivariatePmf],
    ratios: &[RatioMatrix],
) -> Result<ExactMoments> {
    f.check_probs(probs)?;
    let dims = f.dims();
    let c = f.categories();
    if pmfs.len() != dims || ratios.len() != dims {
        return invalid("need one pmf and one ratio matrix per dimension");
    }
    if pmfs.iter().any(|m| m.n_categories() != c) || ratios.iter().any(|r| r.n_categories() != c) {
        return invalid("pmf or ratio matrix has the wrong number of categories");
    }
    let size = f.table.len();
    if size.saturating_mul(size) > MAX_ENUMERATION {
        return invalid(format!("C^(2D) exceeds the enumeration bound {MAX_ENUMERATION}"));
    }

    let mut assignments = Vec::with_capacity(size);
    for_each_assignment(dims, c, |a| assignments.push(a.to_vec()));

    let visit = |sink: &mut dyn FnMut(f64, &[f64])| {
        let mut term = vec![0.0; dims * c];
        for (ia, a) in assignments.iter().enumerate() {
            for (ib, b) in assignments.iter().enumerate() {
                let weight: f64 = (0..dims).map(|d| pmfs[d].get(a[d], b[d])).product();
                if weight == 0.0 {
                    continue;
                }
                let half = 0.5 * (f.table[ia] - f.table[ib]);
                term.iter_mut().for_each(|t| *t = 0.0);
                for d in 0..dims {
                    if a[d] != b[d] {
                        let w = half * ratios[d].get(a[d], b[d]);
                        term[d * c + a[d]] += w;
                        term[d * c + b[d]] -= w;
                    }
                }
                sink(weight, &term);
            }
        }
    };

    let mut mean = vec![0.0; dims * c];
    visit(&mut |w, t| {
        for (m, x) in mean.iter_mut().zip(t) {
            *m += w * x;
        }
    });
    let mut var = vec![0.0; dims * c];
    visit(&mut |w, t| {
        for ((v, x), m) in var.iter_mut().zip(t).zip(&mean) {
            *v += w * (x - m) * (x - m);
        }
    });
    // pairs of zero weight were skipped; their centred contribution is zero
    let split = |v: Vec<f64>| GradientEstimate::from_rows(v.chunks(c).map(<[f64]>::to_vec).collect());
    Ok(ExactMoments { mean: split(mean), variance: split(var) })
}

/// Monte Carlo moments of an estimator over independent trials.
#[derive(Debug, Clone, PartialEq)]
pub struct McMoments {
    pub mean: GradientEstimate,
    pub variance: GradientEstimate,
    /// Standard error of each mean coordinate.
    pub std_error: GradientEstimate,
    /// Fraction of trials in which a ratio was clipped.
    pub clip_rate: f64,
    pub trials: usize,
}

/// Minimum number of trials accepted by [`mc_estimator_moments`].
pub const MIN_MC_TRIALS: usize = 1000;

/// Runs `trials` independent estimates, trial `t` drawing from stream `t` of
/// `seed`, and reduces them in trial order.
pub fn mc_estimator_moments(
    kind: EstimatorKind,
    sampler: &SamplerConfig,
    f: &TabulatedObjective,
    phi: &[Vec<f64>],
    trials: usize,
    seed: u64,
) -> Result<McMoments> {
    if trials < MIN_MC_TRIALS {
        return invalid(format!("need at least {MIN_MC_TRIALS} trials, got {trials}"));
    }
    let probs = probs_from_logits(phi)?;
    f.check_probs(&probs)?;
    let draws = map_indexed(trials, |t| {
        let mut rng = stream_rng(seed, t as u64);
        sampled_estimate(kind, sampler, &probs, |a| f.value(a), &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(summarize(draws.iter().map(|d| (&d.estimate, d.clipped)), trials))
}

/// Per-coordinate sample mean, unbiased sample variance and standard error.
pub(crate) fn summarize<'a, I>(draws: I, trials: usize) -> McMoments
where
    I: Iterator<Item = (&'a GradientEstimate, bool)> + Clone,
{
    let first = draws.clone().next().expect("at least one draw").0;
    let (dims, c) = (first.dims(), first.n_categories());
    let tf = trials as f64;
    let mut mean = GradientEstimate::zeros(dims, c);
    let mut clipped = 0usize;
    for (g, hit) in draws.clone() {
        mean.add_scaled(g, 1.0 / tf);
        clipped += hit as usize;
    }
    let mut sq = vec![0.0; dims * c];
    for (g, _) in draws {
        for ((s, x), m) in sq.iter_mut().zip(g.as_slice()).zip(mean.as_slice()) {
            *s += (x - m) * (x - m);
        }
    }
    let denom = (tf - 1.0).max(1.0);
    let var: Vec<f64> = sq.iter().map(|s| s / denom).collect();
    let se: Vec<f64> = var.iter().map(|v| (v / tf).sqrt()).collect();
    let split = |v: Vec<f64>| GradientEstimate::from_rows(v.chunks(c).map(<[f64]>::to_vec).collect());
    McMoments {
        mean,
        variance: split(var),
        std_error: split(se),
        clip_rate: clipped as f64 / tf,
        trials,
    }
}
