//! Antithetic categorical sampling.
//!
//! Two paths turn copula draws into `N` one-hot samples that share the
//! marginal `Cat(p)`:
//!
//! - inverse CDF: one uniform per sample, categorised against the cumulative
//!   cells of a reordered `p`. The pair law is known in closed form through
//!   the Dirichlet-copula bivariate CDF, averaged over a set of anchored
//!   orderings so that every pair of categories can co-occur.
//! - Gumbel max: one copula draw per category, Gumbel noise
//!   `-ln(-ln u)` shifted by `ln p`, argmax per sample. The pair law is
//!   estimated from the draw itself and ratios are clipped.
//!
//! Both return the importance-ratio matrix `R_ij = p_i p_j / P(i, j)` used by
//! the CARMS estimator.

use rand::Rng;

use crate::copula::{bivariate_cdf_unchecked, sample_dirichlet_copula, CopulaKind};
use crate::error::{invalid, Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance on the total mass of a bivariate pmf.
pub const PMF_SUM_TOL: f64 = 1e-10;
/// Default ceiling for importance ratios.
pub const DEFAULT_CLIP: f64 = 10.0;

/// A point on the probability simplex with at least two categories.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return invalid(format!("need at least two categories, got {}", probs.len()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return invalid(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self { probs })
    }

    /// Numerically stable softmax of `logits`.
    pub fn from_logits(logits: &[f64]) -> Result<Self> {
        if logits.iter().any(|x| !x.is_finite()) {
            return invalid("logits must be finite");
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Self::new(exps.into_iter().map(|e| e / total).collect())
    }

    pub fn uniform(c: usize) -> Result<Self> {
        if c < 2 {
            return invalid(format!("need at least two categories, got {c}"));
        }
        Ok(Self { probs: vec![1.0 / c as f64; c] })
    }

    /// Log-probabilities, usable as logits.
    pub fn logits(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

/// Left and right edges of the inverse-CDF cells, indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundaries {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Boundaries {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

pub fn compute_boundaries(p: &ProbVector) -> Boundaries {
    boundaries_of(p.as_slice())
}

fn boundaries_of(probs: &[f64]) -> Boundaries {
    let mut left = Vec::with_capacity(probs.len());
    let mut right = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        left.push(acc);
        acc += p;
        right.push(acc);
    }
    Boundaries { left, right }
}

/// Cell index `j` with `left_j <= u < right_j`; the last nonempty cell is
/// closed at 1.
pub fn categorize(u: f64, b: &Boundaries) -> Result<usize> {
    if !(u > 0.0 && u < 1.0) {
        return invalid(format!("uniform must lie in (0, 1), got {u}"));
    }
    Ok(categorize_unchecked(u, b))
}

fn categorize_unchecked(u: f64, b: &Boundaries) -> usize {
    if let Some(j) = b.right.iter().position(|&r| u < r) {
        return j;
    }
    // u at or above the accumulated total: last cell with positive width
    (0..b.len())
        .rev()
        .find(|&j| b.right[j] > b.left[j])
        .unwrap_or(b.len() - 1)
}

/// A relabelling of the categories that puts `anchor.0` first and
/// `anchor.1` last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ordering {
    /// `position[c]` is where category `c` lands.
    position: Vec<usize>,
    /// `category[k]` is the category at position `k`.
    category: Vec<usize>,
    anchor: (usize, usize),
}

impl Ordering {
    pub fn identity(c: usize) -> Result<Self> {
        make_ordering(0, c.saturating_sub(1), c)
    }

    pub fn position(&self, category: usize) -> usize {
        self.position[category]
    }

    pub fn category_at(&self, position: usize) -> usize {
        self.category[position]
    }

    pub fn positions(&self) -> &[usize] {
        &self.position
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    /// `p` rearranged into position order.
    pub fn permute(&self, p: &[f64]) -> Vec<f64> {
        self.category.iter().map(|&c| p[c]).collect()
    }
}

/// Rotates the categories so `i` comes first, then swaps `j` into the last
/// position.
pub fn make_ordering(i: usize, j: usize, c: usize) -> Result<Ordering> {
    if c < 2 {
        return invalid(format!("need at least two categories, got {c}"));
    }
    if i >= c || j >= c {
        return invalid(format!("anchor ({i}, {j}) out of range for {c} categories"));
    }
    if i == j {
        return invalid(format!("anchor categories must differ, got ({i}, {j})"));
    }
    let mut position: Vec<usize> = (0..c).map(|k| (k + c - i) % c).collect();
    let last = (i + c - 1) % c;
    if last != j {
        position.swap(last, j);
    }
    let mut category = vec![0; c];
    for (cat, &pos) in position.iter().enumerate() {
        category[pos] = cat;
    }
    Ok(Ordering { position, category, anchor: (i, j) })
}

/// The `C(C-1)/2` orderings anchored at every unordered pair `k < l`.
pub fn all_anchored_orderings(c: usize) -> Result<Vec<Ordering>> {
    let mut out = Vec::with_capacity(c * c.saturating_sub(1) / 2);
    for k in 0..c {
        for l in (k + 1)..c {
            out.push(make_ordering(k, l, c)?);
        }
    }
    Ok(out)
}

/// An ordering together with the cells of the reordered probabilities.
struct OrderedCells<'a> {
    ordering: &'a Ordering,
    cells: Boundaries,
}

impl<'a> OrderedCells<'a> {
    fn new(p: &[f64], ordering: &'a Ordering) -> Self {
        Self { ordering, cells: boundaries_of(&ordering.permute(p)) }
    }

    fn pair_probability(&self, i: usize, j: usize, n: usize) -> f64 {
        let a = self.ordering.position(i);
        let b = self.ordering.position(j);
        let (li, ri) = (self.cells.left[a], self.cells.right[a]);
        let (lj, rj) = (self.cells.left[b], self.cells.right[b]);
        let cdf = |x: f64, y: f64| bivariate_cdf_unchecked(x.min(1.0), y.min(1.0), n);
        let value = cdf(ri, rj) - cdf(ri, lj) - cdf(li, rj) + cdf(li, lj);
        value.min(ri - li).min(rj - lj).max(0.0)
    }
}

fn check_pair(p: &ProbVector, i: usize, j: usize) -> Result<()> {
    if i >= p.len() || j >= p.len() {
        return invalid(format!("pair ({i}, {j}) out of range for {} categories", p.len()));
    }
    Ok(())
}

fn check_ordering(p: &ProbVector, ordering: &Ordering) -> Result<()> {
    if ordering.len() != p.len() {
        return invalid(format!(
            "ordering over {} categories applied to {} probabilities",
            ordering.len(),
            p.len()
        ));
    }
    Ok(())
}

/// `P(z = i, z' = j)` for two of `n` Dirichlet-copula samples categorised
/// under a single ordering.
pub fn bivariate_pmf_one_ordering(
    p: &ProbVector,
    ordering: &Ordering,
    i: usize,
    j: usize,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return invalid(format!("need n >= 2 samples, got {n}"));
    }
    check_ordering(p, ordering)?;
    check_pair(p, i, j)?;
    Ok(OrderedCells::new(p.as_slice(), ordering).pair_probability(i, j, n))
}

/// Pair probabilities under the uniform mixture over `orderings`.
pub fn bivariate_pmf_averaged(
    p: &ProbVector,
    pairs: &[(usize, usize)],
    orderings: &[Ordering],
    n: usize,
) -> Result<Vec<f64>> {
    if n < 2 {
        return invalid(format!("need n >= 2 samples, got {n}"));
    }
    if orderings.is_empty() {
        return invalid("ordering set is empty");
    }
    for o in orderings {
        check_ordering(p, o)?;
    }
    for &(i, j) in pairs {
        check_pair(p, i, j)?;
    }
    let cells: Vec<OrderedCells> =
        orderings.iter().map(|o| OrderedCells::new(p.as_slice(), o)).collect();
    averaged_unchecked(p, pairs, &cells, n)
}

fn averaged_unchecked(
    p: &ProbVector,
    pairs: &[(usize, usize)],
    cells: &[OrderedCells],
    n: usize,
) -> Result<Vec<f64>> {
    let weight = 1.0 / cells.len() as f64;
    pairs
        .iter()
        .map(|&(i, j)| {
            let total: f64 = cells.iter().map(|c| c.pair_probability(i, j, n)).sum();
            let value = total * weight;
            if i != j && value <= 0.0 && p.get(i) * p.get(j) > 0.0 {
                Err(Error::DegeneratePmf { i, j })
            } else {
                Ok(value)
            }
        })
        .collect()
}

/// Joint law of one ordered pair of samples, `C x C`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePmf {
    c: usize,
    probs: Vec<f64>,
}

impl BivariatePmf {
    /// Validates entries in `[0, 1]` with total mass one.
    pub fn new(c: usize, probs: Vec<f64>) -> Result<Self> {
        if c < 2 || probs.len() != c * c {
            return invalid(format!("expected a {c} x {c} pmf, got {} entries", probs.len()));
        }
        if probs.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0) {
            return invalid("pmf entries must lie in [0, 1]");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InconsistentDistribution(format!(
                "pmf mass is {total}, expected 1"
            )));
        }
        Ok(Self { c, probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return invalid("pmf rows must form a square matrix");
        }
        Self::new(c, rows.concat())
    }

    /// `p p^T`, the law of two independent samples.
    pub fn independent(p: &ProbVector) -> Self {
        let c = p.len();
        let probs = (0..c * c).map(|k| p.get(k / c) * p.get(k % c)).collect();
        Self { c, probs }
    }

    /// Full analytic pmf of the inverse-CDF path, mixed over `orderings`.
    pub fn analytic(p: &ProbVector, orderings: &[Ordering], n: usize) -> Result<Self> {
        let c = p.len();
        let pairs: Vec<(usize, usize)> = (0..c * c).map(|k| (k / c, k % c)).collect();
        let probs = bivariate_pmf_averaged(p, &pairs, orderings, n)?;
        Ok(Self { c, probs })
    }

    /// `Z^T (1 - I) Z / (N (N - 1))`, the empirical law over all ordered
    /// pairs of distinct samples.
    pub fn empirical(samples: &SampleMatrix) -> Self {
        let c = samples.n_categories();
        let n = samples.n_samples() as f64;
        let counts = samples.counts();
        let norm = n * (n - 1.0);
        let mut probs = vec![0.0; c * c];
        for i in 0..c {
            for j in 0..c {
                let k = counts[i] as f64;
                let pairs = if i == j { k * (k - 1.0) } else { k * counts[j] as f64 };
                probs[i * c + j] = pairs / norm;
            }
        }
        Self { c, probs }
    }

    pub fn n_categories(&self) -> usize {
        self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.c + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.probs.chunks(self.c).map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.c).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// `N` categorical samples, stored as category indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMatrix {
    c: usize,
    rows: Vec<usize>,
}

impl SampleMatrix {
    pub fn new(c: usize, rows: Vec<usize>) -> Result<Self> {
        if c < 2 {
            return invalid(format!("need at least two categories, got {c}"));
        }
        if rows.is_empty() {
            return invalid("sample matrix has no rows");
        }
        if let Some(bad) = rows.iter().find(|&&r| r >= c) {
            return invalid(format!("category {bad} out of range for {c} categories"));
        }
        Ok(Self { c, rows })
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_categories(&self) -> usize {
        self.c
    }

    pub fn category(&self, n: usize) -> usize {
        self.rows[n]
    }

    pub fn categories(&self) -> &[usize] {
        &self.rows
    }

    pub fn one_hot(&self, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.c];
        row[self.rows[n]] = 1.0;
        row
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.c];
        for &r in &self.rows {
            counts[r] += 1;
        }
        counts
    }

    /// Same rows, reordered by `perm` (`new[k] = old[perm[k]]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { c: self.c, rows: perm.iter().map(|&k| self.rows[k]).collect() }
    }

    /// Distinct unordered category pairs `(a <= b)` realised by two
    /// different samples.
    pub fn realized_pairs(&self) -> Vec<(usize, usize)> {
        let counts = self.counts();
        let mut out = Vec::new();
        for a in 0..self.c {
            if counts[a] == 0 {
                continue;
            }
            if counts[a] >= 2 {
                out.push((a, a));
            }
            for (b, &count) in counts.iter().enumerate().skip(a + 1) {
                if count > 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Importance ratios `R_ij = p_i p_j / P(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMatrix {
    c: usize,
    ratios: Vec<f64>,
    clip: Option<f64>,
    clipped: bool,
}

impl RatioMatrix {
    /// All-ones ratios, the independent-sample case.
    pub fn ones(c: usize) -> Self {
        Self { c, ratios: vec![1.0; c * c], clip: None, clipped: false }
    }

    /// Raw `C x C` ratios, row-major. Entries must be finite.
    pub fn from_values(c: usize, ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() != c * c {
            return invalid(format!("expected {} ratios, got {}", c * c, ratios.len()));
        }
        if ratios.iter().any(|r| !r.is_finite()) {
            return invalid("ratios must be finite");
        }
        Ok(Self { c, ratios, clip: None, clipped: false })
    }

    /// Full ratio matrix of a known pmf. Pairs with zero joint and zero
    /// marginal product get the inert value 1.
    pub fn from_pmf(p: &ProbVector, pmf: &BivariatePmf, clip: Option<f64>) -> Result<Self> {
        let c = p.len();
        if pmf.n_categories() != c {
            return invalid("pmf and probability vector disagree on C");
        }
        let mut out = Self { c, ratios: vec![1.0; c * c], clip, clipped: false };
        for i in 0..c {
            for j in 0..c {
                match ratio_entry(p.get(i) * p.get(j), pmf.get(i, j), clip) {
                    Some((r, hit)) => {
                        out.ratios[i * c + j] = r;
                        out.clipped |= hit && i != j;
                    }
                    None if i == j => {}
                    None => return Err(Error::DegeneratePmf { i, j }),
                }
            }
        }
        Ok(out)
    }

    pub fn n_categories(&self) -> usize {
        self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.ratios[i * self.c + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.ratios[i * self.c + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.ratios
    }

    pub fn clip_ceiling(&self) -> Option<f64> {
        self.clip
    }

    /// Whether the ceiling reduced an off-diagonal entry. Diagonal entries
    /// multiply `z_n - z_m = 0` and are not counted.
    pub fn clipped(&self) -> bool {
        self.clipped
    }
}

/// Returns `(ratio, clipped)`, or `None` when the ratio is infinite and no
/// ceiling applies.
fn ratio_entry(product: f64, joint: f64, clip: Option<f64>) -> Option<(f64, bool)> {
    let raw = if joint > 0.0 {
        product / joint
    } else if product > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    match clip {
        Some(ceiling) if raw > ceiling => Some((ceiling, true)),
        _ if raw.is_finite() => Some((raw, false)),
        _ => None,
    }
}

/// How many anchored orderings enter the pmf average on the inverse-CDF path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingBudget {
    /// Every anchored ordering; exact.
    All,
    /// Anchored orderings of the realised pairs plus this many random ones.
    Extra(usize),
    /// `All` up to [`AUTO_FULL_MAX_CATEGORIES`] categories, otherwise as many
    /// extra orderings as there are realised pairs.
    Auto,
}

pub const AUTO_FULL_MAX_CATEGORIES: usize = 8;

/// Samples and ratio matrix from one antithetic draw.
#[derive(Debug, Clone, PartialEq)]
pub struct AntitheticSample {
    pub samples: SampleMatrix,
    pub ratios: RatioMatrix,
    /// Ordering used to categorise the uniforms (inverse-CDF path only).
    pub ordering: Option<Ordering>,
}

/// Settings for [`sample_antithetic_inverse_cdf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseCdfConfig {
    pub copula: CopulaKind,
    pub budget: OrderingBudget,
    pub clip: Option<f64>,
}

impl Default for InverseCdfConfig {
    fn default() -> Self {
        Self { copula: CopulaKind::Dirichlet, budget: OrderingBudget::Auto, clip: Some(DEFAULT_CLIP) }
    }
}

/// Categorises one Dirichlet-copula draw of size `n` under `ordering`.
pub fn draw_inverse_cdf<R: Rng + ?Sized>(
    n: usize,
    p: &ProbVector,
    ordering: &Ordering,
    rng: &mut R,
) -> Result<SampleMatrix> {
    check_ordering(p, ordering)?;
    let u = sample_dirichlet_copula(n, rng)?;
    let cells = boundaries_of(&ordering.permute(p.as_slice()));
    let rows = u
        .values()
        .iter()
        .map(|&x| ordering.category_at(categorize_unchecked(x, &cells)))
        .collect();
    SampleMatrix::new(p.len(), rows)
}

fn random_anchored<R: Rng + ?Sized>(c: usize, rng: &mut R) -> (usize, usize) {
    let k = rng.random_range(0..c);
    let mut l = rng.random_range(0..c - 1);
    if l >= k {
        l += 1;
    }
    (k.min(l), k.max(l))
}

/// Antithetic inverse-CDF sampling with the analytic ratio matrix.
///
/// A sampling ordering is drawn uniformly from the anchored orderings, the
/// copula uniforms are categorised under it, and `R` is filled for the
/// realised pairs from the pmf averaged over the ordering set. Unrealised
/// entries hold the placeholder 1.
pub fn sample_antithetic_inverse_cdf<R: Rng + ?Sized>(
    n: usize,
    p: &ProbVector,
    config: &InverseCdfConfig,
    rng: &mut R,
) -> Result<AntitheticSample> {
    if config.copula != CopulaKind::Dirichlet {
        return Err(Error::UnsupportedPath(format!(
            "inverse-CDF sampling needs an analytic bivariate CDF; {} copula has none",
            config.copula.name()
        )));
    }
    if n < 2 {
        return invalid(format!("need n >= 2 samples, got {n}"));
    }
    let c = p.len();
    let budget = match config.budget {
        OrderingBudget::Auto if c <= AUTO_FULL_MAX_CATEGORIES => OrderingBudget::All,
        other => other,
    };

    let (sampling, mut orderings) = match budget {
        OrderingBudget::All => {
            let all = all_anchored_orderings(c)?;
            let pick = rng.random_range(0..all.len());
            (all[pick].clone(), all)
        }
        _ => {
            let (k, l) = random_anchored(c, rng);
            let o = make_ordering(k, l, c)?;
            (o.clone(), vec![o])
        }
    };
    let samples = draw_inverse_cdf(n, p, &sampling, rng)?;
    let pairs = samples.realized_pairs();

    if budget != OrderingBudget::All {
        let mut anchors: Vec<(usize, usize)> = orderings.iter().map(|o| o.anchor()).collect();
        let mut push = |a: (usize, usize), orderings: &mut Vec<Ordering>| -> Result<()> {
            if !anchors.contains(&a) {
                anchors.push(a);
                orderings.push(make_ordering(a.0, a.1, c)?);
            }
            Ok(())
        };
        let distinct: Vec<(usize, usize)> = pairs.iter().copied().filter(|(a, b)| a != b).collect();
        for &pair in &distinct {
            push(pair, &mut orderings)?;
        }
        let extra = match budget {
            OrderingBudget::Extra(k) => k,
            _ => distinct.len(),
        };
        for _ in 0..extra {
            push(random_anchored(c, rng), &mut orderings)?;
        }
    }

    let cells: Vec<OrderedCells> =
        orderings.iter().map(|o| OrderedCells::new(p.as_slice(), o)).collect();
    let joint = averaged_unchecked(p, &pairs, &cells, n)?;

    let mut ratios = RatioMatrix::ones(c);
    ratios.clip = config.clip;
    for (&(i, j), &pij) in pairs.iter().zip(&joint) {
        let (r, hit) = match ratio_entry(p.get(i) * p.get(j), pij, config.clip) {
            Some(v) => v,
            None if i == j => (1.0, false),
            None => return Err(Error::DegeneratePmf { i, j }),
        };
        ratios.set(i, j, r);
        ratios.set(j, i, r);
        ratios.clipped |= hit && i != j;
    }
    Ok(AntitheticSample { samples, ratios, ordering: Some(sampling) })
}

/// Antithetic Gumbel-max sampling with the empirical ratio matrix.
///
/// Pairs absent from the draw have an infinite raw ratio; with a ceiling they
/// get the ceiling, without one they keep the placeholder 1 (they are never
/// read by the estimator).
pub fn sample_antithetic_gumbel<R: Rng + ?Sized>(
    n: usize,
    p: &ProbVector,
    copula: CopulaKind,
    clip: Option<f64>,
    rng: &mut R,
) -> Result<AntitheticSample> {
    if n < 2 {
        return invalid(format!("need n >= 2 samples, got {n}"));
    }
    if let Some(ceiling) = clip {
        if ceiling.is_nan() || ceiling <= 0.0 {
            return invalid(format!("clip ceiling must be positive, got {ceiling}"));
        }
    }
    let c = p.len();
    let log_p = p.logits();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut rows = vec![0usize; n];
    for (cat, &shift) in log_p.iter().enumerate() {
        let u = copula.sample(n, rng)?;
        for (k, &x) in u.values().iter().enumerate() {
            let score = -(-x.ln()).ln() + shift;
            if score > best[k] {
                best[k] = score;
                rows[k] = cat;
            }
        }
    }
    let samples = SampleMatrix::new(c, rows)?;
    let pmf = BivariatePmf::empirical(&samples);
    let mut ratios = RatioMatrix::ones(c);
    ratios.clip = clip;
    for i in 0..c {
        for j in 0..c {
            if let Some((r, hit)) = ratio_entry(p.get(i) * p.get(j), pmf.get(i, j), clip) {
                ratios.set(i, j, r);
                ratios.clipped |= hit && i != j;
            }
        }
    }
    Ok(AntitheticSample { samples, ratios, ordering: None })
}

/// `n` independent samples from `Cat(p)` by inverse CDF on i.i.d. uniforms.
pub fn sample_independent<R: Rng + ?Sized>(n: usize, p: &ProbVector, rng: &mut R) -> Result<SampleMatrix> {
    if n < 1 {
        return invalid("need at least one sample");
    }
    let cells = compute_boundaries(p);
    let rows = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            categorize_unchecked(u.max(f64::MIN_POSITIVE), &cells)
        })
        .collect();
    SampleMatrix::new(p.len(), rows)
}
