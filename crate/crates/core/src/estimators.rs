//! Score-function gradient estimators with respect to the logits.
//!
//! Every estimator here takes probabilities `p = softmax(phi)`, samples and
//! caller-supplied function values; none evaluates `f` itself. The score of a
//! one-hot sample is `z - p`.

use crate::categorical::{ProbVector, RatioMatrix, SampleMatrix};
use crate::error::{invalid, Result};

/// `f(z_n)` for each of the `N` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionValues(Vec<f64>);

impl FunctionValues {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("function values must be finite");
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Same values, reordered by `perm` (`new[k] = old[perm[k]]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&k| self.0[k]).collect())
    }
}

/// A `D x C` gradient (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GradientEstimate {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row(row: Vec<f64>) -> Self {
        Self { rows: 1, cols: row.len(), data: row }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn dims(&self) -> usize {
        self.rows
    }

    pub fn n_categories(&self) -> usize {
        self.cols
    }

    pub fn get(&self, d: usize, c: usize) -> f64 {
        self.data[d * self.cols + c]
    }

    pub fn row(&self, d: usize) -> &[f64] {
        &self.data[d * self.cols..(d + 1) * self.cols]
    }

    pub fn row_mut(&mut self, d: usize) -> &mut [f64] {
        &mut self.data[d * self.cols..(d + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.cols.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub(crate) fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }
}

fn check_shapes(f: &FunctionValues, z: &SampleMatrix, p: &ProbVector) -> Result<usize> {
    let n = z.n_samples();
    if f.len() != n {
        return invalid(format!("{} function values for {n} samples", f.len()));
    }
    if z.n_categories() != p.len() {
        return invalid(format!(
            "samples over {} categories, probabilities over {}",
            z.n_categories(),
            p.len()
        ));
    }
    if n < 2 {
        return invalid(format!("need N >= 2 samples, got {n}"));
    }
    Ok(n)
}

/// Adds `weight * (e_z - p)` to `row`.
fn add_score(row: &mut [f64], z: usize, p: &[f64], weight: f64) {
    for (r, &pc) in row.iter_mut().zip(p) {
        *r -= weight * pc;
    }
    row[z] += weight;
}

/// Leave-one-out REINFORCE: `1/(N-1) sum_n (f_n - mean f)(z_n - p)`.
pub fn loorf(f: &FunctionValues, z: &SampleMatrix, p: &ProbVector) -> Result<GradientEstimate> {
    let n = check_shapes(f, z, p)?;
    let mean = f.mean();
    let scale = 1.0 / (n as f64 - 1.0);
    let mut row = vec![0.0; p.len()];
    for (k, &fk) in f.as_slice().iter().enumerate() {
        add_score(&mut row, z.category(k), p.as_slice(), scale * (fk - mean));
    }
    Ok(GradientEstimate::from_row(row))
}

/// LOORF through `(1/N) f^T (I - (1 - I)/(N-1)) (Z - 1 p^T)`.
pub fn loorf_matrix_form(f: &FunctionValues, z: &SampleMatrix, p: &ProbVector) -> Result<GradientEstimate> {
    carms(f, z, &RatioMatrix::ones(p.len()), p)
}

/// Two-sample LOORF `(f_a - f_b)(e_a - e_b) / 2`.
pub fn two_sample_loorf(f_a: f64, f_b: f64, z_a: usize, z_b: usize, c: usize) -> GradientEstimate {
    let mut row = vec![0.0; c];
    let half = 0.5 * (f_a - f_b);
    row[z_a] += half;
    row[z_b] -= half;
    GradientEstimate::from_row(row)
}

/// CARTS: the two-sample LOORF weighted by `R[z, z']`.
pub fn carts(f_z: f64, f_zp: f64, z: usize, zp: usize, r: &RatioMatrix) -> Result<GradientEstimate> {
    let c = r.n_categories();
    if z >= c || zp >= c {
        return invalid(format!("categories ({z}, {zp}) out of range for {c}"));
    }
    let mut g = two_sample_loorf(f_z, f_zp, z, zp, c);
    let w = r.get(z, zp);
    for x in g.row_mut(0) {
        *x *= w;
    }
    Ok(g)
}

fn check_ratios(z: &SampleMatrix, r: &RatioMatrix) -> Result<()> {
    if r.n_categories() != z.n_categories() {
        return invalid("ratio matrix and samples disagree on C");
    }
    for (i, j) in z.realized_pairs() {
        if !r.get(i, j).is_finite() || !r.get(j, i).is_finite() {
            return invalid(format!("nonfinite ratio at realised pair ({i}, {j})"));
        }
    }
    Ok(())
}

/// CARMS in matrix form, `(1/N) f^T (D - O) (Z - 1 p^T)` with
/// `O = (1 - I) o (Z R Z^T) / (N-1)` and `D = diag(O 1)`.
///
/// `R` is assumed symmetric, which holds for every ratio matrix built from a
/// pair law.
pub fn carms(f: &FunctionValues, z: &SampleMatrix, r: &RatioMatrix, p: &ProbVector) -> Result<GradientEstimate> {
    let n = check_shapes(f, z, p)?;
    check_ratios(z, r)?;
    let fv = f.as_slice();
    let off = 1.0 / (n as f64 - 1.0);
    let mut row = vec![0.0; p.len()];
    for a in 0..n {
        let za = z.category(a);
        // column a of f^T (D - O)
        let mut diag = 0.0;
        let mut cross = 0.0;
        for (b, &f_b) in fv.iter().enumerate() {
            if a == b {
                continue;
            }
            let o = off * r.get(z.category(b), za);
            diag += off * r.get(za, z.category(b));
            cross += f_b * o;
        }
        let w = (fv[a] * diag - cross) / n as f64;
        add_score(&mut row, za, p.as_slice(), w);
    }
    Ok(GradientEstimate::from_row(row))
}

/// CARMS as the explicit average of CARTS over ordered pairs `n != m`.
pub fn carms_pairwise(f: &FunctionValues, z: &SampleMatrix, r: &RatioMatrix) -> Result<GradientEstimate> {
    let n = z.n_samples();
    if f.len() != n || n < 2 {
        return invalid(format!("{} function values for {n} samples", f.len()));
    }
    check_ratios(z, r)?;
    let fv = f.as_slice();
    let mut total = GradientEstimate::zeros(1, z.n_categories());
    let scale = 1.0 / (n as f64 * (n as f64 - 1.0));
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let term = carts(fv[a], fv[b], z.category(a), z.category(b), r)?;
                total.add_scaled(&term, scale);
            }
        }
    }
    Ok(total)
}

/// `D` per-dimension sample matrices and ratio matrices sharing one vector of
/// function values evaluated on the joint samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTensor {
    pub samples: Vec<SampleMatrix>,
    pub ratios: Vec<RatioMatrix>,
    pub values: FunctionValues,
}

impl SampleTensor {
    pub fn dims(&self) -> usize {
        self.samples.len()
    }
}

/// Multivariate CARMS: row `d` is CARMS on `Z^d, R^d` with the shared `f`.
pub fn carms_multivariate(batch: &SampleTensor, probs: &[ProbVector]) -> Result<GradientEstimate> {
    let d = batch.dims();
    if d == 0 || batch.ratios.len() != d || probs.len() != d {
        return invalid(format!(
            "dimension mismatch: {d} sample matrices, {} ratio matrices, {} probability vectors",
            batch.ratios.len(),
            probs.len()
        ));
    }
    let n = batch.samples[0].n_samples();
    if batch.samples.iter().any(|s| s.n_samples() != n) {
        return invalid("sample matrices disagree on N");
    }
    let c = probs[0].len();
    if probs.iter().any(|p| p.len() != c) {
        return invalid("all dimensions must share C");
    }
    let mut out = GradientEstimate::zeros(d, c);
    for (k, p) in probs.iter().enumerate() {
        let row = carms(&batch.values, &batch.samples[k], &batch.ratios[k], p)?;
        out.row_mut(k).copy_from_slice(row.row(0));
    }
    Ok(out)
}

/// Binary ARMS: `1/(N-1) sum_n (f_n - mean f)(b_n - p) / (1 - rho)` per
/// dimension. `b` holds one row of `D` bits per sample.
pub fn arms_binary(f: &FunctionValues, b: &[Vec<bool>], p: &[f64], rho: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let d = p.len();
    if f.len() != n || n < 2 {
        return invalid(format!("{} function values for {n} samples", f.len()));
    }
    if rho.len() != d || b.iter().any(|row| row.len() != d) {
        return invalid("dimension mismatch between samples, p and rho");
    }
    if let Some(bad) = rho.iter().find(|&&r| r.is_nan() || r >= 1.0) {
        return invalid(format!("pair correlation {bad} must be < 1"));
    }
    let mean = f.mean();
    let scale = 1.0 / (n as f64 - 1.0);
    let mut grad = vec![0.0; d];
    for (row, &fk) in b.iter().zip(f.as_slice()) {
        for k in 0..d {
            let bit = if row[k] { 1.0 } else { 0.0 };
            grad[k] += scale * (fk - mean) * (bit - p[k]) / (1.0 - rho[k]);
        }
    }
    Ok(grad)
}

/// Baseline-free single-sample REINFORCE, `f(z)(z - p)`.
pub fn reinforce_single(f_z: f64, z: usize, p: &ProbVector) -> Result<GradientEstimate> {
    if z >= p.len() {
        return invalid(format!("category {z} out of range for {}", p.len()));
    }
    let mut row = vec![0.0; p.len()];
    add_score(&mut row, z, p.as_slice(), f_z);
    Ok(GradientEstimate::from_row(row))
}
