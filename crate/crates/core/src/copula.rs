//! Antithetic copulas.
//!
//! A copula draw is a vector of `N` uniforms whose coordinates are mutually
//! negatively dependent. The Dirichlet copula maps `d ~ Dir(1_N)` through the
//! Beta(1, N-1) CDF, `u = 1 - (1 - d)^(N-1)`, and has a closed-form bivariate
//! CDF. The Gaussian copula pushes an equicorrelated normal vector through the
//! standard normal CDF; it has no analytic bivariate CDF here and is only used
//! by the Gumbel path.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Result};

/// Copula outputs are clamped into `[EPS, 1 - EPS]`.
pub const EPS: f64 = 1e-12;

/// One draw from an `N`-variate copula.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaDraw {
    values: Vec<f64>,
}

impl CopulaDraw {
    /// Wraps raw uniforms, clamping each into `[EPS, 1 - EPS]`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return invalid("a copula draw needs at least two coordinates");
        }
        if values.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return invalid("copula coordinates must lie in [0, 1]");
        }
        Ok(Self::clamped(values))
    }

    fn clamped(mut values: Vec<f64>) -> Self {
        for u in values.iter_mut() {
            *u = u.clamp(EPS, 1.0 - EPS);
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Copula family used to couple the `N` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaKind {
    Dirichlet,
    /// Equicorrelated Gaussian copula. `None` selects the most negative
    /// feasible correlation, `-1/(N-1)`.
    Gaussian { rho: Option<f64> },
}

impl CopulaKind {
    pub fn gaussian() -> Self {
        CopulaKind::Gaussian { rho: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CopulaKind::Dirichlet => "dirichlet",
            CopulaKind::Gaussian { .. } => "gaussian",
        }
    }

    /// Draws one `n`-vector from this copula.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CopulaDraw> {
        match *self {
            CopulaKind::Dirichlet => sample_dirichlet_copula(n, rng),
            CopulaKind::Gaussian { rho } => {
                let rho = rho.unwrap_or_else(|| default_gaussian_rho(n));
                sample_gaussian_copula(n, rho, rng)
            }
        }
    }
}

/// Most negative feasible equicorrelation for `n` variables.
pub fn default_gaussian_rho(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        -1.0 / (n as f64 - 1.0)
    }
}

/// Maps a point of the simplex through the Dirichlet-copula transform.
pub fn dirichlet_copula_from_simplex(d: &[f64]) -> Result<CopulaDraw> {
    let n = d.len();
    if n < 2 {
        return invalid("dirichlet copula needs n >= 2");
    }
    if d.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return invalid("simplex coordinates must lie in [0, 1]");
    }
    let k = (n - 1) as f64;
    // 1 - (1 - d)^k, evaluated without cancellation for small d
    let values = d.iter().map(|&x| -(k * (-x).ln_1p()).exp_m1()).collect();
    Ok(CopulaDraw::clamped(values))
}

/// Dirichlet copula draw: `d ~ Dir(1_n)` from normalised unit exponentials,
/// then `u_i = 1 - (1 - d_i)^(n-1)`.
pub fn sample_dirichlet_copula<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CopulaDraw> {
    if n < 2 {
        return invalid(format!("dirichlet copula needs n >= 2, got {n}"));
    }
    let mut d: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = d.iter().sum();
    for x in d.iter_mut() {
        *x /= total;
    }
    dirichlet_copula_from_simplex(&d)
}

/// Bivariate CDF `P(u_i < p, u_j < q)` of any coordinate pair of the
/// `n`-variate Dirichlet copula.
pub fn dirichlet_bivariate_cdf(p: f64, q: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("dirichlet copula needs n >= 2, got {n}"));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return invalid(format!("cdf arguments must lie in [0, 1], got ({p}, {q})"));
    }
    Ok(bivariate_cdf_unchecked(p, q, n))
}

pub(crate) fn bivariate_cdf_unchecked(p: f64, q: f64, n: usize) -> f64 {
    if p <= 0.0 || q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return p;
    }
    if p >= 1.0 {
        return q;
    }
    if n == 2 {
        return (p + q - 1.0).max(0.0);
    }
    let k = (n - 1) as f64;
    let tail = (1.0 - p).powf(1.0 / k) + (1.0 - q).powf(1.0 / k) - 1.0;
    let tail = if tail > 0.0 { tail.powf(k) } else { 0.0 };
    let value = p + q - 1.0 + tail;
    // roundoff can push the value a hair outside the Frechet bounds
    value.max(p + q - 1.0).max(0.0).min(p.min(q))
}

/// Pearson correlation of `1{u_i < p}` and `1{u_j < p}` under the
/// `n`-variate Dirichlet copula.
pub fn bernoulli_pair_correlation(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0, 1), got {p}"));
    }
    let joint = dirichlet_bivariate_cdf(p, p, n)?;
    Ok((joint - p * p) / (p * (1.0 - p)))
}

/// Gaussian copula draw with pairwise correlation `rho`.
///
/// Uses the centring construction `y_i = g_i - kappa * mean(g)`, which hits
/// any equicorrelation in `[-1/(n-1), 0]` without a Cholesky factor.
pub fn sample_gaussian_copula<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<CopulaDraw> {
    if n < 2 {
        return invalid(format!("gaussian copula needs n >= 2, got {n}"));
    }
    let lower = default_gaussian_rho(n);
    if !(rho >= lower - 1e-12 && rho <= 0.0) {
        return invalid(format!(
            "equicorrelation {rho} outside the feasible band [{lower}, 0] for n = {n}"
        ));
    }
    let nf = n as f64;
    // (kappa^2 - 2 kappa) / n = t, with rho = t / (1 + t)
    let t = rho / (1.0 - rho);
    let kappa = 1.0 - (1.0 + nf * t).max(0.0).sqrt();
    let scale = (1.0 + t).sqrt();
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mean = g.iter().sum::<f64>() / nf;
    let values = g
        .iter()
        .map(|&x| normal_cdf((x - kappa * mean) / scale))
        .collect();
    Ok(CopulaDraw::clamped(values))
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
