//! Correlation between the one-hot coordinates of an antithetic pair.
//!
//! Each draw produces `N` samples; the first two form the pair `(z, z')`.
//! Entry `(i, j)` is the Pearson correlation of the Bernoulli indicators
//! `z_i` and `z'_j` across draws, or missing when either indicator is
//! constant.

use serde::Serialize;

use super::output::{fmt_opt, CsvRecord};
use crate::categorical::{
    sample_antithetic_gumbel, sample_antithetic_inverse_cdf, sample_independent, InverseCdfConfig,
    ProbVector, SampleMatrix,
};
use crate::copula::CopulaKind;
use crate::error::{invalid, Error, Result};
use crate::par::{map_indexed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSampler {
    InverseCdf,
    Gumbel,
    Independent,
}

impl PairSampler {
    pub fn name(&self) -> &'static str {
        match self {
            PairSampler::InverseCdf => "inverse-cdf",
            PairSampler::Gumbel => "gumbel",
            PairSampler::Independent => "independent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [PairSampler::InverseCdf, PairSampler::Gumbel, PairSampler::Independent]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Smallest accepted number of draws.
pub const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationConfig {
    pub sampler: PairSampler,
    pub copula: CopulaKind,
    pub categories: usize,
    /// Samples per antithetic draw.
    pub samples: usize,
    pub draws: usize,
    /// Marginal probabilities; uniform when absent.
    pub probs: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        Self {
            sampler: PairSampler::InverseCdf,
            copula: CopulaKind::Dirichlet,
            categories: 3,
            samples: 3,
            draws: 1000,
            probs: None,
            seed: 0,
        }
    }
}

impl CorrelationConfig {
    fn probabilities(&self) -> Result<ProbVector> {
        match &self.probs {
            Some(p) if p.len() != self.categories => {
                invalid(format!("{} probabilities for {} categories", p.len(), self.categories))
            }
            Some(p) => ProbVector::new(p.clone()),
            None => ProbVector::uniform(self.categories),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws < MIN_DRAWS {
            return invalid(format!("need at least {MIN_DRAWS} draws, got {}", self.draws));
        }
        if self.samples < 2 {
            return invalid("samples must be >= 2");
        }
        if self.sampler == PairSampler::InverseCdf && self.copula != CopulaKind::Dirichlet {
            return Err(Error::UnsupportedPath("inverse-cdf requires the dirichlet copula".into()));
        }
        self.probabilities().map(|_| ())
    }
}

/// One entry of the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub method: String,
    pub copula: String,
    pub categories: usize,
    pub samples: usize,
    pub draws: usize,
    pub seed: u64,
    pub i: usize,
    pub j: usize,
    pub corr: Option<f64>,
}

impl CsvRecord for CorrelationRecord {
    fn header(&self) -> Vec<String> {
        ["method", "copula", "categories", "samples", "draws", "seed", "i", "j", "corr"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.copula.clone(),
            self.categories.to_string(),
            self.samples.to_string(),
            self.draws.to_string(),
            self.seed.to_string(),
            (self.i + 1).to_string(),
            (self.j + 1).to_string(),
            fmt_opt(self.corr),
        ]
    }
}

/// The `C x C` matrix, row-major, as records with one-based `i, j` in CSV
/// and zero-based in memory.
pub fn run_correlation(config: &CorrelationConfig) -> Result<Vec<CorrelationRecord>> {
    config.validate()?;
    let p = config.probabilities()?;
    let pairs = map_indexed(config.draws, |t| -> Result<(usize, usize)> {
        let mut rng = stream_rng(config.seed, t as u64);
        let s = draw(config, &p, &mut rng)?;
        Ok((s.category(0), s.category(1)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let matrix = pair_correlations(&pairs, config.categories);
    Ok(matrix
        .into_iter()
        .enumerate()
        .map(|(k, corr)| CorrelationRecord {
            method: config.sampler.name().to_string(),
            copula: config.copula.name().to_string(),
            categories: config.categories,
            samples: config.samples,
            draws: config.draws,
            seed: config.seed,
            i: k / config.categories,
            j: k % config.categories,
            corr,
        })
        .collect())
}

fn draw(config: &CorrelationConfig, p: &ProbVector, rng: &mut rand_chacha::ChaCha8Rng) -> Result<SampleMatrix> {
    match config.sampler {
        PairSampler::InverseCdf => {
            let icdf = InverseCdfConfig { copula: config.copula, clip: None, ..Default::default() };
            Ok(sample_antithetic_inverse_cdf(config.samples, p, &icdf, rng)?.samples)
        }
        PairSampler::Gumbel => Ok(sample_antithetic_gumbel(config.samples, p, config.copula, None, rng)?.samples),
        PairSampler::Independent => sample_independent(config.samples, p, rng),
    }
}

/// Pearson correlations of `1{z = i}` and `1{z' = j}` over the pairs.
pub fn pair_correlations(pairs: &[(usize, usize)], c: usize) -> Vec<Option<f64>> {
    let n = pairs.len() as f64;
    let mut first = vec![0.0; c];
    let mut second = vec![0.0; c];
    let mut joint = vec![0.0; c * c];
    for &(a, b) in pairs {
        first[a] += 1.0;
        second[b] += 1.0;
        joint[a * c + b] += 1.0;
    }
    (0..c * c)
        .map(|k| {
            let (i, j) = (k / c, k % c);
            let pi = first[i] / n;
            let pj = second[j] / n;
            let denom = (pi * (1.0 - pi) * pj * (1.0 - pj)).sqrt();
            (denom > 0.0).then(|| (joint[k] / n - pi * pj) / denom)
        })
        .collect()
}
