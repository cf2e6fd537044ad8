//! Gradient-variance comparison on the toy objective
//! `f(z) = sum_d sum_c d c z_dc` with `p_d ~ Dir(alpha 1_C)`.
//!
//! Trial `t` at concentration index `a` draws its probabilities from one
//! stream and its inner Monte Carlo loop from another; both depend only on
//! `(seed, a, t)`, so every method sees identical probabilities and identical
//! random streams.

use std::time::Instant;

use serde::Serialize;

use super::output::{fmt_float, CsvRecord};
use super::{budget_label, clip_label, sample_dirichlet_probs};
use crate::categorical::{OrderingBudget, DEFAULT_CLIP};
use crate::copula::CopulaKind;
use crate::error::{invalid, Error, Result};
use crate::method::{sampled_estimate, EstimatorKind, SamplerConfig};
use crate::oracle::{summarize, toy_value};
use crate::par::{map_indexed, stream_id, stream_rng};

const TAG_PROBS: u8 = 1;
const TAG_INNER: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub methods: Vec<EstimatorKind>,
    pub copula: CopulaKind,
    pub categories: usize,
    pub dims: usize,
    pub samples: usize,
    pub alphas: Vec<f64>,
    pub trials: usize,
    /// Inner Monte Carlo draws per variance estimate.
    pub inner: usize,
    pub seed: u64,
    pub clip: Option<f64>,
    pub budget: OrderingBudget,
    /// Adds wall-clock milliseconds to each record (breaks byte-identity).
    pub timing: bool,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            methods: EstimatorKind::ALL.to_vec(),
            copula: CopulaKind::Dirichlet,
            categories: 3,
            dims: 3,
            samples: 3,
            alphas: vec![1.0, 10.0, 100.0, 1000.0],
            trials: 100,
            inner: 10_000,
            seed: 0,
            clip: Some(DEFAULT_CLIP),
            budget: OrderingBudget::Auto,
            timing: false,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.categories < 2 {
            return invalid("categories must be >= 2");
        }
        if self.dims < 1 {
            return invalid("dims must be >= 1");
        }
        if self.samples < 2 {
            return invalid("samples must be >= 2");
        }
        if self.trials < 1 {
            return invalid("trials must be >= 1");
        }
        if self.inner < 2 {
            return invalid("inner draws must be >= 2");
        }
        if self.methods.is_empty() {
            return invalid("no methods selected");
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return invalid("alpha values must be positive");
        }
        if self.methods.contains(&EstimatorKind::CarmsInverseCdf) && self.copula != CopulaKind::Dirichlet {
            return Err(Error::UnsupportedPath("carms-i requires the dirichlet copula".into()));
        }
        Ok(())
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig { n_samples: self.samples, copula: self.copula, clip: self.clip, budget: self.budget }
    }
}

/// One `(trial, alpha, method)` variance estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyRecord {
    pub method: String,
    pub copula: String,
    pub categories: usize,
    pub dims: usize,
    pub samples: usize,
    pub alpha: f64,
    pub trial: usize,
    pub seed: u64,
    pub clip: String,
    pub orderings: String,
    pub inner: usize,
    /// Per-coordinate gradient variance, row-major `D x C`.
    pub variances: Vec<f64>,
    pub var_sum: f64,
    pub var_mean: f64,
    pub log_var_sum: f64,
    pub log_var_mean: f64,
    pub clip_rate: f64,
    pub clipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl CsvRecord for ToyRecord {
    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "method", "copula", "categories", "dims", "samples", "alpha", "trial", "seed", "clip",
            "orderings", "inner",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for d in 0..self.dims {
            for c in 0..self.categories {
                h.push(format!("var_d{}_c{}", d + 1, c + 1));
            }
        }
        h.extend(
            ["var_sum", "var_mean", "log_var_sum", "log_var_mean", "clip_rate", "clipped"]
                .iter()
                .map(|s| s.to_string()),
        );
        if self.elapsed_ms.is_some() {
            h.push("elapsed_ms".into());
        }
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.method.clone(),
            self.copula.clone(),
            self.categories.to_string(),
            self.dims.to_string(),
            self.samples.to_string(),
            fmt_float(self.alpha),
            self.trial.to_string(),
            self.seed.to_string(),
            self.clip.clone(),
            self.orderings.clone(),
            self.inner.to_string(),
        ];
        f.extend(self.variances.iter().map(|v| fmt_float(*v)));
        f.extend([
            fmt_float(self.var_sum),
            fmt_float(self.var_mean),
            fmt_float(self.log_var_sum),
            fmt_float(self.log_var_mean),
            fmt_float(self.clip_rate),
            self.clipped.to_string(),
        ]);
        if let Some(ms) = self.elapsed_ms {
            f.push(fmt_float(ms));
        }
        f
    }
}

/// Runs every `(alpha, trial)` job, in parallel where enabled, and returns
/// records ordered by alpha, then trial, then method.
pub fn run_toy(config: &ToyConfig) -> Result<Vec<ToyRecord>> {
    config.validate()?;
    let jobs = config.alphas.len() * config.trials;
    let per_job = map_indexed(jobs, |job| run_job(config, job / config.trials, job % config.trials));
    let mut out = Vec::with_capacity(jobs * config.methods.len());
    for records in per_job {
        out.extend(records?);
    }
    Ok(out)
}

fn run_job(config: &ToyConfig, alpha_idx: usize, trial: usize) -> Result<Vec<ToyRecord>> {
    let alpha = config.alphas[alpha_idx];
    let mut prob_rng = stream_rng(config.seed, stream_id(TAG_PROBS, alpha_idx as u32, trial as u32));
    let probs = (0..config.dims)
        .map(|_| sample_dirichlet_probs(config.categories, alpha, &mut prob_rng))
        .collect::<Result<Vec<_>>>()?;
    let sampler = config.sampler();

    config
        .methods
        .iter()
        .map(|&method| {
            let start = config.timing.then(Instant::now);
            let mut rng = stream_rng(config.seed, stream_id(TAG_INNER, alpha_idx as u32, trial as u32));
            let draws = (0..config.inner)
                .map(|_| sampled_estimate(method, &sampler, &probs, toy_value, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let moments = summarize(draws.iter().map(|d| (&d.estimate, d.clipped)), config.inner);
            let variances = moments.variance.as_slice().to_vec();
            let var_sum: f64 = variances.iter().sum();
            let var_mean = var_sum / variances.len() as f64;
            Ok(ToyRecord {
                method: method.name().to_string(),
                copula: config.copula.name().to_string(),
                categories: config.categories,
                dims: config.dims,
                samples: config.samples,
                alpha,
                trial,
                seed: config.seed,
                clip: clip_label(config.clip),
                orderings: budget_label(config.budget),
                inner: config.inner,
                variances,
                var_sum,
                var_mean,
                log_var_sum: var_sum.ln(),
                log_var_mean: var_mean.ln(),
                clip_rate: moments.clip_rate,
                clipped: moments.clip_rate > 0.0,
                elapsed_ms: start.map(|s| s.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}
