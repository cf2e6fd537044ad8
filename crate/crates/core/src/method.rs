//! One stochastic gradient estimate per call, for each estimator/sampler
//! combination the experiments compare.

use rand::Rng;

use crate::categorical::{
    sample_antithetic_gumbel, sample_antithetic_inverse_cdf, sample_independent, InverseCdfConfig,
    OrderingBudget, ProbVector, RatioMatrix, SampleMatrix, DEFAULT_CLIP,
};
use crate::copula::CopulaKind;
use crate::error::{invalid, Result};
use crate::estimators::{carms_multivariate, loorf, FunctionValues, GradientEstimate, SampleTensor};

/// Estimator paired with the sampler it is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// LOORF on i.i.d. samples.
    Loorf,
    /// CARMS on inverse-CDF antithetic samples with the analytic ratios.
    CarmsInverseCdf,
    /// CARMS on Gumbel-max antithetic samples with empirical ratios.
    CarmsGumbel,
    /// Mean of `N` baseline-free REINFORCE terms on i.i.d. samples.
    Reinforce,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::CarmsInverseCdf,
        EstimatorKind::CarmsGumbel,
        EstimatorKind::Loorf,
        EstimatorKind::Reinforce,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Loorf => "loorf",
            EstimatorKind::CarmsInverseCdf => "carms-i",
            EstimatorKind::CarmsGumbel => "carms-g",
            EstimatorKind::Reinforce => "reinforce",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub copula: CopulaKind,
    pub clip: Option<f64>,
    pub budget: OrderingBudget,
}

impl SamplerConfig {
    pub fn new(n_samples: usize) -> Self {
        Self {
            n_samples,
            copula: CopulaKind::Dirichlet,
            clip: Some(DEFAULT_CLIP),
            budget: OrderingBudget::Auto,
        }
    }
}

/// One estimate and whether any ratio was clipped while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub estimate: GradientEstimate,
    pub clipped: bool,
}

/// Draws `N` joint samples over `probs.len()` independent dimensions,
/// evaluates `f` once per joint sample and returns the estimate.
pub fn sampled_estimate<R, F>(
    kind: EstimatorKind,
    config: &SamplerConfig,
    probs: &[ProbVector],
    f: F,
    rng: &mut R,
) -> Result<Draw>
where
    R: Rng + ?Sized,
    F: Fn(&[usize]) -> f64,
{
    let dims = probs.len();
    if dims == 0 {
        return invalid("need at least one dimension");
    }
    let n = config.n_samples;
    if n < 2 {
        return invalid(format!("need N >= 2 samples, got {n}"));
    }
    let mut samples: Vec<SampleMatrix> = Vec::with_capacity(dims);
    let mut ratios: Vec<RatioMatrix> = Vec::with_capacity(dims);
    let mut clipped = false;
    for p in probs {
        match kind {
            EstimatorKind::Loorf | EstimatorKind::Reinforce => {
                samples.push(sample_independent(n, p, rng)?);
            }
            EstimatorKind::CarmsInverseCdf => {
                let icdf = InverseCdfConfig { copula: config.copula, budget: config.budget, clip: config.clip };
                let s = sample_antithetic_inverse_cdf(n, p, &icdf, rng)?;
                clipped |= s.ratios.clipped();
                samples.push(s.samples);
                ratios.push(s.ratios);
            }
            EstimatorKind::CarmsGumbel => {
                let s = sample_antithetic_gumbel(n, p, config.copula, config.clip, rng)?;
                clipped |= s.ratios.clipped();
                samples.push(s.samples);
                ratios.push(s.ratios);
            }
        }
    }

    let mut assignment = vec![0usize; dims];
    let values: Vec<f64> = (0..n)
        .map(|k| {
            for (slot, s) in assignment.iter_mut().zip(&samples) {
                *slot = s.category(k);
            }
            f(&assignment)
        })
        .collect();
    let values = FunctionValues::new(values)?;

    let estimate = match kind {
        EstimatorKind::CarmsInverseCdf | EstimatorKind::CarmsGumbel => {
            let batch = SampleTensor { samples, ratios, values };
            carms_multivariate(&batch, probs)?
        }
        EstimatorKind::Loorf => {
            let rows = samples
                .iter()
                .zip(probs)
                .map(|(s, p)| loorf(&values, s, p).map(|g| g.row(0).to_vec()))
                .collect::<Result<Vec<_>>>()?;
            GradientEstimate::from_rows(rows)
        }
        EstimatorKind::Reinforce => {
            let c = probs[0].len();
            let mut out = GradientEstimate::zeros(dims, c);
            let scale = 1.0 / n as f64;
            for (d, (s, p)) in samples.iter().zip(probs).enumerate() {
                let row = out.row_mut(d);
                for (k, &fk) in values.as_slice().iter().enumerate() {
                    for (r, &pc) in row.iter_mut().zip(p.as_slice()) {
                        *r -= scale * fk * pc;
                    }
                    row[s.category(k)] += scale * fk;
                }
            }
            out
        }
    };
    Ok(Draw { estimate, clipped })
}
