//! Desk-scale studies behind the `carms` binary: the toy variance
//! comparison, antithetic correlation matrices and the self-check suite.
//! Every run is a pure function of its configuration and seed.

pub mod correlation;
pub mod output;
pub mod selfcheck;
pub mod toy;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::categorical::{OrderingBudget, ProbVector};
use crate::error::{invalid, Result};

/// Draws `p ~ Dir(alpha 1_c)` by normalising independent Gamma variates.
pub fn sample_dirichlet_probs<R: Rng + ?Sized>(c: usize, alpha: f64, rng: &mut R) -> Result<ProbVector> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return invalid(format!("dirichlet concentration must be positive, got {alpha}"));
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    loop {
        let g: Vec<f64> = (0..c).map(|_| gamma.sample(rng)).collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 {
            return ProbVector::new(g.into_iter().map(|x| x / total).collect());
        }
    }
}

/// Text form of an ordering budget, as accepted by `--orderings`.
pub fn budget_label(budget: OrderingBudget) -> String {
    match budget {
        OrderingBudget::All => "all".to_string(),
        OrderingBudget::Auto => "auto".to_string(),
        OrderingBudget::Extra(k) => k.to_string(),
    }
}

pub fn parse_budget(s: &str) -> Result<OrderingBudget> {
    match s {
        "all" => Ok(OrderingBudget::All),
        "auto" => Ok(OrderingBudget::Auto),
        other => other
            .parse::<usize>()
            .map(OrderingBudget::Extra)
            .or_else(|_| invalid(format!("orderings must be 'all', 'auto' or a count, got '{other}'"))),
    }
}

pub fn clip_label(clip: Option<f64>) -> String {
    clip.map_or_else(|| "none".to_string(), |c| c.to_string())
}

pub fn parse_clip(s: &str) -> Result<Option<f64>> {
    if s == "none" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(c) if c > 0.0 && c.is_finite() => Ok(Some(c)),
        _ => invalid(format!("clip must be a positive number or 'none', got '{s}'")),
    }
}
