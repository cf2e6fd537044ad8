//! Unbiased score-function gradient estimators for categorical random
//! variables built on jointly antithetic samples.
//!
//! The crate is organised bottom-up:
//!
//! - [`copula`]: antithetic uniform vectors (Dirichlet and Gaussian copulas)
//!   and the analytic Dirichlet-copula CDFs.
//! - [`categorical`]: inverse-CDF and Gumbel-max conversion of copula draws
//!   into one-hot samples, plus the importance-ratio matrix.
//! - [`estimators`]: LOORF, CARTS, CARMS (pairwise and matrix forms),
//!   multivariate CARMS, binary ARMS and plain REINFORCE.
//! - [`oracle`]: exact gradients and exact estimator moments by enumeration,
//!   and a Monte Carlo moment harness for paths without a closed-form law.
//! - [`experiments`]: the toy variance study, correlation matrices and the
//!   self-check suite behind the `carms` binary.
//!
//! Categories and sample indices are zero-based throughout.

pub mod categorical;
pub mod copula;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod method;
pub mod oracle;
pub mod par;

pub use categorical::{
    AntitheticSample, BivariatePmf, Boundaries, OrderingBudget, Ordering, ProbVector, RatioMatrix,
    SampleMatrix,
};
pub use copula::{CopulaDraw, CopulaKind};
pub use error::{Error, Result};
pub use estimators::{FunctionValues, GradientEstimate, SampleTensor};
pub use method::{EstimatorKind, SamplerConfig};
pub use oracle::{ExactMoments, McMoments, TabulatedObjective};
