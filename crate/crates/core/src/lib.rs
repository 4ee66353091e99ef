//! Estimation for the weighted exponential distribution under Type-II
//! hybrid censoring: EM maximum likelihood, observed Fisher information,
//! Lindley and Gibbs Bayes estimators, and a Monte Carlo study harness.

pub mod censoring;
pub mod datasets;
pub mod dist;
pub mod em;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod gibbs;
pub mod harness;
pub mod likelihood;
pub mod lindley;
pub mod numeric;
pub mod quad;
pub mod rng;

pub use censoring::{CensoredData, CensoringCase, HybridScheme, TiePolicy};
pub use dist::WeParams;
pub use estimator::{Estimate, Estimator, EstimatorRegistry, FitContext, MethodSettings};
pub use error::{Error, Result};
