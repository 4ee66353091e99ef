//! Interchangeable estimation methods selected by name.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::censoring::CensoredData;
use crate::em::{em_fit, EmConfig, EmResult, EmStop};
use crate::error::{Error, Result};
use crate::fisher::{asymptotic_ci, delta_ci_alpha, observed_info, ConfidenceInterval};
use crate::gibbs::{gibbs_chain, summarize, GibbsConfig, GibbsSummary};
use crate::lindley::{lindley_estimate, GammaPriors, LindleyTerms};
use crate::rng::stream_rng;

/// Data plus a lazily computed EM fit shared by all methods applied to it.
pub struct FitContext<'a> {
    pub data: &'a CensoredData,
    pub em: EmConfig,
    /// Seed and stream for stochastic methods.
    pub seed: u64,
    pub stream: u64,
    mle: OnceLock<Result<EmResult>>,
}

impl<'a> FitContext<'a> {
    pub fn new(data: &'a CensoredData, em: EmConfig, seed: u64, stream: u64) -> Self {
        Self { data, em, seed, stream, mle: OnceLock::new() }
    }

    pub fn mle(&self) -> Result<&EmResult> {
        self.mle.get_or_init(|| em_fit(self.data, &self.em)).as_ref().map_err(Clone::clone)
    }

    /// The EM fit, or an error if it did not converge.
    pub fn converged_mle(&self) -> Result<&EmResult> {
        let fit = self.mle()?;
        if fit.converged {
            Ok(fit)
        } else {
            Err(Error::Estimation(format!(
                "EM did not converge ({:?} after {} iterations, alpha = {:e})",
                fit.stop, fit.iterations, fit.alpha_hat
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub method: String,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub alpha_interval: Option<ConfidenceInterval>,
    pub beta_interval: Option<ConfidenceInterval>,
    pub lambda_interval: Option<ConfidenceInterval>,
    pub warnings: Vec<String>,
    pub details: Details,
}

/// Method-specific diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Details {
    Mle { iterations: usize, stop: EmStop, log_likelihood: f64 },
    Lindley { terms: LindleyTerms },
    Gibbs { init: (f64, f64), summary: GibbsSummary },
}

pub trait Estimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, ctx: &FitContext<'_>) -> Result<Estimate>;
}

/// EM estimate with asymptotic intervals from the observed information.
pub struct MleEstimator {
    pub level: f64,
}

impl Estimator for MleEstimator {
    fn name(&self) -> &'static str {
        "mle"
    }

    fn estimate(&self, ctx: &FitContext<'_>) -> Result<Estimate> {
        let fit = ctx.converged_mle()?;
        let mut est = Estimate {
            method: self.name().into(),
            alpha: fit.alpha_hat,
            beta: fit.beta_hat,
            lambda: fit.lambda_hat,
            alpha_interval: None,
            beta_interval: None,
            lambda_interval: None,
            warnings: Vec::new(),
            details: Details::Mle {
                iterations: fit.iterations,
                stop: fit.stop,
                log_likelihood: *fit.loglik_trace.last().unwrap_or(&f64::NAN),
            },
        };
        let info = observed_info(fit.lambda_hat, fit.beta_hat, ctx.data)?;
        if info.is_positive_definite() {
            let (ci_l, ci_b) = asymptotic_ci(fit.lambda_hat, fit.beta_hat, &info, self.level)?;
            est.lambda_interval = Some(ci_l);
            est.beta_interval = Some(ci_b);
            est.alpha_interval = Some(delta_ci_alpha(fit.lambda_hat, fit.beta_hat, &info, self.level)?);
        } else {
            est.warnings.push("observed information is not positive definite; no intervals".into());
        }
        Ok(est)
    }
}

pub struct LindleyEstimator {
    pub priors: GammaPriors,
}

impl Estimator for LindleyEstimator {
    fn name(&self) -> &'static str {
        "lindley"
    }

    fn estimate(&self, ctx: &FitContext<'_>) -> Result<Estimate> {
        let fit = ctx.converged_mle()?;
        let l = lindley_estimate(fit.alpha_hat, fit.beta_hat, ctx.data, &self.priors)?;
        let mut warnings = Vec::new();
        if l.negative {
            warnings.push("Lindley estimate is not positive".into());
        }
        Ok(Estimate {
            method: self.name().into(),
            alpha: l.alpha,
            beta: l.beta,
            lambda: l.lambda,
            alpha_interval: None,
            beta_interval: None,
            lambda_interval: None,
            warnings,
            details: Details::Lindley { terms: l.terms },
        })
    }
}

/// Posterior means and HPD intervals from a Gibbs chain started at the EM
/// estimate. The chain runs on stream `ctx.stream` of seed `ctx.seed`.
pub struct GibbsEstimator {
    pub priors: GammaPriors,
    pub config: GibbsConfig,
    pub level: f64,
}

impl Estimator for GibbsEstimator {
    fn name(&self) -> &'static str {
        "gibbs"
    }

    fn estimate(&self, ctx: &FitContext<'_>) -> Result<Estimate> {
        let mut warnings = Vec::new();
        let init = match self.config.init {
            Some(p) => p,
            None => {
                let fit = ctx.mle()?;
                if !fit.converged {
                    warnings.push(format!("chain started at an unconverged EM iterate ({:?})", fit.stop));
                }
                (fit.alpha_hat, fit.beta_hat)
            }
        };
        let chain = gibbs_chain(ctx.data, &self.priors, &self.config, init, &mut stream_rng(ctx.seed, ctx.stream))?;
        let s = summarize(&chain, self.config.burn_in, self.level)?;
        Ok(Estimate {
            method: self.name().into(),
            alpha: s.means.alpha,
            beta: s.means.beta,
            lambda: s.means.lambda,
            alpha_interval: Some(s.hpd_alpha),
            beta_interval: Some(s.hpd_beta),
            lambda_interval: Some(s.hpd_lambda),
            warnings,
            details: Details::Gibbs { init, summary: s },
        })
    }
}

/// Settings used to build the default methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub priors: GammaPriors,
    pub level: f64,
    pub gibbs: GibbsConfig,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self { priors: GammaPriors::default(), level: 0.95, gibbs: GibbsConfig::default() }
    }
}

#[derive(Default)]
pub struct EstimatorRegistry {
    entries: Vec<Box<dyn Estimator>>,
}

impl EstimatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `mle`, `lindley` and `gibbs`.
    pub fn with_defaults(settings: &MethodSettings) -> Self {
        let mut r = Self::new();
        r.register(Box::new(MleEstimator { level: settings.level }));
        r.register(Box::new(LindleyEstimator { priors: settings.priors }));
        r.register(Box::new(GibbsEstimator {
            priors: settings.priors,
            config: settings.gibbs.clone(),
            level: settings.level,
        }));
        r
    }

    /// Adds an estimator, replacing any with the same name.
    pub fn register(&mut self, e: Box<dyn Estimator>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Estimator> {
        self.entries
            .iter()
            .find(|e| e.name().eq_ignore_ascii_case(name))
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownName { kind: "estimator", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}
