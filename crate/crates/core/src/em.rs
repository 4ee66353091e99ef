//! EM estimation of `(α, β)` from hybrid censored data.
//!
//! The `n - r` unobserved lifetimes are treated as missing. Given the current
//! iterate, each is distributed as a WE variate conditioned on `Z > c`. In
//! `v = β(z - c)/α` the conditional density is
//!
//! ```text
//! g(v) = (α + 1) e^{-v} (1 - e^{-βc - αv}) / (α + 1 - e^{-βc}),   v > 0
//! ```
//!
//! so every conditional expectation depends on `(c, β)` only through `βc`.
//!
//! The M-step maximizes the pseudo log-likelihood
//!
//! ```text
//! Q(α, β) = n ln(α+1) - 2n ln α + n ln β - βB/α + Σ ln(1 - e^{-βxᵢ})
//!           + (n - r) E_k[ln(1 - e^{-βZ}) | Z > c],       B = Σxᵢ + (n-r)A
//! ```
//!
//! For fixed β the α-maximizer is explicit ([`alpha_of_beta`]); β solves the
//! fixed point `β = h(β)`.

use serde::{Deserialize, Serialize};

use crate::censoring::CensoredData;
use crate::dist::WeParams;
use crate::error::{Error, Result};
use crate::likelihood::{check_params, log_likelihood};
use crate::numeric::{illinois, ln_one_minus_exp_neg, surv_factor, x_over_expm1};
use crate::quad::{integrate_to_inf, QuadOptions};

/// `E[Z | Z > c]` for `Z ~ WE` in the `(α, β)` form.
pub fn cond_mean_a(c: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_params(alpha, beta)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("censor point must be finite and >= 0, got {c}")));
    }
    let bc = beta * c;
    let e = (-bc).exp();
    let a1 = alpha + 1.0;
    let num = a1 * (bc + alpha) - e * (bc * a1 + alpha) / a1;
    Ok(num / (beta * surv_factor(alpha, beta, c)))
}

/// Tail density `g(v)` of the rescaled excess `v = β(Z - c)/α`.
fn tail_density(v: f64, bc: f64, alpha: f64) -> f64 {
    let a1 = alpha + 1.0;
    a1 * (-v).exp() * -(-(bc + alpha * v)).exp_m1() / (a1 - (-bc).exp())
}

/// `E[ln(1 - e^{-βZ}) | Z > c]` by adaptive quadrature.
pub fn cond_log_b(c: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_params(alpha, beta)?;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("censor point must be finite and >= 0, got {c}")));
    }
    let bc = beta * c;
    let res = integrate_to_inf(
        |v| {
            let g = tail_density(v, bc, alpha);
            if g == 0.0 {
                0.0
            } else {
                ln_one_minus_exp_neg(bc + alpha * v) * g
            }
        },
        0.0,
        QuadOptions::abs(1e-9),
    )?;
    Ok(res.value)
}

/// Maximizer in α of `n ln(α+1) - 2n ln α - βB/α` for fixed β.
pub fn alpha_of_beta(beta: f64, b_stat: f64, n: usize) -> f64 {
    let n = n as f64;
    let bb = beta * b_stat;
    let q = bb - 2.0 * n;
    let disc = (q * q + 4.0 * n * bb).sqrt();
    if q >= 0.0 {
        (disc + q) / (2.0 * n)
    } else {
        2.0 * bb / (disc - q)
    }
}

/// Fixed-node quadrature for expectations over the conditional tail under a
/// frozen parameter value. Nodes are absolute times `z`.
#[derive(Debug, Clone)]
pub struct TailRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const TAIL_PANEL_EDGES: usize = 22;

impl TailRule {
    pub fn new(c: f64, alpha: f64, beta: f64) -> Result<Self> {
        check_params(alpha, beta)?;
        let bc = beta * c;
        let scale = alpha / beta;
        // panels [0, 1e-4·α⁻¹·2^k] refine the (1 - e^{-αv}) onset, then grow to v = 80
        let first = 1e-4 / alpha.max(1.0);
        let mut edges = vec![0.0];
        let mut e = first;
        while e < 80.0 && edges.len() < 200 {
            edges.push(e);
            e *= if edges.len() < TAIL_PANEL_EDGES { 2.0 } else { 1.5 };
        }
        edges.push(80.0);
        let mut nodes = Vec::with_capacity(15 * edges.len());
        let mut weights = Vec::with_capacity(15 * edges.len());
        for w in edges.windows(2) {
            for (x, wt) in crate::quad::gk15_nodes(w[0], w[1]) {
                nodes.push(c + scale * x);
                weights.push(wt * tail_density(x, bc, alpha));
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { nodes, weights })
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

/// How the M-step treats the conditional expectation of `ln(1 - e^{-βZ})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MStepRule {
    /// Maximize the full pseudo log-likelihood, including the β-dependence
    /// of the tail term. This is a true EM step.
    #[default]
    Exact,
    /// Drop the tail term from the β-equation and use `A` only.
    MeanOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub param_tol: f64,
    pub max_outer_iter: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Starting `(α, β)`; `None` uses `(1, r/Σxᵢ)`.
    pub init: Option<(f64, f64)>,
    pub m_step: MStepRule,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            param_tol: 1e-7,
            max_outer_iter: 500,
            fp_tol: 1e-11,
            fp_max_iter: 2000,
            init: None,
            m_step: MStepRule::Exact,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.param_tol > 0.0 && self.fp_tol > 0.0) || self.max_outer_iter == 0 || self.fp_max_iter == 0 {
            return Err(Error::Config("EM tolerances must be > 0 and iteration caps >= 1".into()));
        }
        if let Some((a, b)) = self.init {
            check_params(a, b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub lambda_hat: f64,
    pub iterations: usize,
    /// Observed-data log-likelihood at the start and after every outer step.
    pub loglik_trace: Vec<f64>,
    /// Maximized pseudo log-likelihood of every M-step.
    pub pseudo_loglik_trace: Vec<f64>,
    pub converged: bool,
    pub stop: EmStop,
}

impl EmResult {
    pub fn params(&self) -> Result<WeParams> {
        WeParams::from_alpha_beta(self.alpha_hat, self.beta_hat)
    }
}

/// E-step summary for one outer iteration.
#[derive(Debug, Clone)]
pub struct EStep {
    /// `E[Z | Z > c]` under the current iterate.
    pub a: f64,
    /// `Σxᵢ + (n - r)A`.
    pub b_stat: f64,
    /// Tail quadrature under the current iterate; `None` without censoring.
    pub tail: Option<TailRule>,
}

impl EStep {
    pub fn new(data: &CensoredData, alpha: f64, beta: f64) -> Result<Self> {
        if data.n_censored() == 0 {
            return Ok(Self {
                a: 0.0,
                b_stat: data.sum_times(),
                tail: None,
            });
        }
        let a = cond_mean_a(data.c(), alpha, beta)?;
        Ok(Self {
            a,
            b_stat: data.sum_times() + data.n_censored() as f64 * a,
            tail: Some(TailRule::new(data.c(), alpha, beta)?),
        })
    }
}

/// Pseudo log-likelihood `Q(α, β)` for a fixed E-step. With `MeanOnly` the
/// tail term is omitted.
pub fn pseudo_log_likelihood(alpha: f64, beta: f64, data: &CensoredData, e: &EStep, rule: MStepRule) -> f64 {
    let n = data.n() as f64;
    let mut q = n * alpha.ln_1p() - 2.0 * n * alpha.ln() + n * beta.ln() - beta * e.b_stat / alpha
        + data.times().iter().map(|&x| ln_one_minus_exp_neg(beta * x)).sum::<f64>();
    if let (MStepRule::Exact, Some(tail)) = (rule, &e.tail) {
        q += data.n_censored() as f64 * tail.expect(|z| ln_one_minus_exp_neg(beta * z));
    }
    q
}

fn h_map(beta: f64, data: &CensoredData, e: &EStep, rule: MStepRule) -> (f64, f64) {
    let n = data.n();
    let alpha = alpha_of_beta(beta, e.b_stat, n);
    let mut denom = e.b_stat / alpha - data.times().iter().map(|&x| x_over_expm1(beta, x)).sum::<f64>();
    if let (MStepRule::Exact, Some(tail)) = (rule, &e.tail) {
        denom -= data.n_censored() as f64 * tail.expect(|z| x_over_expm1(beta, z));
    }
    (n as f64 / denom, alpha)
}

/// Solve the M-step fixed point `β = h(β)` starting from `beta0`.
///
/// Fixed points of `h` are the stationary points of the profile
/// `β ↦ Q(α̂(β), β)`, whose derivative is `n/β - n/h(β)`. The root is
/// bracketed by stepping geometrically uphill from `beta0` and then refined
/// in `ln β`.
pub fn m_step(data: &CensoredData, e: &EStep, beta0: f64, config: &EmConfig) -> Result<(f64, f64)> {
    if !(e.b_stat > 0.0) {
        return Err(Error::InvalidData(format!("time statistic must be > 0, got {}", e.b_stat)));
    }
    if !(beta0.is_finite() && beta0 > 0.0) {
        return Err(Error::InvalidParameter(format!("starting beta must be > 0, got {beta0}")));
    }
    let n = data.n() as f64;
    let rule = config.m_step;
    // β times the profile slope: n - β·denom(β) = n(1 - β/h(β))
    let slope = |t: f64| {
        let beta = t.exp();
        let (h, _) = h_map(beta, data, e, rule);
        n * (1.0 - beta / h)
    };
    let profile = |t: f64| {
        let beta = t.exp();
        pseudo_log_likelihood(alpha_of_beta(beta, e.b_stat, data.n()), beta, data, e, rule)
    };
    // |slope| <= n·fp_tol/4 keeps |h - β| < fp_tol·β
    let ftol = 0.25 * n * config.fp_tol;
    let refine = |lo: f64, hi: f64| illinois(slope, lo, hi, 0.0, ftol, config.fp_max_iter).map(|(t, _)| t);

    let t0 = beta0.ln();
    let s0 = slope(t0);
    let mut t_star = None;
    if s0.abs() <= ftol {
        t_star = Some(t0);
    } else if s0.is_finite() {
        // walk uphill until the slope changes sign
        let dir = s0.signum();
        let (mut near, mut step) = (t0, 0.1);
        while (near - t0).abs() < WALK_SPAN {
            let far = near + dir * step;
            let s = slope(far);
            if !s.is_finite() {
                break;
            }
            if s * dir <= 0.0 {
                t_star = refine(near.min(far), near.max(far));
                break;
            }
            near = far;
            step *= 2.0;
        }
    }
    if t_star.is_none() {
        // no local maximum uphill of the start: take the best interior one on a grid
        let grid: Vec<(f64, f64)> = (-120..=120)
            .map(|k| {
                let t = t0 + 0.25 * k as f64;
                (t, slope(t))
            })
            .collect();
        t_star = grid
            .windows(2)
            .filter(|w| w[0].1 > 0.0 && w[1].1 <= 0.0)
            .filter_map(|w| refine(w[0].0, w[1].0))
            .map(|t| (t, profile(t)))
            .filter(|(_, q)| q.is_finite())
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(t, _)| t);
    }
    let fail = |beta: f64| {
        let (h, _) = h_map(beta, data, e, rule);
        Error::FixedPoint {
            iterations: config.fp_max_iter,
            beta,
            residual: h - beta,
        }
    };
    let beta = t_star.ok_or_else(|| fail(beta0))?.exp();
    let (h, alpha) = h_map(beta, data, e, rule);
    if !((h - beta).abs() < config.fp_tol * beta) {
        return Err(fail(beta));
    }
    Ok((alpha, beta))
}

const WALK_SPAN: f64 = 40.0;

/// Shape values beyond these bounds are treated as the likelihood sup lying
/// on the boundary of the parameter space.
pub const ALPHA_FLOOR: f64 = 1e-4;
pub const ALPHA_CEIL: f64 = 1e4;

/// Why [`em_fit`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmStop {
    Converged,
    MaxIterations,
    /// The shape iterate left `[ALPHA_FLOOR, ALPHA_CEIL]`.
    Boundary,
    /// The M-step fixed point could not be located.
    MStepFailed,
}

pub fn em_fit(data: &CensoredData, config: &EmConfig) -> Result<EmResult> {
    config.validate()?;
    if data.r() < 2 {
        return Err(Error::InvalidData(format!("EM needs at least 2 failures, got {}", data.r())));
    }
    let (mut alpha, mut beta) = config.init.unwrap_or((1.0, data.r() as f64 / data.sum_times()));
    let mut loglik_trace = vec![log_likelihood(alpha, beta, data)?];
    let mut pseudo_loglik_trace = Vec::new();
    let mut stop = EmStop::MaxIterations;
    let mut iterations = 0;
    while iterations < config.max_outer_iter {
        iterations += 1;
        let e = EStep::new(data, alpha, beta)?;
        let (a_new, b_new) = match m_step(data, &e, beta, config) {
            Ok(v) => v,
            Err(Error::FixedPoint { .. }) => {
                stop = EmStop::MStepFailed;
                break;
            }
            Err(err) => return Err(err),
        };
        pseudo_loglik_trace.push(pseudo_log_likelihood(a_new, b_new, data, &e, config.m_step));
        let change = ((a_new - alpha) / alpha).abs().max(((b_new - beta) / beta).abs());
        alpha = a_new;
        beta = b_new;
        if !(ALPHA_FLOOR..=ALPHA_CEIL).contains(&alpha) {
            stop = EmStop::Boundary;
            break;
        }
        loglik_trace.push(log_likelihood(alpha, beta, data)?);
        if change < config.param_tol {
            stop = EmStop::Converged;
            break;
        }
    }
    Ok(EmResult {
        alpha_hat: alpha,
        beta_hat: beta,
        lambda_hat: beta / alpha,
        iterations,
        loglik_trace,
        pseudo_loglik_trace,
        converged: stop == EmStop::Converged,
        stop,
    })
}
