//! The two-parameter weighted exponential (WE) lifetime distribution.
//!
//! Density in the shape/rate form
//!
//! ```text
//! f(x; α, λ) = (α + 1)/α · λ e^{-λx} (1 - e^{-αλx}),   x > 0
//! ```
//!
//! and, with `β = αλ`, in the shape/β form used by the censored likelihood
//!
//! ```text
//! f(x; α, β) = (α + 1)/α² · β e^{-βx/α} (1 - e^{-βx}).
//! ```
//!
//! A WE(α, λ) variate is the sum of independent Exp(λ) and Exp(λ(α + 1))
//! variates, which gives an exact sampler.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ln_one_minus_exp_neg;

const PARAM_MIN: f64 = 1e-12;
const PARAM_MAX: f64 = 1e12;

/// WE parameters, stored in both parametrizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeParams {
    alpha: f64,
    lambda: f64,
    beta: f64,
}

fn check_range(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > PARAM_MIN && v < PARAM_MAX {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {v} outside ({PARAM_MIN:e}, {PARAM_MAX:e})"
        )))
    }
}

impl WeParams {
    /// From shape `alpha` and rate `lambda`.
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        check_range("alpha", alpha)?;
        check_range("lambda", lambda)?;
        let beta = alpha * lambda;
        check_range("beta", beta)?;
        Ok(Self { alpha, lambda, beta })
    }

    /// From shape `alpha` and `beta = alpha * lambda`.
    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        check_range("alpha", alpha)?;
        check_range("beta", beta)?;
        let lambda = beta / alpha;
        check_range("lambda", lambda)?;
        Ok(Self { alpha, lambda, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn check_x(x: f64) -> Result<()> {
        if x.is_finite() && x >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("lifetime must be finite and >= 0, got {x}")))
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let (a, l) = (self.alpha, self.lambda);
        Ok((a + 1.0) / a * l * (-l * x).exp() * -(-self.beta * x).exp_m1())
    }

    /// Density evaluated through the (α, β) form; agrees with [`pdf`](Self::pdf).
    pub fn pdf_alpha_beta(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let (a, b) = (self.alpha, self.beta);
        Ok((a + 1.0) / (a * a) * b * (-b * x / a).exp() * -(-b * x).exp_m1())
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        if x == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let (a, l) = (self.alpha, self.lambda);
        Ok(((a + 1.0) / a).ln() + l.ln() - l * x + ln_one_minus_exp_neg(self.beta * x))
    }

    /// Survival function `1 - F(x) = e^{-λx}(α + 1 - e^{-βx})/α`.
    pub fn sf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        let a = self.alpha;
        Ok((-self.lambda * x).exp() * (1.0 + -(-self.beta * x).exp_m1() / a))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check_x(x)?;
        // 1 - e^{-λx} - e^{-λx}(1 - e^{-βx})/α, written to keep small-x accuracy
        let e_l = (-self.lambda * x).exp();
        let p = -(-self.lambda * x).exp_m1() - e_l * -(-self.beta * x).exp_m1() / self.alpha;
        Ok(p.clamp(0.0, 1.0))
    }

    /// Inverse cdf by bracketed bisection with a Newton polish.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
        }
        let cdf = |x: f64| self.cdf(x).expect("x is finite and >= 0");
        let mut hi = 1.0 / self.lambda;
        while cdf(hi) <= p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-6 * hi {
                break;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..20 {
            let f = self.pdf(x)?;
            if f <= 0.0 {
                break;
            }
            let step = (cdf(x) - p) / f;
            let next = (x - step).clamp(lo, hi);
            if (next - x).abs() <= 1e-15 * x.max(f64::MIN_POSITIVE) {
                x = next;
                break;
            }
            x = next;
        }
        Ok(x)
    }

    /// Mean lifetime `(α + 2) / (λ(α + 1))`.
    pub fn mean(&self) -> f64 {
        (self.alpha + 2.0) / (self.lambda * (self.alpha + 1.0))
    }

    /// Draw one lifetime as Exp(λ) + Exp(λ(α + 1)).
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e1: f64 = Exp1.sample(rng);
        let e2: f64 = Exp1.sample(rng);
        e1 / self.lambda + e2 / (self.lambda * (self.alpha + 1.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}
