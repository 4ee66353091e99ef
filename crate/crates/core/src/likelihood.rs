//! Observed-data log-likelihood and score in the `(α, β)` parametrization.
//!
//! With `S = Σxᵢ + (n - r)c` the log-likelihood is, up to the constant
//! `ln(n!/(n - r)!)`,
//!
//! ```text
//! l(α, β) = r ln(α+1) - (n+r) ln α + r ln β - βS/α
//!           + Σ ln(1 - e^{-βxᵢ}) + (n-r) ln(α + 1 - e^{-βc})
//! ```
//!
//! The same expression covers all three censoring cases.

use serde::{Deserialize, Serialize};

use crate::censoring::CensoredData;
use crate::error::{Error, Result};
use crate::numeric::{ln_one_minus_exp_neg, surv_factor, x_over_expm1};

/// Gradient of the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub d_alpha: f64,
    pub d_beta: f64,
}

pub(crate) fn check_params(alpha: f64, beta: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha and beta must be finite and > 0, got alpha = {alpha}, beta = {beta}"
        )))
    }
}

fn check_times(data: &CensoredData) -> Result<()> {
    match data.times().iter().find(|&&x| !(x > 0.0)) {
        Some(x) => Err(Error::InvalidData(format!("lifetime {x} is not positive"))),
        None => Ok(()),
    }
}

pub fn log_likelihood(alpha: f64, beta: f64, data: &CensoredData) -> Result<f64> {
    check_params(alpha, beta)?;
    check_times(data)?;
    let n = data.n() as f64;
    let r = data.r() as f64;
    let m = data.n_censored() as f64;
    let c = data.c();
    let mut l = r * alpha.ln_1p() - (n + r) * alpha.ln() + r * beta.ln() - beta / alpha * data.total_time_on_test();
    l += data.times().iter().map(|&x| ln_one_minus_exp_neg(beta * x)).sum::<f64>();
    if m > 0.0 {
        l += m * surv_factor(alpha, beta, c).ln();
    }
    Ok(l)
}

pub fn score(alpha: f64, beta: f64, data: &CensoredData) -> Result<ScoreVector> {
    check_params(alpha, beta)?;
    check_times(data)?;
    let n = data.n() as f64;
    let r = data.r() as f64;
    let m = data.n_censored() as f64;
    let c = data.c();
    let s = data.total_time_on_test();
    let mut d_alpha = r / (alpha + 1.0) - (n + r) / alpha + beta / (alpha * alpha) * s;
    let mut d_beta = r / beta - s / alpha + data.times().iter().map(|&x| x_over_expm1(beta, x)).sum::<f64>();
    if m > 0.0 {
        let e = (-beta * c).exp();
        let d = surv_factor(alpha, beta, c);
        d_alpha += m / d;
        d_beta += m * c * e / d;
    }
    Ok(ScoreVector { d_alpha, d_beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{generate_censored, HybridScheme, TiePolicy};
    use crate::dist::WeParams;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn sim(seed: u64, n: usize, quota: usize, t: f64) -> CensoredData {
        let we = WeParams::new(2.5, 3.0).unwrap();
        generate_censored(&we, HybridScheme::new(n, quota, t).unwrap(), &mut stream_rng(seed, 0)).unwrap()
    }

    // ln of the censored likelihood written as a product of densities and survivals
    fn direct(alpha: f64, beta: f64, d: &CensoredData) -> f64 {
        let we = WeParams::from_alpha_beta(alpha, beta).unwrap();
        let dens: f64 = d.times().iter().map(|&x| we.pdf(x).unwrap().ln()).sum();
        dens + d.n_censored() as f64 * we.sf(d.c()).unwrap().ln()
    }

    #[test]
    fn matches_direct_product() {
        let d = sim(1, 5, 3, 0.4);
        let mut rng = stream_rng(2, 0);
        for _ in 0..20 {
            let a = rng.random_range(0.2..6.0);
            let b = rng.random_range(0.5..20.0);
            let got = log_likelihood(a, b, &d).unwrap();
            assert!((got - direct(a, b, &d)).abs() < 1e-10, "{got} vs {}", direct(a, b, &d));
        }
    }

    #[test]
    fn complete_data_has_no_censored_terms() {
        let d = sim(3, 30, 10, 1e6);
        assert_eq!(d.n_censored(), 0);
        let (a, b) = (2.0, 5.0);
        let complete: f64 = d
            .times()
            .iter()
            .map(|&x| WeParams::from_alpha_beta(a, b).unwrap().ln_pdf(x).unwrap())
            .sum();
        assert!((log_likelihood(a, b, &d).unwrap() - complete).abs() < 1e-9);
        let s = score(a, b, &d).unwrap();
        let r = d.r() as f64;
        let sum: f64 = d.times().iter().sum();
        let reduced = r / b - sum / a + d.times().iter().map(|&x| x * (-b * x).exp() / (1.0 - (-b * x).exp())).sum::<f64>();
        assert!((s.d_beta - reduced).abs() < 1e-9 * reduced.abs().max(1.0));
    }

    #[test]
    fn score_matches_finite_differences() {
        let mut rng = stream_rng(5, 0);
        for k in 0..50 {
            let d = sim(100 + k, 20, 12, rng.random_range(0.2..1.2));
            let a = rng.random_range(0.3..8.0);
            let b = rng.random_range(1.0..30.0);
            let s = score(a, b, &d).unwrap();
            let (ha, hb) = (1e-6 * a, 1e-6 * b);
            let fa = (log_likelihood(a + ha, b, &d).unwrap() - log_likelihood(a - ha, b, &d).unwrap()) / (2.0 * ha);
            let fb = (log_likelihood(a, b + hb, &d).unwrap() - log_likelihood(a, b - hb, &d).unwrap()) / (2.0 * hb);
            let scale_a = s.d_alpha.abs().max(1.0);
            let scale_b = s.d_beta.abs().max(1.0);
            assert!((fa - s.d_alpha).abs() < 1e-4 * scale_a, "d_alpha {fa} vs {}", s.d_alpha);
            assert!((fb - s.d_beta).abs() < 1e-4 * scale_b, "d_beta {fb} vs {}", s.d_beta);
        }
    }

    #[test]
    fn continuous_across_a_case_boundary() {
        let full: Vec<f64> = vec![0.1, 0.25, 0.3, 0.45, 0.6, 0.8, 1.1, 1.5];
        let x = full[4];
        let below = HybridScheme::new(8, 2, x - 1e-9).unwrap();
        let above = HybridScheme::new(8, 2, x + 1e-9).unwrap();
        let lo = CensoredData::apply_scheme(&full, below, TiePolicy::Reject).unwrap();
        let hi = CensoredData::apply_scheme(&full, above, TiePolicy::Reject).unwrap();
        assert_eq!(hi.r(), lo.r() + 1);
        // the extra failure at x contributes a density, not a survival, so
        // compare likelihood contributions through P(X in [x - h, x + h])
        let (a, b) = (2.0, 4.0);
        let we = WeParams::from_alpha_beta(a, b).unwrap();
        let l_lo = log_likelihood(a, b, &lo).unwrap();
        let l_hi = log_likelihood(a, b, &hi).unwrap();
        let sf_ratio = (we.sf(x + 1e-9).unwrap() / we.sf(x - 1e-9).unwrap()).ln();
        // l_hi - l_lo = ln f(x) - ln S(x) + (n - r_hi) ln S(x+)/S(x-)
        let expect = we.ln_pdf(x).unwrap() - we.sf(x).unwrap().ln() + hi.n_censored() as f64 * sf_ratio;
        assert!((l_hi - l_lo - expect).abs() < 1e-6);
        // same r, T nudged: the value moves continuously
        let lo2 = CensoredData::apply_scheme(&full, HybridScheme::new(8, 2, x - 2e-9).unwrap(), TiePolicy::Reject).unwrap();
        assert!((log_likelihood(a, b, &lo2).unwrap() - l_lo).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = sim(1, 5, 3, 0.4);
        assert!(log_likelihood(0.0, 1.0, &d).is_err());
        assert!(score(1.0, f64::NAN, &d).is_err());
    }
}
