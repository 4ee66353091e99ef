//! Lindley's approximation to squared-error Bayes estimators under
//! independent gamma priors `β ~ Gamma(w2, w1)`, `α ~ Gamma(w4, w3)`.
//!
//! For a smooth function `u(α, β)` the posterior mean is approximated by
//!
//! ```text
//! u + ½ Σᵢⱼ (uᵢⱼ + 2uᵢρⱼ) σᵢⱼ + ½ Σᵢⱼₖₗ lᵢⱼₖ σᵢⱼ σₖₗ uₗ
//! ```
//!
//! with all terms evaluated at the MLE, `σ = (-∇²l)⁻¹` and `ρ` the log-prior.

use serde::{Deserialize, Serialize};

use crate::censoring::CensoredData;
use crate::error::{Error, Result};
use crate::likelihood::check_params;
use crate::numeric::surv_factor;

/// Gamma prior hyperparameters: `w1`, `w2` rate and shape for β, `w3`, `w4`
/// rate and shape for α. All zero is the non-informative choice.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GammaPriors {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl GammaPriors {
    pub fn new(w1: f64, w2: f64, w3: f64, w4: f64) -> Result<Self> {
        let p = Self { w1, w2, w3, w4 };
        p.validate()?;
        Ok(p)
    }

    pub fn non_informative() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let ws = [self.w1, self.w2, self.w3, self.w4];
        if ws.iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("prior hyperparameters must be finite and >= 0, got {ws:?}")))
        }
    }

    /// `ln π(α, β)` up to a constant.
    pub fn ln_density(&self, alpha: f64, beta: f64) -> f64 {
        (self.w2 - 1.0) * beta.ln() - self.w1 * beta + (self.w4 - 1.0) * alpha.ln() - self.w3 * alpha
    }
}

/// Log-likelihood derivatives, prior gradient and inverse negative Hessian at
/// a point. Mixed third derivatives are symmetric, so
/// `l_aab = l_aba = l_baa` and `l_abb = l_bab = l_bba`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindleyTerms {
    pub l_aa: f64,
    pub l_ab: f64,
    pub l_bb: f64,
    pub l_aaa: f64,
    pub l_aab: f64,
    pub l_abb: f64,
    pub l_bbb: f64,
    pub rho_a: f64,
    pub rho_b: f64,
    pub s_aa: f64,
    pub s_ab: f64,
    pub s_bb: f64,
}

pub fn lindley_terms(alpha: f64, beta: f64, data: &CensoredData, priors: &GammaPriors) -> Result<LindleyTerms> {
    check_params(alpha, beta)?;
    priors.validate()?;
    let n = data.n() as f64;
    let r = data.r() as f64;
    let m = data.n_censored() as f64;
    let c = data.c();
    let s = data.total_time_on_test();
    let a1 = alpha + 1.0;

    let mut l_aa = -r / (a1 * a1) + (n + r) / (alpha * alpha) - 2.0 * beta * s / alpha.powi(3);
    let mut l_ab = s / (alpha * alpha);
    let mut l_bb = -r / (beta * beta);
    let mut l_aaa = 2.0 * r / a1.powi(3) - 2.0 * (n + r) / alpha.powi(3) + 6.0 * beta * s / alpha.powi(4);
    let mut l_aab = -2.0 * s / alpha.powi(3);
    let mut l_abb = 0.0;
    let mut l_bbb = 2.0 * r / beta.powi(3);

    for &x in data.times() {
        let e = (-beta * x).exp();
        let om = -(-beta * x).exp_m1();
        l_bb -= x * x * e / (om * om);
        l_bbb += x.powi(3) * e * (1.0 + e) / om.powi(3);
    }

    if m > 0.0 {
        let e = (-beta * c).exp();
        let d = surv_factor(alpha, beta, c);
        let (d2, d3) = (d * d, d * d * d);
        l_aa -= m / d2;
        l_ab -= c * m * e / d2;
        l_bb -= c * c * m * a1 * e / d2;
        l_aaa += 2.0 * m / d3;
        l_aab += 2.0 * c * m * e / d3;
        l_abb += c * c * m * e * (a1 + e) / d3;
        l_bbb += c.powi(3) * m * a1 * e * (a1 + e) / d3;
    }

    // σ = inverse of the negative Hessian
    let (h11, h12, h22) = (-l_aa, -l_ab, -l_bb);
    let det = h11 * h22 - h12 * h12;
    if !(det.is_finite() && det.abs() > 1e-14 * (h11 * h22).abs().max(h12 * h12)) {
        return Err(Error::Singular(format!("negative Hessian determinant {det:e}")));
    }
    Ok(LindleyTerms {
        l_aa,
        l_ab,
        l_bb,
        l_aaa,
        l_aab,
        l_abb,
        l_bbb,
        rho_a: (priors.w4 - 1.0) / alpha - priors.w3,
        rho_b: (priors.w2 - 1.0) / beta - priors.w1,
        s_aa: h22 / det,
        s_ab: -h12 / det,
        s_bb: h11 / det,
    })
}

/// Partial derivatives of the target `u` at the expansion point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub u: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub u_aa: f64,
    pub u_ab: f64,
    pub u_bb: f64,
}

impl Target {
    pub fn alpha(alpha: f64) -> Self {
        Self { u: alpha, u_a: 1.0, u_b: 0.0, u_aa: 0.0, u_ab: 0.0, u_bb: 0.0 }
    }

    pub fn beta(beta: f64) -> Self {
        Self { u: beta, u_a: 0.0, u_b: 1.0, u_aa: 0.0, u_ab: 0.0, u_bb: 0.0 }
    }

    /// `u = β/α`.
    pub fn lambda(alpha: f64, beta: f64) -> Self {
        Self {
            u: beta / alpha,
            u_a: -beta / (alpha * alpha),
            u_b: 1.0 / alpha,
            u_aa: 2.0 * beta / alpha.powi(3),
            u_ab: -1.0 / (alpha * alpha),
            u_bb: 0.0,
        }
    }
}

/// Two-parameter Lindley expansion for an arbitrary target.
pub fn lindley_general(t: &LindleyTerms, u: &Target) -> f64 {
    let first = (u.u_aa + 2.0 * u.u_a * t.rho_a) * t.s_aa
        + (u.u_ab + 2.0 * u.u_b * t.rho_a) * t.s_ab
        + (u.u_ab + 2.0 * u.u_a * t.rho_b) * t.s_ab
        + (u.u_bb + 2.0 * u.u_b * t.rho_b) * t.s_bb;
    let row_a = t.l_aaa * t.s_aa + 2.0 * t.l_aab * t.s_ab + t.l_abb * t.s_bb;
    let row_b = t.l_aab * t.s_aa + 2.0 * t.l_abb * t.s_ab + t.l_bbb * t.s_bb;
    let second = (u.u_a * t.s_aa + u.u_b * t.s_ab) * row_a + (u.u_a * t.s_ab + u.u_b * t.s_bb) * row_b;
    u.u + 0.5 * (first + second)
}

/// Bayes estimate of α, expanded for `u = α`.
pub fn lindley_alpha(alpha: f64, t: &LindleyTerms) -> f64 {
    alpha
        + 0.5
            * (2.0 * t.rho_a * t.s_aa
                + 2.0 * t.rho_b * t.s_ab
                + t.s_aa * t.s_aa * t.l_aaa
                + 3.0 * t.s_aa * t.s_ab * t.l_aab
                + 2.0 * t.s_ab * t.s_ab * t.l_abb
                + t.s_aa * t.s_bb * t.l_abb
                + t.s_ab * t.s_bb * t.l_bbb)
}

/// Bayes estimate of β, expanded for `u = β`.
pub fn lindley_beta(beta: f64, t: &LindleyTerms) -> f64 {
    beta + 0.5
        * (2.0 * t.rho_a * t.s_ab
            + 2.0 * t.rho_b * t.s_bb
            + 2.0 * t.s_ab * t.s_ab * t.l_aab
            + 2.0 * t.s_ab * t.s_bb * t.l_abb
            + t.s_bb * t.s_bb * t.l_bbb
            + t.s_aa * t.s_ab * t.l_aaa
            + t.s_bb * t.s_aa * t.l_aab
            + t.s_ab * t.s_bb * t.l_abb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindleyEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Set when any estimate is not positive; values are not truncated.
    pub negative: bool,
    pub terms: LindleyTerms,
}

/// Lindley estimates of `(α, β, λ)` expanded around `(alpha_hat, beta_hat)`.
pub fn lindley_estimate(alpha_hat: f64, beta_hat: f64, data: &CensoredData, priors: &GammaPriors) -> Result<LindleyEstimate> {
    let terms = lindley_terms(alpha_hat, beta_hat, data, priors)?;
    let alpha = lindley_alpha(alpha_hat, &terms);
    let beta = lindley_beta(beta_hat, &terms);
    let lambda = lindley_general(&terms, &Target::lambda(alpha_hat, beta_hat));
    Ok(LindleyEstimate {
        alpha,
        beta,
        lambda,
        negative: !(alpha > 0.0 && beta > 0.0 && lambda > 0.0),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::{generate_censored, HybridScheme};
    use crate::dist::WeParams;
    use crate::likelihood::log_likelihood;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn close(got: f64, want: f64, tol: f64) -> bool {
        (got - want).abs() <= tol * want.abs().max(1e-8)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let we = WeParams::new(2.5, 3.0).unwrap();
        let mut rng = stream_rng(41, 0);
        for k in 0..50 {
            let t = rng.random_range(0.3..1.5);
            let d = generate_censored(&we, HybridScheme::new(20, 10, t).unwrap(), &mut stream_rng(400 + k, 0)).unwrap();
            let a: f64 = rng.random_range(0.5..5.0);
            let b: f64 = rng.random_range(1.0..20.0);
            let terms = lindley_terms(a, b, &d, &GammaPriors::default()).unwrap();
            let l = |x: f64, y: f64| log_likelihood(x, y, &d).unwrap();

            let (ha, hb) = (1e-5 * a, 1e-5 * b);
            let l_aa = (l(a + ha, b) - 2.0 * l(a, b) + l(a - ha, b)) / (ha * ha);
            let l_bb = (l(a, b + hb) - 2.0 * l(a, b) + l(a, b - hb)) / (hb * hb);
            let l_ab = (l(a + ha, b + hb) - l(a + ha, b - hb) - l(a - ha, b + hb) + l(a - ha, b - hb)) / (4.0 * ha * hb);
            assert!(close(terms.l_aa, l_aa, 1e-3), "l_aa {} vs {l_aa}", terms.l_aa);
            assert!(close(terms.l_bb, l_bb, 1e-3), "l_bb {} vs {l_bb}", terms.l_bb);
            assert!(close(terms.l_ab, l_ab, 1e-3), "l_ab {} vs {l_ab}", terms.l_ab);

            // third order: central differences of the second derivatives checked above
            let z = GammaPriors::default();
            let t2 = |x: f64, y: f64| lindley_terms(x, y, &d, &z).unwrap();
            let l_aaa = (t2(a + ha, b).l_aa - t2(a - ha, b).l_aa) / (2.0 * ha);
            let l_aab = (t2(a, b + hb).l_aa - t2(a, b - hb).l_aa) / (2.0 * hb);
            let l_abb = (t2(a + ha, b).l_bb - t2(a - ha, b).l_bb) / (2.0 * ha);
            let l_abb2 = (t2(a, b + hb).l_ab - t2(a, b - hb).l_ab) / (2.0 * hb);
            let l_bbb = (t2(a, b + hb).l_bb - t2(a, b - hb).l_bb) / (2.0 * hb);
            assert!(close(terms.l_abb, l_abb2, 1e-3), "l_abb {} vs {l_abb2}", terms.l_abb);
            assert!(close(terms.l_aaa, l_aaa, 1e-3), "l_aaa {} vs {l_aaa}", terms.l_aaa);
            assert!(close(terms.l_aab, l_aab, 1e-3), "l_aab {} vs {l_aab}", terms.l_aab);
            assert!(close(terms.l_abb, l_abb, 1e-3), "l_abb {} vs {l_abb}", terms.l_abb);
            assert!(close(terms.l_bbb, l_bbb, 1e-3), "l_bbb {} vs {l_bbb}", terms.l_bbb);
        }
    }

    #[test]
    fn sigma_inverts_negative_hessian() {
        let d = crate::datasets::bjerkedal_censored(60, 300.0).unwrap();
        let t = lindley_terms(1.7715, 0.0239, &d, &GammaPriors::default()).unwrap();
        let p11 = -t.l_aa * t.s_aa - t.l_ab * t.s_ab;
        let p12 = -t.l_aa * t.s_ab - t.l_ab * t.s_bb;
        let p21 = -t.l_ab * t.s_aa - t.l_bb * t.s_ab;
        let p22 = -t.l_ab * t.s_ab - t.l_bb * t.s_bb;
        assert!((p11 - 1.0).abs() < 1e-10 && p12.abs() < 1e-10);
        assert!(p21.abs() < 1e-10 && (p22 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_informative_prior_gradient() {
        let d = crate::datasets::bjerkedal_complete();
        let t = lindley_terms(1.6, 0.022, &d, &GammaPriors::non_informative()).unwrap();
        assert_eq!(t.rho_a, -1.0 / 1.6);
        assert_eq!(t.rho_b, -1.0 / 0.022);
    }

    #[test]
    fn complete_data_has_no_censored_terms() {
        let d = crate::datasets::bjerkedal_complete();
        let (a, b) = (1.6, 0.022);
        let t = lindley_terms(a, b, &d, &GammaPriors::default()).unwrap();
        let s: f64 = d.times().iter().sum();
        let r = d.r() as f64;
        assert_eq!(t.l_ab, s / (a * a));
        assert_eq!(t.l_abb, 0.0);
        assert_eq!(t.l_aab, -2.0 * s / a.powi(3));
        assert!((t.l_aa - (-r / (a + 1.0).powi(2) + 2.0 * r / (a * a) - 2.0 * b * s / a.powi(3))).abs() < 1e-9);
    }

    #[test]
    fn specialized_forms_equal_general_expansion() {
        let d = crate::datasets::bjerkedal_censored(65, 250.0).unwrap();
        let priors = GammaPriors::new(1.0, 0.01, 1.5, 3.0).unwrap();
        let (a, b) = (1.939, 0.0255);
        let t = lindley_terms(a, b, &d, &priors).unwrap();
        assert!(close(lindley_alpha(a, &t), lindley_general(&t, &Target::alpha(a)), 1e-13));
        assert!(close(lindley_beta(b, &t), lindley_general(&t, &Target::beta(b)), 1e-13));
        let est = lindley_estimate(a, b, &d, &priors).unwrap();
        assert_eq!(est.lambda, lindley_general(&t, &Target::lambda(a, b)));
    }

    #[test]
    fn flat_corrections_collapse_to_the_mle() {
        let t = LindleyTerms {
            l_aa: -3.0,
            l_ab: 0.5,
            l_bb: -2.0,
            l_aaa: 0.0,
            l_aab: 0.0,
            l_abb: 0.0,
            l_bbb: 0.0,
            rho_a: 0.0,
            rho_b: 0.0,
            s_aa: 0.4,
            s_ab: 0.1,
            s_bb: 0.6,
        };
        assert_eq!(lindley_alpha(1.7, &t), 1.7);
        assert_eq!(lindley_beta(0.3, &t), 0.3);
    }

    #[test]
    fn bjerkedal_non_informative_at_reported_mle() {
        let d = crate::datasets::bjerkedal_censored(60, 300.0).unwrap();
        let e = lindley_estimate(1.7715, 0.0239, &d, &GammaPriors::default()).unwrap();
        assert!((e.beta - 0.0198).abs() < 1e-3 && (e.alpha - 1.5019).abs() < 1e-3 && (e.lambda - 0.0147).abs() < 1e-3);
        assert!(!e.negative);
    }

    #[test]
    fn bjerkedal_informative_at_reported_mle() {
        let priors = GammaPriors::new(1.0, 0.01, 1.5, 3.0).unwrap();
        let s1 = crate::datasets::bjerkedal_censored(60, 300.0).unwrap();
        let e = lindley_estimate(1.7715, 0.0239, &s1, &priors).unwrap();
        assert!((e.beta - 0.0233).abs() < 1e-3 && (e.alpha - 1.8233).abs() < 1e-3 && (e.lambda - 0.0142).abs() < 1e-3);
        let s2 = crate::datasets::bjerkedal_censored(65, 250.0).unwrap();
        let e = lindley_estimate(1.9390, 0.0255, &s2, &priors).unwrap();
        assert!((e.beta - 0.0231).abs() < 1e-3 && (e.alpha - 1.8162).abs() < 1e-3 && (e.lambda - 0.0141).abs() < 1e-3);
    }
}
