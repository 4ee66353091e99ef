//! Observed Fisher information through the missing-information principle,
//! `I_X = I_W - I_{W|X}`, in the `(λ, β)` parametrization.
//!
//! `I_W` is the information of `n` complete WE observations and
//! `I_{W|X} = (n - r)·I_c` is the information carried by the unobserved tail,
//! with `I_c` the information of one WE lifetime conditioned on `Z > c`.

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::{generate_censored, CensoredData, TiePolicy};
use crate::dist::WeParams;
use crate::em::{em_fit, EmConfig, EmStop};
use crate::error::{Error, Result};
use crate::numeric::{normal_quantile, surv_factor};
use crate::quad::{integrate, QuadOptions};
use crate::rng::stream_rng;

/// Symmetric 2×2 matrix over `(λ, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl InfoMatrix {
    pub fn zero() -> Self {
        Self { m11: 0.0, m12: 0.0, m22: 0.0 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m11 > 0.0 && self.m22 > 0.0 && self.det() > 0.0
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            m11: k * self.m11,
            m12: k * self.m12,
            m22: k * self.m22,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        let scale = (self.m11 * self.m22).abs().max(self.m12 * self.m12);
        if !(det.is_finite() && det.abs() > 1e-14 * scale && scale > 0.0) {
            return Err(Error::Singular(format!("determinant {det:e} of {self:?}")));
        }
        Ok(Self {
            m11: self.m22 / det,
            m12: -self.m12 / det,
            m22: self.m11 / det,
        })
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.m11 + self.m22);
        let half = 0.5 * (self.m11 - self.m22);
        let rad = (half * half + self.m12 * self.m12).sqrt();
        (mean - rad, mean + rad)
    }
}

impl std::ops::Sub for InfoMatrix {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self {
            m11: self.m11 - o.m11,
            m12: self.m12 - o.m12,
            m22: self.m22 - o.m22,
        }
    }
}

impl std::ops::Add for InfoMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            m11: self.m11 + o.m11,
            m12: self.m12 + o.m12,
            m22: self.m22 + o.m22,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64, level: f64) -> Result<Self> {
        if !(lower <= upper) || !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "interval ({lower}, {upper}) at level {level} is malformed"
            )));
        }
        Ok(Self { lower, upper, level })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn check_lambda_beta(lambda: f64, beta: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 && beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda and beta must be finite and > 0, got lambda = {lambda}, beta = {beta}"
        )))
    }
}

const INFO_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-10,
    rel_tol: 1e-12,
    max_intervals: 4000,
};

/// `∫₀¹ (ln(1-y))² (1-y)^k / y dy`, which equals `2 ζ(3, k + 1)`.
pub fn info_integral_a(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain(format!("exponent must be finite and >= 0, got {k}")));
    }
    let res = integrate(
        |y| {
            if y <= 0.0 {
                return 0.0;
            }
            let l = (-y).ln_1p();
            l * l * (k * l).exp() / y
        },
        0.0,
        1.0,
        INFO_QUAD,
    )?;
    Ok(res.value)
}

/// `e^{λc} ∫_{1-e^{-βc}}^1 (ln(1-y))² (1-y)^{λ/β} / y dy`, written with
/// `1 - y = e^{-βc} u` so that no factor underflows for large `c`.
pub fn info_integral_b_scaled(lambda: f64, beta: f64, c: f64) -> Result<f64> {
    check_lambda_beta(lambda, beta)?;
    let k = lambda / beta;
    let bc = beta * c;
    let e = (-bc).exp();
    let one_minus_e = -(-bc).exp_m1();
    let res = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let l = u.ln() - bc;
            let denom = one_minus_e + e * (1.0 - u);
            if denom <= 0.0 {
                // only reachable when βc = 0 and u = 1, where the integrand vanishes
                return 0.0;
            }
            l * l * u.powf(k) / denom
        },
        0.0,
        1.0,
        INFO_QUAD,
    )?;
    Ok(e * res.value)
}

/// Information of `n` complete observations, `I_W`.
pub fn complete_info(lambda: f64, beta: f64, n: usize) -> Result<InfoMatrix> {
    check_lambda_beta(lambda, beta)?;
    let n = n as f64;
    let bl2 = (beta + lambda).powi(2);
    let a = info_integral_a(lambda / beta)?;
    Ok(InfoMatrix {
        m11: n / bl2 + n / (lambda * lambda),
        m12: n / bl2,
        m22: n / bl2 - n / (beta * beta) + n * lambda * (beta + lambda) * a / beta.powi(4),
    })
}

/// Information lost to the `n - r` units censored at `c`, `I_{W|X}`.
pub fn missing_info(lambda: f64, beta: f64, c: f64, n: usize, r: usize) -> Result<InfoMatrix> {
    check_lambda_beta(lambda, beta)?;
    if r > n {
        return Err(Error::InvalidData(format!("r = {r} exceeds n = {n}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("censor point must be finite and > 0, got {c}")));
    }
    if r == n {
        return Ok(InfoMatrix::zero());
    }
    let m = (n - r) as f64;
    let e = (-beta * c).exp();
    let d = surv_factor(beta / lambda, beta, c);
    let bl2 = (beta + lambda).powi(2);
    let l2 = lambda * lambda;
    let b11 = 1.0 / bl2 + 2.0 * beta / (lambda * l2 * d) - beta * beta / (l2 * l2 * d * d);
    let b12 = 1.0 / bl2 - 1.0 / (l2 * d) + beta * (1.0 / lambda + c * e) / (l2 * d * d);
    let g = 1.0 / lambda + c * e;
    let b_scaled = info_integral_b_scaled(lambda, beta, c)?;
    let b22 = 1.0 / bl2 - c * c * e / d - g * g / (d * d) + (beta + lambda) * b_scaled / (beta.powi(3) * d);
    Ok(InfoMatrix {
        m11: m * b11,
        m12: m * b12,
        m22: m * b22,
    })
}

/// Observed information `I_W - I_{W|X}` for a censored sample.
pub fn observed_info(lambda: f64, beta: f64, data: &CensoredData) -> Result<InfoMatrix> {
    let w = complete_info(lambda, beta, data.n())?;
    if data.n_censored() == 0 {
        return Ok(w);
    }
    Ok(w - missing_info(lambda, beta, data.c(), data.n(), data.r())?)
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")))
    }
}

fn positive_variances(info: &InfoMatrix) -> Result<InfoMatrix> {
    let cov = info.inverse()?;
    if !(cov.m11 > 0.0 && cov.m22 > 0.0) {
        return Err(Error::Singular(format!("non-positive variance in {cov:?}")));
    }
    Ok(cov)
}

/// Normal-approximation intervals for `(λ, β)`, lower ends clamped at 0.
pub fn asymptotic_ci(
    lambda_hat: f64,
    beta_hat: f64,
    info: &InfoMatrix,
    level: f64,
) -> Result<(ConfidenceInterval, ConfidenceInterval)> {
    check_level(level)?;
    let cov = positive_variances(info)?;
    let z = normal_quantile(0.5 + 0.5 * level);
    let ci = |est: f64, var: f64| {
        let half = z * var.sqrt();
        ConfidenceInterval {
            lower: (est - half).max(0.0),
            upper: est + half,
            level,
        }
    };
    Ok((ci(lambda_hat, cov.m11), ci(beta_hat, cov.m22)))
}

/// Delta-method interval for `α = β/λ` from the `(λ, β)` information.
pub fn delta_ci_alpha(lambda_hat: f64, beta_hat: f64, info: &InfoMatrix, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    let cov = positive_variances(info)?;
    let g1 = -beta_hat / (lambda_hat * lambda_hat);
    let g2 = 1.0 / lambda_hat;
    let var = g1 * g1 * cov.m11 + 2.0 * g1 * g2 * cov.m12 + g2 * g2 * cov.m22;
    if !(var > 0.0) {
        return Err(Error::Singular(format!("delta-method variance {var:e}")));
    }
    let half = normal_quantile(0.5 + 0.5 * level) * var.sqrt();
    let alpha = beta_hat / lambda_hat;
    Ok(ConfidenceInterval {
        lower: (alpha - half).max(0.0),
        upper: alpha + half,
        level,
    })
}

/// How bootstrap samples are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapScheme {
    /// Draw `n` unit records with replacement from the `r` failures and the
    /// `n - r` units still running at `c`, then re-censor under the original
    /// scheme. Drawn running units stay beyond every observed time.
    #[default]
    Nonparametric,
    /// Draw `n` lifetimes with replacement from the observed failure times
    /// only, then re-censor. Ignores the censored units.
    FailuresOnly,
    /// Draw `n` lifetimes from the fitted WE law and censor them.
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub level: f64,
    pub scheme: BootstrapScheme,
    pub seed: u64,
    /// Count replicates whose likelihood supremum lies on the shape boundary
    /// at their boundary value instead of dropping them.
    pub keep_boundary: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: 1000,
            level: 0.95,
            scheme: BootstrapScheme::Nonparametric,
            seed: 1,
            keep_boundary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub interval: ConfidenceInterval,
    /// Shape estimates of the usable replicates, in replicate order.
    pub replicates: Vec<f64>,
    pub failed: usize,
}

/// Linear-interpolation sample quantile of sorted values.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Placeholder lifetime for a resampled unit that was still running.
const RUNNING: f64 = f64::MAX;

/// Percentile bootstrap interval for α.
pub fn bootstrap_ci_alpha(data: &CensoredData, config: &BootstrapConfig, em: &EmConfig) -> Result<BootstrapResult> {
    if config.n_boot < 100 {
        return Err(Error::Config(format!("need at least 100 bootstrap replicates, got {}", config.n_boot)));
    }
    check_level(config.level)?;
    let scheme = data.scheme();
    let fitted = match config.scheme {
        BootstrapScheme::Parametric => {
            let fit = em_fit(data, em)?;
            if !fit.converged {
                return Err(Error::Estimation("EM did not converge on the original sample".into()));
            }
            Some(fit.params()?)
        }
        BootstrapScheme::Nonparametric | BootstrapScheme::FailuresOnly => None,
    };
    let one = |i: usize| -> Option<f64> {
        let mut rng = stream_rng(config.seed, i as u64);
        let sample = match &fitted {
            Some(p) => generate_censored(p, scheme, &mut rng).ok()?,
            None => {
                let pool = data.times();
                let mut draw: Vec<f64> = if config.scheme == BootstrapScheme::FailuresOnly {
                    (0..scheme.n).map(|_| *pool.choose(&mut rng).expect("r >= 1")).collect()
                } else {
                    (0..scheme.n)
                        .map(|_| {
                            let k = rng.random_range(0..scheme.n);
                            pool.get(k).copied().unwrap_or(RUNNING)
                        })
                        .collect()
                };
                draw.sort_by(f64::total_cmp);
                let s = CensoredData::apply_scheme(&draw, scheme, TiePolicy::Allow).ok()?;
                // a running unit cannot supply the R-th failure time
                (s.c() < RUNNING).then_some(s)?
            }
        };
        let fit = em_fit(&sample, em).ok()?;
        let usable = fit.converged || (config.keep_boundary && fit.stop == EmStop::Boundary);
        usable.then_some(fit.alpha_hat)
    };
    let draws: Vec<Option<f64>> = (0..config.n_boot).into_par_iter().map(one).collect();
    let replicates: Vec<f64> = draws.iter().flatten().copied().collect();
    let failed = config.n_boot - replicates.len();
    if failed * 5 > config.n_boot {
        return Err(Error::Bootstrap {
            failed,
            total: config.n_boot,
        });
    }
    let mut sorted = replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - config.level);
    let interval = ConfidenceInterval::new(
        sorted_quantile(&sorted, tail),
        sorted_quantile(&sorted, 1.0 - tail),
        config.level,
    )?;
    Ok(BootstrapResult {
        interval,
        replicates,
        failed,
    })
}

/// Convenience: the WE law at `(λ, β)`.
pub fn params_lambda_beta(lambda: f64, beta: f64) -> Result<WeParams> {
    WeParams::new(beta / lambda, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::censoring::HybridScheme;
    use crate::datasets::{bjerkedal_censored, BJERKEDAL_SCHEME_1};
    use crate::em::em_fit;
    use crate::quad::integrate_to_inf;

    fn hurwitz_zeta3(q: f64) -> f64 {
        // direct sum plus Euler-Maclaurin tail
        let n = 1000;
        let head: f64 = (0..n).map(|j| 1.0 / (j as f64 + q).powi(3)).sum();
        let x = n as f64 + q;
        head + 1.0 / (2.0 * x * x) + 1.0 / (2.0 * x.powi(3)) + 1.0 / (4.0 * x.powi(4))
    }

    #[test]
    fn integral_a_matches_zeta_series() {
        let zeta3 = 1.202_056_903_159_594_3;
        let a = info_integral_a(1.0).unwrap();
        assert!((a - 2.0 * (zeta3 - 1.0)).abs() < 1e-8, "{a}");
        assert!((a - 0.404_113_806_3).abs() < 1e-9);
        for &k in &[0.0, 0.05, 0.4, 2.5, 17.0] {
            let a = info_integral_a(k).unwrap();
            let want = 2.0 * hurwitz_zeta3(k + 1.0);
            assert!((a - want).abs() < 1e-9 * want.max(1.0), "k = {k}: {a} vs {want}");
        }
    }

    #[test]
    fn integral_b_matches_direct_form() {
        for &(l, b, c) in &[(3.0, 7.5, 1.0), (0.5, 0.2, 0.3), (0.0135, 0.024, 300.0), (2.0, 1.0, 1e-3)] {
            let k: f64 = l / b;
            let lower = -(-b * c).exp_m1();
            let direct = integrate(
                |y: f64| {
                    let s = (-y).ln_1p();
                    s * s * (k * s).exp() / y
                },
                lower,
                1.0,
                QuadOptions::default(),
            )
            .unwrap()
            .value;
            let scaled = info_integral_b_scaled(l, b, c).unwrap();
            let want = direct * (l * c).exp();
            assert!((scaled - want).abs() < 1e-7 * want.abs().max(1e-12), "({l},{b},{c}): {scaled} vs {want}");
        }
    }

    #[test]
    fn complete_info_structure() {
        let m = complete_info(3.0, 7.5, 40).unwrap();
        let m2 = complete_info(3.0, 7.5, 80).unwrap();
        assert!((m2.m11 - 2.0 * m.m11).abs() < 1e-12 * m2.m11);
        assert!((m2.m12 - 2.0 * m.m12).abs() < 1e-12 * m2.m12);
        assert!((m2.m22 - 2.0 * m.m22).abs() < 1e-12 * m2.m22.abs());
        assert!(m.is_positive_definite());
        assert_eq!(missing_info(3.0, 7.5, 1.0, 40, 40).unwrap(), InfoMatrix::zero());
    }

    /// `-E[∂² ln f(Z | Z > c)]` over `(λ, β)` by finite differences and quadrature.
    fn definitional_missing(lambda: f64, beta: f64, c: f64) -> InfoMatrix {
        let ln_cond = |l: f64, b: f64, z: f64| {
            let p = params_lambda_beta(l, b).unwrap();
            p.ln_pdf(z).unwrap() - p.sf(c).unwrap().ln()
        };
        let (hl, hb) = (1e-3 * lambda, 1e-3 * beta);
        let second = |z: f64| {
            let f = |i: f64, j: f64| ln_cond(lambda + i * hl, beta + j * hb, z);
            let f0 = f(0.0, 0.0);
            // Richardson-extrapolated central differences
            let d11 = |s: f64| (f(s, 0.0) - 2.0 * f0 + f(-s, 0.0)) / (s * s * hl * hl);
            let d22 = |s: f64| (f(0.0, s) - 2.0 * f0 + f(0.0, -s)) / (s * s * hb * hb);
            let d12 = |s: f64| (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4.0 * s * s * hl * hb);
            let rich = |d: &dyn Fn(f64) -> f64| (4.0 * d(0.5) - d(1.0)) / 3.0;
            (rich(&d11), rich(&d12), rich(&d22))
        };
        let p = params_lambda_beta(lambda, beta).unwrap();
        let sf = p.sf(c).unwrap();
        let opts = QuadOptions { abs_tol: 1e-11, rel_tol: 1e-8, max_intervals: 4000 };
        let e = |pick: fn((f64, f64, f64)) -> f64| {
            -integrate_to_inf(|z| pick(second(z)) * p.pdf(z).unwrap() / sf, c, opts).unwrap().value
        };
        InfoMatrix {
            m11: e(|t| t.0),
            m12: e(|t| t.1),
            m22: e(|t| t.2),
        }
    }

    #[test]
    fn missing_info_matches_definition() {
        // well conditioned point: every entry to 1e-4 relative
        let (l, b, c) = (3.0, 1.0, 0.5);
        let got = missing_info(l, b, c, 40, 30).unwrap().scale(0.1);
        let want = definitional_missing(l, b, c);
        for (g, w) in [(got.m11, want.m11), (got.m12, want.m12), (got.m22, want.m22)] {
            assert!((g - w).abs() < 1e-4 * w.abs(), "{got:?} vs {want:?}");
        }
        // (λ, β, c) = (3, 7.5, 1): the β entry is a cancellation of O(1e-2)
        // terms down to O(1e-8), below finite-difference resolution, so it is
        // held to the matrix scale instead
        let (l, b, c) = (3.0, 7.5, 1.0);
        let got = missing_info(l, b, c, 40, 30).unwrap().scale(0.1);
        let want = definitional_missing(l, b, c);
        assert!((got.m11 - want.m11).abs() < 1e-4 * want.m11.abs());
        assert!((got.m12 - want.m12).abs() < 1e-4 * want.m11.abs());
        assert!((got.m22 - want.m22).abs() < 1e-4 * want.m11.abs());
        assert!(got.m22 > 0.0 && got.m22 < 1e-6);
    }

    #[test]
    fn alternative_beta_entry_disagrees_with_definition() {
        // the variant with (1/λ + c - e^{-βc}) in the squared term
        let (l, b, c) = (3.0, 1.0, 0.5f64);
        let e = (-b * c).exp();
        let d = b / l + 1.0 - e;
        let g = 1.0 / l + c - e;
        let bs = info_integral_b_scaled(l, b, c).unwrap();
        let alt = 1.0 / (b + l).powi(2) - c * c * e / d - g * g / (d * d) + (b + l) * bs / (b.powi(3) * d);
        let want = definitional_missing(l, b, c).m22;
        assert!((alt - want).abs() > 1e-2 * want.abs());
    }

    #[test]
    fn missing_tail_terms_decay_in_c() {
        let (l, b) = (3.0, 7.5);
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let c = 0.1 * k as f64 / b * 10.0;
            let e = (-b * c).exp();
            let d = b / l + 1.0 - e;
            let tail = c * c * e / d;
            if c > 2.0 / b {
                assert!(tail < prev);
            }
            prev = tail;
        }
    }

    #[test]
    fn observed_is_complete_minus_missing() {
        let (q, t) = BJERKEDAL_SCHEME_1;
        let d = bjerkedal_censored(q, t).unwrap();
        let fit = em_fit(&d, &EmConfig::default()).unwrap();
        let (l, b) = (fit.lambda_hat, fit.beta_hat);
        let obs = observed_info(l, b, &d).unwrap();
        let sum = obs + missing_info(l, b, d.c(), d.n(), d.r()).unwrap();
        let w = complete_info(l, b, d.n()).unwrap();
        assert_eq!(sum.m11, w.m11);
        assert!((sum.m12 - w.m12).abs() <= 1e-15 * w.m12.abs());
        assert!((sum.m22 - w.m22).abs() <= 1e-15 * w.m22.abs().max(1.0) * 4.0);
        assert!(obs.is_positive_definite());
        assert!(obs.eigenvalues().0 > 0.0);

        let full = crate::datasets::bjerkedal_complete();
        assert_eq!(observed_info(l, b, &full).unwrap(), complete_info(l, b, full.n()).unwrap());
    }

    #[test]
    fn asymptotic_interval_arithmetic() {
        let info = InfoMatrix { m11: 4.0, m12: 0.0, m22: 100.0 };
        let (cl, cb) = asymptotic_ci(5.0, 2.0, &info, 0.95).unwrap();
        let z = 1.959_963_984_540_054;
        assert!((cl.length() - 2.0 * z * 0.5).abs() < 1e-12);
        assert!((cb.lower - (2.0 - z * 0.1)).abs() < 1e-12);
        let (cl, _) = asymptotic_ci(0.1, 2.0, &info, 0.95).unwrap();
        assert_eq!(cl.lower, 0.0);
        let singular = InfoMatrix { m11: 1.0, m12: 1.0, m22: 1.0 };
        assert!(asymptotic_ci(1.0, 1.0, &singular, 0.95).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_and_covers_the_estimate() {
        let we = WeParams::new(2.5, 3.0).unwrap();
        let scheme = HybridScheme::new(40, 30, 0.6).unwrap();
        let d = generate_censored(&we, scheme, &mut stream_rng(23, 0)).unwrap();
        let fit = em_fit(&d, &EmConfig::default()).unwrap();
        for bs in [BootstrapScheme::Nonparametric, BootstrapScheme::FailuresOnly, BootstrapScheme::Parametric] {
            let cfg = BootstrapConfig {
                n_boot: 100,
                scheme: bs,
                seed: 5,
                ..BootstrapConfig::default()
            };
            let a = bootstrap_ci_alpha(&d, &cfg, &EmConfig::default()).unwrap();
            let b = bootstrap_ci_alpha(&d, &cfg, &EmConfig::default()).unwrap();
            assert_eq!(a, b);
            if bs != BootstrapScheme::FailuresOnly {
                assert!(a.interval.contains(fit.alpha_hat), "{:?} vs {}", a.interval, fit.alpha_hat);
            }
        }
        let cfg = BootstrapConfig { n_boot: 50, ..BootstrapConfig::default() };
        assert!(bootstrap_ci_alpha(&d, &cfg, &EmConfig::default()).is_err());
    }

    #[test]
    fn sorted_quantile_interpolates() {
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        assert_eq!(sorted_quantile(&v, 0.25), 2.5);
        assert_eq!(sorted_quantile(&v, 1.0), 10.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn observed_plus_missing_is_complete(
            l in 0.1f64..10.0,
            b in 0.1f64..10.0,
            bc in 0.05f64..5.0,
            n in 5usize..80,
            frac in 0.0f64..1.0,
        ) {
            let r = 1 + ((n - 1) as f64 * frac) as usize;
            let c = bc / b;
            let w = complete_info(l, b, n).unwrap();
            let m = missing_info(l, b, c, n, r).unwrap();
            prop_assert!(w.is_positive_definite());
            let back = (w - m) + m;
            prop_assert!((back.m11 - w.m11).abs() <= 1e-12 * w.m11.abs());
            prop_assert!((back.m12 - w.m12).abs() <= 1e-12 * w.m12.abs().max(w.m11.abs()));
            prop_assert!((back.m22 - w.m22).abs() <= 1e-12 * w.m22.abs().max(w.m11.abs()));
            // lost information is itself an information matrix
            prop_assert!(m.m11 >= 0.0 && m.m22 >= -1e-12 * w.m22.abs());
        }
    }
}
