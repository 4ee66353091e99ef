//! Gibbs sampling from the joint posterior of `(α, β)` under independent
//! gamma priors.
//!
//! The β conditional is log-concave and is drawn exactly by adaptive
//! rejection with tangent envelopes. The α conditional is drawn in
//! `t = ln α`, where its log density splits into a concave part and a convex
//! part; on each cell the tangent of the first plus the chord of the second
//! bounds it from above, and linear bounds on the derivative give
//! exponential tails. Both envelopes are piecewise exponential.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::CensoredData;
use crate::em::{em_fit, EmConfig};
use crate::error::{Error, Result};
use crate::fisher::ConfidenceInterval;
use crate::lindley::GammaPriors;
use crate::numeric::{golden_max, illinois, ln_one_minus_exp_neg, surv_factor, x_over_expm1};
use crate::rng::stream_rng;

/// How α is drawn from its conditional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSampler {
    /// Envelope rejection, switching to grid inversion for a draw whose
    /// acceptance rate falls below 1%.
    #[default]
    Rejection,
    /// Inverse cdf on a trapezoid-normalized grid.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Nodes of the α grid used by the inversion sampler.
    pub grid_size: usize,
    pub thinning: usize,
    pub alpha_sampler: AlphaSampler,
    /// Starting `(α, β)`; the EM estimate when absent.
    pub init: Option<(f64, f64)>,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            n_iter: 11_000,
            burn_in: 1_000,
            seed: 1,
            grid_size: 2_000,
            thinning: 1,
            alpha_sampler: AlphaSampler::Rejection,
            init: None,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.burn_in >= self.n_iter {
            return Err(Error::Config(format!(
                "need 0 <= burn_in < n_iter, got burn_in = {}, n_iter = {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if self.grid_size < 16 {
            return Err(Error::Config(format!("grid_size {} is below 16", self.grid_size)));
        }
        if let Some((a, b)) = self.init {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(Error::Config(format!("initial value ({a}, {b}) is not positive")));
            }
        }
        Ok(())
    }
}

/// Proposal and acceptance counts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SamplerStats {
    pub proposals: u64,
    pub accepted: u64,
    pub grid_draws: u64,
}

impl SamplerStats {
    /// `None` before any rejection proposal.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.accepted as f64 / self.proposals as f64)
    }

    fn merge(&mut self, o: SamplerStats) {
        self.proposals += o.proposals;
        self.accepted += o.accepted;
        self.grid_draws += o.grid_draws;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub alpha_draws: Vec<f64>,
    pub beta_draws: Vec<f64>,
    pub lambda_draws: Vec<f64>,
    pub init: (f64, f64),
    pub alpha_stats: SamplerStats,
    pub beta_stats: SamplerStats,
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.alpha_draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_draws.is_empty()
    }
}

fn stats(data: &CensoredData) -> (f64, f64, f64, f64, f64) {
    (data.n() as f64, data.r() as f64, data.n_censored() as f64, data.c(), data.total_time_on_test())
}

/// `ln π(β | α, x)` up to a constant.
pub fn log_cond_beta(beta: f64, alpha: f64, data: &CensoredData, priors: &GammaPriors) -> f64 {
    let (_, r, m, c, s) = stats(data);
    let mut v = (priors.w2 + r - 1.0) * beta.ln() - beta * (priors.w1 + s / alpha);
    if m > 0.0 {
        v += m * surv_factor(alpha, beta, c).ln();
    }
    v + data.times().iter().map(|&x| ln_one_minus_exp_neg(beta * x)).sum::<f64>()
}

/// Derivative of [`log_cond_beta`] in β.
pub fn d_log_cond_beta(beta: f64, alpha: f64, data: &CensoredData, priors: &GammaPriors) -> f64 {
    let (_, r, m, c, s) = stats(data);
    let mut v = (priors.w2 + r - 1.0) / beta - priors.w1 - s / alpha;
    if m > 0.0 {
        let e = (-beta * c).exp();
        v += m * c * e / surv_factor(alpha, beta, c);
    }
    v + data.times().iter().map(|&x| x_over_expm1(beta, x)).sum::<f64>()
}

/// `ln π(α | β, x)` up to a constant.
pub fn log_cond_alpha(alpha: f64, beta: f64, data: &CensoredData, priors: &GammaPriors) -> f64 {
    let (n, r, m, c, s) = stats(data);
    let mut v = (priors.w4 - n - r - 1.0) * alpha.ln() + r * alpha.ln_1p() - alpha * priors.w3 - beta * s / alpha;
    if m > 0.0 {
        v += m * surv_factor(alpha, beta, c).ln();
    }
    v
}

/// `ln π(α, β | x)` up to a constant.
pub fn log_posterior(alpha: f64, beta: f64, data: &CensoredData, priors: &GammaPriors) -> Result<f64> {
    Ok(crate::likelihood::log_likelihood(alpha, beta, data)? + priors.ln_density(alpha, beta))
}

// A piece `[a, b]` of a piecewise exponential envelope, `u(x) = u0 + slope (x - x0)`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    x0: f64,
    u0: f64,
    slope: f64,
}

impl Piece {
    fn u(&self, x: f64) -> f64 {
        self.u0 + self.slope * (x - self.x0)
    }

    // ln of the integral of exp(u) over the piece
    fn ln_mass(&self) -> f64 {
        let w = self.b - self.a;
        let s = self.slope;
        if (s * w).abs() < 1e-12 {
            self.u(0.5 * (self.a + self.b)) + w.ln()
        } else if s > 0.0 {
            self.u(self.b) + (-(-s * w).exp_m1()).ln() - s.ln()
        } else {
            self.u(self.a) + (-(s * w).exp_m1()).ln() - (-s).ln()
        }
    }

    fn sample(&self, v: f64) -> f64 {
        let w = self.b - self.a;
        let s = self.slope;
        if (s * w).abs() < 1e-12 {
            self.a + v * w
        } else if s > 0.0 {
            (self.b + (v * (-s * w).exp_m1()).ln_1p() / s).max(self.a)
        } else {
            (self.a + (v * (s * w).exp_m1()).ln_1p() / s).min(self.b)
        }
    }
}

struct Envelope {
    pieces: Vec<Piece>,
    cum: Vec<f64>,
}

impl Envelope {
    fn new(pieces: Vec<Piece>) -> Result<Self> {
        let ln_m: Vec<f64> = pieces.iter().map(Piece::ln_mass).collect();
        let top = ln_m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::Unnormalizable(format!("envelope mass ln = {top}")));
        }
        let mut acc = 0.0;
        let cum = ln_m
            .iter()
            .map(|l| {
                acc += (l - top).exp();
                acc
            })
            .collect();
        Ok(Self { pieces, cum })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let total = *self.cum.last().unwrap();
        let target = rng.random::<f64>() * total;
        let k = self.cum.partition_point(|&c| c <= target).min(self.pieces.len() - 1);
        let p = &self.pieces[k];
        let x = p.sample(rng.random());
        (x, p.u(x))
    }
}

const MAX_PROPOSALS: u64 = 100_000;

/// Exact draw from a log-concave density on `(0, ∞)` with log density `h`
/// and derivative `dh`, by tangent-envelope adaptive rejection. `points`
/// must contain abscissae on both sides of the mode.
fn ars<R, H, D>(h: H, dh: D, points: &[f64], rng: &mut R, st: &mut SamplerStats) -> Result<f64>
where
    R: Rng + ?Sized,
    H: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    const MAX_POINTS: usize = 40;
    let mut xs: Vec<f64> = points.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let mut ds: Vec<f64> = xs.iter().map(|&x| dh(x)).collect();
    let shift = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(ds[0] > 0.0 && *ds.last().unwrap() < 0.0) {
        return Err(Error::Domain(format!("abscissae {xs:?} do not straddle the mode")));
    }
    loop {
        let k = xs.len();
        for j in 1..k {
            let tol = 1e-9 * (ds[j - 1].abs() + ds[j].abs());
            if ds[j] > ds[j - 1] + tol {
                return Err(Error::NotLogConcave { abscissa: xs[j] });
            }
        }
        let mut z = Vec::with_capacity(k + 1);
        z.push(0.0);
        for j in 0..k - 1 {
            let dd = ds[j] - ds[j + 1];
            let mid = 0.5 * (xs[j] + xs[j + 1]);
            let zj = if dd > 1e-12 * (ds[j].abs() + ds[j + 1].abs()) {
                ((hs[j + 1] - hs[j] - xs[j + 1] * ds[j + 1] + xs[j] * ds[j]) / dd).clamp(xs[j], xs[j + 1])
            } else {
                mid
            };
            z.push(zj);
        }
        z.push(f64::INFINITY);
        let pieces = (0..k)
            .map(|j| Piece { a: z[j], b: z[j + 1], x0: xs[j], u0: hs[j] - shift, slope: ds[j] })
            .collect();
        let env = Envelope::new(pieces)?;
        loop {
            st.proposals += 1;
            if st.proposals > MAX_PROPOSALS && st.accepted == 0 {
                return Err(Error::Unnormalizable("rejection sampler accepted nothing".into()));
            }
            let (x, ux) = env.draw(rng);
            if !(x > 0.0 && x.is_finite()) {
                continue;
            }
            let hx = h(x) - shift;
            if rng.random::<f64>().ln() <= hx - ux {
                st.accepted += 1;
                return Ok(x);
            }
            if k < MAX_POINTS {
                let pos = xs.partition_point(|&v| v < x);
                if pos < xs.len() && xs[pos] == x {
                    continue;
                }
                xs.insert(pos, x);
                hs.insert(pos, hx + shift);
                ds.insert(pos, dh(x));
                break;
            }
        }
    }
}

/// Mode of the β conditional.
pub fn beta_mode(alpha: f64, data: &CensoredData, priors: &GammaPriors, start: f64) -> Result<f64> {
    let d = |b: f64| d_log_cond_beta(b, alpha, data, priors);
    let mut lo = start;
    let mut steps = 0;
    while !(d(lo) > 0.0) {
        lo *= 0.5;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Domain("beta conditional increases nowhere".into()));
        }
    }
    let mut hi = start.max(lo);
    while !(d(hi) < 0.0) {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return Err(Error::Unnormalizable("beta conditional does not decrease".into()));
        }
    }
    illinois(d, lo, hi, 1e-10 * hi, 0.0, 500)
        .map(|(b, _)| b)
        .ok_or_else(|| Error::Domain("beta mode search failed".into()))
}

/// One draw from `π(β | α, x)`.
pub fn sample_beta<R: Rng + ?Sized>(
    alpha: f64,
    data: &CensoredData,
    priors: &GammaPriors,
    start: f64,
    rng: &mut R,
    st: &mut SamplerStats,
) -> Result<f64> {
    let m = beta_mode(alpha, data, priors, start)?;
    let d = |b: f64| d_log_cond_beta(b, alpha, data, priors);
    let curv = (d(m * (1.0 + 1e-4)) - d(m * (1.0 - 1e-4))) / (2e-4 * m);
    let sd = if curv < 0.0 { (-1.0 / curv).sqrt() } else { 0.5 * m };
    let mut lo = (m - sd).max(0.1 * m);
    while !(d(lo) > 0.0) {
        lo *= 0.5;
    }
    let mut hi = m + sd;
    while !(d(hi) < 0.0) {
        hi *= 2.0;
    }
    ars(|b| log_cond_beta(b, alpha, data, priors), d, &[lo, m, hi], rng, st)
}

/// `ln` density of `t = ln α` given β.
fn log_cond_t(t: f64, beta: f64, data: &CensoredData, priors: &GammaPriors) -> f64 {
    log_cond_alpha(t.exp(), beta, data, priors) + t
}

/// Support bracket `[t_lo, t_hi]` of `t = ln α` given β, with the bounds on
/// the derivative that make exponential tails valid outside it.
#[derive(Debug, Clone, Copy)]
struct AlphaFrame {
    mode: f64,
    g_mode: f64,
    t_lo: f64,
    t_hi: f64,
    slope_lo: f64,
    slope_hi: f64,
}

fn alpha_frame(beta: f64, data: &CensoredData, priors: &GammaPriors) -> Result<AlphaFrame> {
    const DROP: f64 = 40.0;
    let (n, r, _, _, s) = stats(data);
    let bs = beta * s;
    let g = |t: f64| log_cond_t(t, beta, data, priors);
    // g'(t) lies between these two decreasing functions
    let lower = |t: f64| priors.w4 - n - r - priors.w3 * t.exp() + bs * (-t).exp();
    let upper = |t: f64| priors.w4 - r - priors.w3 * t.exp() + bs * (-t).exp();

    let t0 = (bs / n).ln();
    let mut best = (t0, g(t0));
    let mut t_hi = t0;
    let mut steps = 0;
    loop {
        t_hi += 0.5;
        let v = g(t_hi);
        if v > best.1 {
            best = (t_hi, v);
        }
        if v < best.1 - DROP && upper(t_hi) < 0.0 {
            break;
        }
        steps += 1;
        if steps > 2000 {
            return Err(Error::Unnormalizable(format!(
                "alpha conditional at beta = {beta} has a non-integrable upper tail"
            )));
        }
    }
    let mut t_lo = t0;
    steps = 0;
    loop {
        t_lo -= 0.5;
        let v = g(t_lo);
        if v > best.1 {
            best = (t_lo, v);
        }
        if v < best.1 - DROP && lower(t_lo) > 0.0 {
            break;
        }
        steps += 1;
        if steps > 2000 {
            return Err(Error::Unnormalizable(format!("alpha conditional at beta = {beta} has no lower tail")));
        }
    }
    let (mode, g_mode) = golden_max(g, best.0 - 0.5, best.0 + 0.5, 1e-10);
    let (mode, g_mode) = if g_mode >= best.1 { (mode, g_mode) } else { best };
    Ok(AlphaFrame { mode, g_mode, t_lo, t_hi, slope_lo: lower(t_lo), slope_hi: upper(t_hi) })
}

/// Maximizer of `π(α | β, x)` over α.
pub fn alpha_mode(beta: f64, data: &CensoredData, priors: &GammaPriors) -> Result<f64> {
    let f = alpha_frame(beta, data, priors)?;
    let g = |t: f64| log_cond_alpha(t.exp(), beta, data, priors);
    let (t, _) = golden_max(g, f.mode - 1.0, f.mode + 1.0, 1e-12);
    Ok(t.exp())
}

fn alpha_envelope(f: &AlphaFrame, beta: f64, data: &CensoredData, priors: &GammaPriors) -> Result<Envelope> {
    let (n, r, m, c, s) = stats(data);
    let bs = beta * s;
    let k = -(-beta * c).exp_m1();
    // log density of ln α = concave q + convex cv
    let q = |t: f64| (priors.w4 - n - r) * t - priors.w3 * t.exp() - bs * (-t).exp();
    let dq = |t: f64| (priors.w4 - n - r) - priors.w3 * t.exp() + bs * (-t).exp();
    let d2q = |t: f64| priors.w3 * t.exp() + bs * (-t).exp();
    let cv = |t: f64| r * t.exp().ln_1p() + if m > 0.0 { m * (t.exp() + k).ln() } else { 0.0 };

    let mut pieces = Vec::new();
    let g_lo = log_cond_t(f.t_lo, beta, data, priors) - f.g_mode;
    pieces.push(Piece { a: f64::NEG_INFINITY, b: f.t_lo, x0: f.t_lo, u0: g_lo, slope: f.slope_lo });
    let mut a = f.t_lo;
    let mut ca = cv(a);
    while a < f.t_hi {
        let h = (0.8 / (d2q(a) + n / 4.0)).sqrt().min(0.25);
        let b = if a + 1.5 * h >= f.t_hi { f.t_hi } else { a + h };
        let mid = 0.5 * (a + b);
        let cb = cv(b);
        // tangent of q at the midpoint plus chord of cv
        let slope = dq(mid) + (cb - ca) / (b - a);
        let u0 = q(mid) + dq(mid) * (a - mid) + ca - f.g_mode;
        pieces.push(Piece { a, b, x0: a, u0, slope });
        a = b;
        ca = cb;
    }
    let g_hi = log_cond_t(f.t_hi, beta, data, priors) - f.g_mode;
    pieces.push(Piece { a: f.t_hi, b: f64::INFINITY, x0: f.t_hi, u0: g_hi, slope: f.slope_hi });
    Envelope::new(pieces)
}

fn alpha_grid_draw<R: Rng + ?Sized>(
    f: &AlphaFrame,
    beta: f64,
    data: &CensoredData,
    priors: &GammaPriors,
    grid_size: usize,
    rng: &mut R,
) -> f64 {
    let h = (f.t_hi - f.t_lo) / (grid_size - 1) as f64;
    let dens: Vec<f64> = (0..grid_size)
        .map(|i| (log_cond_t(f.t_lo + i as f64 * h, beta, data, priors) - f.g_mode).exp())
        .collect();
    let mut cum = Vec::with_capacity(grid_size);
    let mut acc = 0.0;
    cum.push(0.0);
    for w in dens.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        cum.push(acc);
    }
    let target = rng.random::<f64>() * acc;
    let k = cum.partition_point(|&c| c <= target).clamp(1, grid_size - 1);
    let frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
    (f.t_lo + (k - 1) as f64 * h + frac * h).exp()
}

/// One draw from `π(α | β, x)`.
pub fn sample_alpha<R: Rng + ?Sized>(
    beta: f64,
    data: &CensoredData,
    priors: &GammaPriors,
    method: AlphaSampler,
    grid_size: usize,
    rng: &mut R,
    st: &mut SamplerStats,
) -> Result<f64> {
    let f = alpha_frame(beta, data, priors)?;
    if method == AlphaSampler::Grid {
        st.grid_draws += 1;
        return Ok(alpha_grid_draw(&f, beta, data, priors, grid_size, rng));
    }
    let env = alpha_envelope(&f, beta, data, priors)?;
    for _ in 0..100 {
        st.proposals += 1;
        let (t, ut) = env.draw(rng);
        let gt = log_cond_t(t, beta, data, priors) - f.g_mode;
        if gt > ut + 1e-9 {
            return Err(Error::Domain(format!("alpha envelope fails to dominate at ln alpha = {t}")));
        }
        if rng.random::<f64>().ln() <= gt - ut {
            st.accepted += 1;
            return Ok(t.exp());
        }
    }
    st.grid_draws += 1;
    Ok(alpha_grid_draw(&f, beta, data, priors, grid_size, rng))
}

/// Gibbs chain started at `init`: α from `π(α | β)`, then β from `π(β | α)`.
pub fn gibbs_chain<R: Rng + ?Sized>(
    data: &CensoredData,
    priors: &GammaPriors,
    config: &GibbsConfig,
    init: (f64, f64),
    rng: &mut R,
) -> Result<PosteriorChain> {
    config.validate()?;
    priors.validate()?;
    let n = config.n_iter;
    let mut chain = PosteriorChain {
        alpha_draws: Vec::with_capacity(n),
        beta_draws: Vec::with_capacity(n),
        lambda_draws: Vec::with_capacity(n),
        init,
        alpha_stats: SamplerStats::default(),
        beta_stats: SamplerStats::default(),
    };
    let (mut alpha, mut beta) = init;
    for i in 0..n {
        for _ in 0..config.thinning {
            let wrap = |e: Error| Error::Chain { iteration: i, source: Box::new(e) };
            let mut sa = SamplerStats::default();
            alpha = sample_alpha(beta, data, priors, config.alpha_sampler, config.grid_size, rng, &mut sa).map_err(wrap)?;
            chain.alpha_stats.merge(sa);
            let mut sb = SamplerStats::default();
            beta = sample_beta(alpha, data, priors, beta, rng, &mut sb).map_err(wrap)?;
            chain.beta_stats.merge(sb);
        }
        chain.alpha_draws.push(alpha);
        chain.beta_draws.push(beta);
        chain.lambda_draws.push(beta / alpha);
    }
    Ok(chain)
}

fn default_init(data: &CensoredData) -> Result<(f64, f64)> {
    let fit = em_fit(data, &EmConfig::default())?;
    if fit.alpha_hat.is_finite() && fit.beta_hat.is_finite() && fit.alpha_hat > 0.0 && fit.beta_hat > 0.0 {
        Ok((fit.alpha_hat, fit.beta_hat))
    } else {
        Err(Error::Estimation("EM produced no usable starting value".into()))
    }
}

/// Chain seeded from `config.seed`, started at `config.init` or the EM estimate.
pub fn gibbs_run(data: &CensoredData, priors: &GammaPriors, config: &GibbsConfig) -> Result<PosteriorChain> {
    let init = match config.init {
        Some(p) => p,
        None => default_init(data)?,
    };
    gibbs_chain(data, priors, config, init, &mut stream_rng(config.seed, 0))
}

/// Independent chains on streams `0..n_chains` of `config.seed`, run in parallel.
pub fn gibbs_chains(
    data: &CensoredData,
    priors: &GammaPriors,
    config: &GibbsConfig,
    n_chains: usize,
) -> Result<Vec<PosteriorChain>> {
    let init = match config.init {
        Some(p) => p,
        None => default_init(data)?,
    };
    (0..n_chains as u64)
        .into_par_iter()
        .map(|k| gibbs_chain(data, priors, config, init, &mut stream_rng(config.seed, k)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorMeans {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Means of the draws after `burn_in`.
pub fn posterior_mean(chain: &PosteriorChain, burn_in: usize) -> Result<PosteriorMeans> {
    if burn_in >= chain.len() {
        return Err(Error::Config(format!("burn_in {burn_in} leaves no draws out of {}", chain.len())));
    }
    Ok(PosteriorMeans {
        alpha: mean(&chain.alpha_draws[burn_in..]),
        beta: mean(&chain.beta_draws[burn_in..]),
        lambda: mean(&chain.lambda_draws[burn_in..]),
    })
}

/// Shortest window of sorted draws holding `⌊M(1 - η)⌋` of the `M` draws.
/// Ties go to the lowest window.
pub fn hpd_interval(draws: &[f64], eta: f64) -> Result<ConfidenceInterval> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} is outside (0, 1)")));
    }
    let mut d = draws.to_vec();
    d.sort_by(f64::total_cmp);
    let k = (d.len() as f64 * (1.0 - eta) + 1e-9).floor() as usize;
    if k == 0 {
        return Err(Error::InvalidData(format!("{} draws are too few for eta = {eta}", d.len())));
    }
    let mut best = 0;
    for j in 1..=d.len() - k {
        if d[j + k - 1] - d[j] < d[best + k - 1] - d[best] {
            best = j;
        }
    }
    ConfidenceInterval::new(d[best], d[best + k - 1], 1.0 - eta)
}

/// Effective sample size by Geyer's initial positive sequence.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(xs);
    let c: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let acov = |lag: usize| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let c0 = acov(0);
    if c0 == 0.0 {
        return n as f64;
    }
    let mut sum = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = acov(lag) + acov(lag + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        lag += 2;
    }
    let tau = (2.0 * sum / c0 - 1.0).max(1.0);
    n as f64 / tau
}

/// Difference of the two half-chain means in units of its standard error,
/// with per-half standard errors from the effective sample size.
pub fn split_half_z(xs: &[f64]) -> f64 {
    let (a, b) = xs.split_at(xs.len() / 2);
    let se2 = |h: &[f64]| {
        let m = mean(h);
        let var = h.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (h.len() - 1) as f64;
        var / effective_sample_size(h)
    };
    (mean(a) - mean(b)) / (se2(a) + se2(b)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSummary {
    pub means: PosteriorMeans,
    pub hpd_alpha: ConfidenceInterval,
    pub hpd_beta: ConfidenceInterval,
    pub hpd_lambda: ConfidenceInterval,
    pub alpha_acceptance: Option<f64>,
    pub beta_acceptance: Option<f64>,
    pub ess_alpha: f64,
    pub ess_beta: f64,
    pub ess_lambda: f64,
}

pub fn summarize(chain: &PosteriorChain, burn_in: usize, level: f64) -> Result<GibbsSummary> {
    let means = posterior_mean(chain, burn_in)?;
    let eta = 1.0 - level;
    Ok(GibbsSummary {
        means,
        hpd_alpha: hpd_interval(&chain.alpha_draws[burn_in..], eta)?,
        hpd_beta: hpd_interval(&chain.beta_draws[burn_in..], eta)?,
        hpd_lambda: hpd_interval(&chain.lambda_draws[burn_in..], eta)?,
        alpha_acceptance: chain.alpha_stats.acceptance_rate(),
        beta_acceptance: chain.beta_stats.acceptance_rate(),
        ess_alpha: effective_sample_size(&chain.alpha_draws[burn_in..]),
        ess_beta: effective_sample_size(&chain.beta_draws[burn_in..]),
        ess_lambda: effective_sample_size(&chain.lambda_draws[burn_in..]),
    })
}
