//! Analysis pipeline behind the `wehc` binary: configuration, reports and
//! their JSON, CSV and text renderings.

pub mod ingest;

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wehc::censoring::{CensoredData, CensoringCase, HybridScheme, TiePolicy};
use wehc::em::EmConfig;
use wehc::estimator::{Estimate, EstimatorRegistry, FitContext, MethodSettings};
use wehc::fisher::{bootstrap_ci_alpha, BootstrapConfig, BootstrapResult, BootstrapScheme};
use wehc::gibbs::{gibbs_chain, GibbsConfig, PosteriorChain};
use wehc::lindley::GammaPriors;
use wehc::rng::stream_rng;
use wehc::WeParams;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wehc::Error),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(wehc::Error::Config(_) | wehc::Error::InvalidParameter(_) | wehc::Error::UnknownName { .. }) => {
                "config"
            }
            CliError::Core(wehc::Error::InvalidData(_)) => "data",
            CliError::Core(_) => "estimation",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`, plus position for parse errors.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = serde_json::json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Parse { line, column, .. } = self {
            body["line"] = (*line).into();
            body["column"] = (*column).into();
        }
        serde_json::json!({ "error": body })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Builtin(String),
    File(PathBuf),
}

impl Source {
    pub fn load(&self) -> CliResult<Vec<f64>> {
        match self {
            Source::Builtin(name) => ingest::builtin(name),
            Source::File(path) => ingest::read_file(path),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Source::Builtin(name) => name.clone(),
            Source::File(path) => path.display().to_string(),
        }
    }
}

/// Named prior settings.
pub fn prior_preset(name: &str) -> CliResult<GammaPriors> {
    match name {
        "flat" | "non-informative" => Ok(GammaPriors::non_informative()),
        "bjerkedal-informative" => Ok(GammaPriors::new(1.0, 0.01, 1.5, 3.0)?),
        _ => Err(CliError::Config(format!(
            "unknown prior preset '{name}' (known: flat, non-informative, bjerkedal-informative)"
        ))),
    }
}

/// Priors from a preset name or `w1,w2,w3,w4`.
pub fn parse_priors(text: &str) -> CliResult<GammaPriors> {
    if text.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
        return prior_preset(text);
    }
    let ws: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("priors '{text}' are not four numbers w1,w2,w3,w4")))?;
    match ws[..] {
        [w1, w2, w3, w4] => Ok(GammaPriors::new(w1, w2, w3, w4)?),
        _ => Err(CliError::Config(format!("expected four prior values, got {}", ws.len()))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub source: Source,
    #[serde(rename = "R")]
    pub quota: usize,
    #[serde(rename = "T")]
    pub time_limit: f64,
    pub priors: GammaPriors,
    pub methods: Vec<String>,
    pub seed: u64,
    pub level: f64,
    /// Bootstrap replicates for the α interval; zero skips the bootstrap.
    pub n_boot: usize,
    pub bootstrap: BootstrapScheme,
    pub gibbs: GibbsConfig,
    pub density: bool,
}

impl AnalysisConfig {
    pub fn new(source: Source, quota: usize, time_limit: f64) -> Self {
        Self {
            source,
            quota,
            time_limit,
            priors: GammaPriors::default(),
            methods: vec!["mle".into(), "lindley".into(), "gibbs".into()],
            seed: 1,
            level: 0.95,
            n_boot: 1000,
            bootstrap: BootstrapScheme::default(),
            gibbs: GibbsConfig::default(),
            density: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub source: String,
    pub n: usize,
    #[serde(rename = "R")]
    pub quota: usize,
    #[serde(rename = "T")]
    pub time_limit: f64,
    pub case: CensoringCase,
    pub r: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub estimate: Option<Estimate>,
    pub error: Option<String>,
}

/// Fitted densities on a common grid; `None` where an estimate is not a
/// valid parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub dataset: DatasetReport,
    pub priors: GammaPriors,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
    pub bootstrap_alpha: Option<BootstrapSummary>,
    pub bootstrap_error: Option<String>,
    pub density: Option<DensityTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub scheme: BootstrapScheme,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub used: usize,
    pub failed: usize,
}

impl BootstrapSummary {
    fn new(scheme: BootstrapScheme, b: &BootstrapResult) -> Self {
        Self {
            scheme,
            lower: b.interval.lower,
            upper: b.interval.upper,
            level: b.interval.level,
            used: b.replicates.len(),
            failed: b.failed,
        }
    }
}

impl AnalysisReport {
    pub fn estimate(&self, method: &str) -> Option<&Estimate> {
        self.methods.iter().find(|m| m.method == method).and_then(|m| m.estimate.as_ref())
    }
}

pub const DENSITY_POINTS: usize = 400;

pub fn censor(config: &AnalysisConfig, times: &[f64]) -> CliResult<CensoredData> {
    let scheme = HybridScheme::new(times.len(), config.quota, config.time_limit)
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(CensoredData::apply_scheme(times, scheme, TiePolicy::Allow)?)
}

fn density_table(alpha: f64, lambda: f64, reports: &[MethodReport]) -> CliResult<DensityTable> {
    let upper = WeParams::new(alpha, lambda)?.quantile(0.999)?;
    let x: Vec<f64> = (0..DENSITY_POINTS).map(|i| upper * i as f64 / (DENSITY_POINTS - 1) as f64).collect();
    let columns = reports
        .iter()
        .filter_map(|m| m.estimate.as_ref())
        .map(|e| {
            let we = WeParams::new(e.alpha, e.lambda).ok();
            let ys = x.iter().map(|&v| we.as_ref().and_then(|w| w.pdf(v).ok())).collect();
            (e.method.clone(), ys)
        })
        .collect();
    Ok(DensityTable { x, columns })
}

/// Applies the scheme and runs the requested methods. Method failures are
/// recorded in the report; configuration and data errors abort.
pub fn analyze(config: &AnalysisConfig) -> CliResult<AnalysisReport> {
    let times = config.source.load()?;
    let data = censor(config, &times)?;
    let settings = MethodSettings {
        priors: config.priors,
        level: config.level,
        gibbs: GibbsConfig { seed: config.seed, ..config.gibbs.clone() },
    };
    settings.gibbs.validate()?;
    let registry = EstimatorRegistry::with_defaults(&settings);
    let em = EmConfig::default();
    let ctx = FitContext::new(&data, em, config.seed, 0);
    let mut methods = Vec::new();
    for name in &config.methods {
        let est = registry.get(name)?;
        methods.push(match est.estimate(&ctx) {
            Ok(e) => MethodReport { method: name.clone(), estimate: Some(e), error: None },
            Err(e) => MethodReport { method: name.clone(), estimate: None, error: Some(e.to_string()) },
        });
    }
    let mle_ok = methods.iter().any(|m| m.method == "mle" && m.estimate.is_some());
    let mut bootstrap_alpha = None;
    let mut bootstrap_error = None;
    if mle_ok && config.n_boot > 0 {
        let cfg = BootstrapConfig {
            n_boot: config.n_boot,
            level: config.level,
            scheme: config.bootstrap,
            seed: config.seed,
            keep_boundary: true,
        };
        match bootstrap_ci_alpha(&data, &cfg, &em) {
            Ok(b) => bootstrap_alpha = Some(BootstrapSummary::new(config.bootstrap, &b)),
            Err(e @ wehc::Error::Config(_)) => return Err(e.into()),
            Err(e) => bootstrap_error = Some(e.to_string()),
        }
    }
    let density = if config.density {
        let fit = ctx.converged_mle().map_err(|e| CliError::Config(format!("density grid needs the MLE: {e}")))?;
        Some(density_table(fit.alpha_hat, fit.lambda_hat, &methods)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        dataset: DatasetReport {
            source: config.source.label(),
            n: data.n(),
            quota: config.quota,
            time_limit: config.time_limit,
            case: data.case(),
            r: data.r(),
            c: data.c(),
        },
        priors: config.priors,
        seed: config.seed,
        methods,
        bootstrap_alpha,
        bootstrap_error,
        density,
    })
}

/// The Gibbs chain of an analysis, as run by the `gibbs` method.
pub fn analysis_chain(config: &AnalysisConfig, report: &AnalysisReport) -> CliResult<PosteriorChain> {
    let times = config.source.load()?;
    let data = censor(config, &times)?;
    let init = match report.estimate("gibbs").map(|e| &e.details) {
        Some(wehc::estimator::Details::Gibbs { init, .. }) => *init,
        _ => return Err(CliError::Config("chain export needs the gibbs method".into())),
    };
    let cfg = GibbsConfig { seed: config.seed, ..config.gibbs.clone() };
    Ok(gibbs_chain(&data, &config.priors, &cfg, init, &mut stream_rng(config.seed, 0))?)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct EstimateRow<'a> {
    method: &'a str,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    alpha_lower: Option<f64>,
    alpha_upper: Option<f64>,
    beta_lower: Option<f64>,
    beta_upper: Option<f64>,
    lambda_lower: Option<f64>,
    lambda_upper: Option<f64>,
    error: Option<&'a str>,
}

/// One row per method.
pub fn report_csv(report: &AnalysisReport) -> CliResult<String> {
    let rows = report.methods.iter().map(|m| {
        let e = m.estimate.as_ref();
        EstimateRow {
            method: &m.method,
            alpha: e.map(|e| e.alpha),
            beta: e.map(|e| e.beta),
            lambda: e.map(|e| e.lambda),
            alpha_lower: e.and_then(|e| e.alpha_interval).map(|c| c.lower),
            alpha_upper: e.and_then(|e| e.alpha_interval).map(|c| c.upper),
            beta_lower: e.and_then(|e| e.beta_interval).map(|c| c.lower),
            beta_upper: e.and_then(|e| e.beta_interval).map(|c| c.upper),
            lambda_lower: e.and_then(|e| e.lambda_interval).map(|c| c.lower),
            lambda_upper: e.and_then(|e| e.lambda_interval).map(|c| c.upper),
            error: m.error.as_deref(),
        }
    });
    csv_string(rows)
}

/// Columns `x` and one fitted density per method.
pub fn density_csv(table: &DensityTable) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec!["x".to_string()];
    header.extend(table.columns.iter().map(|c| c.0.clone()));
    w.write_record(&header).map_err(io)?;
    for (i, x) in table.x.iter().enumerate() {
        let mut rec = vec![x.to_string()];
        rec.extend(table.columns.iter().map(|c| c.1[i].map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

/// Columns `iter, alpha, beta, lambda`.
pub fn chain_csv(chain: &PosteriorChain) -> CliResult<String> {
    #[derive(Serialize)]
    struct Row {
        iter: usize,
        alpha: f64,
        beta: f64,
        lambda: f64,
    }
    csv_string((0..chain.len()).map(|i| Row {
        iter: i + 1,
        alpha: chain.alpha_draws[i],
        beta: chain.beta_draws[i],
        lambda: chain.lambda_draws[i],
    }))
}

fn interval_text(ci: Option<wehc::fisher::ConfidenceInterval>) -> String {
    match ci {
        Some(c) => format!("({:.4}, {:.4})", c.lower, c.upper),
        None => "-".into(),
    }
}

pub fn report_text(report: &AnalysisReport) -> String {
    let d = &report.dataset;
    let mut out = String::new();
    let _ = writeln!(out, "data {}: n = {}, R = {}, T = {}", d.source, d.n, d.quota, d.time_limit);
    let _ = writeln!(out, "case {}, r = {}, c = {}", d.case, d.r, d.c);
    let p = &report.priors;
    let _ = writeln!(out, "priors w = ({}, {}, {}, {})\n", p.w1, p.w2, p.w3, p.w4);
    let _ = writeln!(out, "{:<8} {:>10} {:>10} {:>10}  {:<22} {:<22} {:<22}", "method", "beta", "alpha", "lambda", "beta CI", "alpha CI", "lambda CI");
    for m in &report.methods {
        match (&m.estimate, &m.error) {
            (Some(e), _) => {
                let _ = writeln!(
                    out,
                    "{:<8} {:>10.4} {:>10.4} {:>10.4}  {:<22} {:<22} {:<22}",
                    m.method,
                    e.beta,
                    e.alpha,
                    e.lambda,
                    interval_text(e.beta_interval),
                    interval_text(e.alpha_interval),
                    interval_text(e.lambda_interval)
                );
                for w in &e.warnings {
                    let _ = writeln!(out, "         warning: {w}");
                }
            }
            (None, err) => {
                let _ = writeln!(out, "{:<8} failed: {}", m.method, err.as_deref().unwrap_or("unknown error"));
            }
        }
    }
    if let Some(b) = &report.bootstrap_alpha {
        let _ = writeln!(
            out,
            "\nbootstrap alpha {:.0}% interval ({:.4}, {:.4}) from {} replicates, {} failed",
            100.0 * b.level,
            b.lower,
            b.upper,
            b.used,
            b.failed
        );
    }
    if let Some(e) = &report.bootstrap_error {
        let _ = writeln!(out, "\nbootstrap alpha interval unavailable: {e}");
    }
    out
}
