//! Monte Carlo study: repeated simulation, censoring and estimation with
//! summaries of average estimate, MSE and average interval length.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censoring::{generate_censored, HybridScheme};
use crate::dist::WeParams;
use crate::em::EmConfig;
use crate::error::{Error, Result};
use crate::estimator::{Estimate, EstimatorRegistry, FitContext, MethodSettings};
use crate::gibbs::GibbsConfig;
use crate::rng::stream_rng;

/// Replicates with more failures than this fraction flag the method.
pub const FAILURE_FLAG: f64 = 0.10;

const GIBBS_SEED_OFFSET: u64 = 0x5eed_0000_0000_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub n: usize,
    #[serde(rename = "R")]
    pub quota: usize,
    #[serde(rename = "T")]
    pub time_limit: f64,
    pub true_params: WeParams,
    pub n_reps: usize,
    pub methods: Vec<String>,
    pub seed: u64,
}

impl ExperimentCell {
    pub fn validate(&self) -> Result<()> {
        HybridScheme::new(self.n, self.quota, self.time_limit)?;
        if self.n_reps == 0 {
            return Err(Error::Config("n_reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub rep: usize,
    pub method: String,
    pub estimate: Option<Estimate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub average: f64,
    pub mse: f64,
    /// Standard error of the MSE across replicates.
    pub mse_se: f64,
    pub average_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub lambda: ParamSummary,
    pub alpha: ParamSummary,
    pub n_ok: usize,
    pub n_failed: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: ExperimentCell,
    pub methods: Vec<MethodSummary>,
}

impl CellSummary {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRun {
    pub summary: CellSummary,
    pub log: Vec<ReplicateRecord>,
}

/// Method settings used inside the study: non-informative priors and
/// 3000-draw chains with 500 burn-in.
pub fn harness_settings() -> MethodSettings {
    MethodSettings {
        gibbs: GibbsConfig { n_iter: 3_000, burn_in: 500, ..GibbsConfig::default() },
        ..MethodSettings::default()
    }
}

fn param_summary(values: &[(f64, Option<f64>)], truth: f64) -> ParamSummary {
    let k = values.len() as f64;
    if values.is_empty() {
        return ParamSummary { average: f64::NAN, mse: f64::NAN, mse_se: f64::NAN, average_length: None };
    }
    let average = values.iter().map(|v| v.0).sum::<f64>() / k;
    let sq: Vec<f64> = values.iter().map(|v| (v.0 - truth).powi(2)).collect();
    let mse = sq.iter().sum::<f64>() / k;
    let mse_se = if values.len() > 1 {
        (sq.iter().map(|s| (s - mse).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        0.0
    };
    let lengths: Vec<f64> = values.iter().filter_map(|v| v.1).collect();
    let average_length = (!lengths.is_empty()).then(|| lengths.iter().sum::<f64>() / lengths.len() as f64);
    ParamSummary { average, mse, mse_se, average_length }
}

/// Aggregates a replicate log. Records are ordered by replicate before
/// summation, so the result does not depend on log order.
pub fn summarize_log(cell: &ExperimentCell, log: &[ReplicateRecord]) -> CellSummary {
    let mut sorted: Vec<&ReplicateRecord> = log.iter().collect();
    sorted.sort_by_key(|r| r.rep);
    let methods = cell
        .methods
        .iter()
        .map(|name| {
            let recs: Vec<&&ReplicateRecord> = sorted.iter().filter(|r| &r.method == name).collect();
            let ok: Vec<&Estimate> = recs.iter().filter_map(|r| r.estimate.as_ref()).collect();
            let n_failed = recs.len() - ok.len();
            let lam: Vec<(f64, Option<f64>)> =
                ok.iter().map(|e| (e.lambda, e.lambda_interval.map(|c| c.length()))).collect();
            let alp: Vec<(f64, Option<f64>)> =
                ok.iter().map(|e| (e.alpha, e.alpha_interval.map(|c| c.length()))).collect();
            MethodSummary {
                method: name.clone(),
                lambda: param_summary(&lam, cell.true_params.lambda()),
                alpha: param_summary(&alp, cell.true_params.alpha()),
                n_ok: ok.len(),
                n_failed,
                flagged: n_failed as f64 > FAILURE_FLAG * cell.n_reps as f64,
            }
        })
        .collect();
    CellSummary { cell: cell.clone(), methods }
}

fn run_replicate(cell: &ExperimentCell, reg: &EstimatorRegistry, em: &EmConfig, rep: usize) -> Vec<ReplicateRecord> {
    let scheme = HybridScheme { n: cell.n, quota: cell.quota, time_limit: cell.time_limit };
    let data = generate_censored(&cell.true_params, scheme, &mut stream_rng(cell.seed, rep as u64));
    let record = |method: &str, res: Result<Estimate>| match res {
        Ok(e) => ReplicateRecord { rep, method: method.into(), estimate: Some(e), error: None },
        Err(e) => ReplicateRecord { rep, method: method.into(), estimate: None, error: Some(e.to_string()) },
    };
    let data = match data {
        Ok(d) => d,
        Err(e) => return cell.methods.iter().map(|m| record(m, Err(e.clone()))).collect(),
    };
    let ctx = FitContext::new(&data, *em, cell.seed.wrapping_add(GIBBS_SEED_OFFSET), rep as u64);
    cell.methods
        .iter()
        .map(|m| record(m, reg.get(m).and_then(|est| est.estimate(&ctx))))
        .collect()
}

/// Runs every replicate of `cell` in parallel. Replicate `k` draws its data
/// from stream `k` of `cell.seed`.
pub fn run_cell(cell: &ExperimentCell, settings: &MethodSettings, em: &EmConfig) -> Result<CellRun> {
    cell.validate()?;
    let reg = EstimatorRegistry::with_defaults(settings);
    for m in &cell.methods {
        reg.get(m)?;
    }
    let log: Vec<ReplicateRecord> = (0..cell.n_reps)
        .into_par_iter()
        .map(|rep| run_replicate(cell, &reg, em, rep))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(CellRun { summary: summarize_log(cell, &log), log })
}

/// The twelve `(N, T, R)` cells of the study, true `α = 2.5`, `λ = 3`.
pub fn table_cells(reps: usize, seed: u64, methods: &[&str]) -> Vec<ExperimentCell> {
    let truth = WeParams::new(2.5, 3.0).expect("valid parameters");
    let mut cells = Vec::new();
    for (n, quotas) in [(40usize, [25usize, 30, 35]), (50, [35, 40, 45])] {
        for t in [1.0, 2.0] {
            for quota in quotas {
                let index = cells.len() as u64;
                cells.push(ExperimentCell {
                    n,
                    quota,
                    time_limit: t,
                    true_params: truth,
                    n_reps: reps,
                    methods: methods.iter().map(|m| m.to_string()).collect(),
                    seed: seed.wrapping_add(index.wrapping_mul(1_000_003)),
                });
            }
        }
    }
    cells
}

/// Runs all twelve cells with MLE, Lindley and Gibbs.
pub fn reproduce_tables(reps: usize, seed: u64, settings: &MethodSettings, em: &EmConfig) -> Result<Vec<CellSummary>> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    table_cells(reps, seed, &["mle", "lindley", "gibbs"])
        .iter()
        .map(|c| run_cell(c, settings, em).map(|r| r.summary))
        .collect()
}

/// One row per cell, method and parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    #[serde(rename = "T")]
    pub time_limit: f64,
    #[serde(rename = "R")]
    pub quota: usize,
    pub method: String,
    pub parameter: String,
    pub average: f64,
    pub mse: f64,
    pub mse_se: f64,
    pub average_length: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
    pub flagged: bool,
}

pub fn table_rows(summaries: &[CellSummary]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for s in summaries {
        for m in &s.methods {
            for (parameter, p) in [("lambda", &m.lambda), ("alpha", &m.alpha)] {
                rows.push(TableRow {
                    n: s.cell.n,
                    time_limit: s.cell.time_limit,
                    quota: s.cell.quota,
                    method: m.method.clone(),
                    parameter: parameter.into(),
                    average: p.average,
                    mse: p.mse,
                    mse_se: p.mse_se,
                    average_length: p.average_length,
                    n_ok: m.n_ok,
                    n_failed: m.n_failed,
                    flagged: m.flagged,
                });
            }
        }
    }
    rows
}

fn cell_text(p: &ParamSummary) -> String {
    let mut s = format!("{:.3}({:.3})", p.average, p.mse);
    if let Some(l) = p.average_length {
        let _ = write!(s, "{l:.3}");
    }
    s
}

/// Text tables in `avg(MSE)length` layout, one table per `(N, T)`, a λ line
/// and an α line per method. Flagged methods are marked with `*`.
pub fn format_tables(summaries: &[CellSummary]) -> String {
    let mut groups: Vec<(usize, f64, Vec<&CellSummary>)> = Vec::new();
    for s in summaries {
        match groups.iter_mut().find(|g| g.0 == s.cell.n && g.1 == s.cell.time_limit) {
            Some(g) => g.2.push(s),
            None => groups.push((s.cell.n, s.cell.time_limit, vec![s])),
        }
    }
    let mut out = String::new();
    for (n, t, cells) in groups {
        let _ = writeln!(out, "N={n}, T={t}");
        let _ = write!(out, "{:<10}", "");
        for c in &cells {
            let _ = write!(out, " {:<24}", format!("R={}", c.cell.quota));
        }
        out.push('\n');
        let methods: Vec<String> = cells[0].methods.iter().map(|m| m.method.clone()).collect();
        for name in &methods {
            for (k, label) in [(0, name.as_str()), (1, "")] {
                let _ = write!(out, "{label:<10}");
                for c in &cells {
                    let text = match c.method(name) {
                        Some(m) => {
                            let p = if k == 0 { &m.lambda } else { &m.alpha };
                            format!("{}{}", cell_text(p), if m.flagged { "*" } else { "" })
                        }
                        None => "-".into(),
                    };
                    let _ = write!(out, " {text:<24}");
                }
                out.push('\n');
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(reps: usize, methods: &[&str]) -> ExperimentCell {
        ExperimentCell {
            n: 40,
            quota: 30,
            time_limit: 1.0,
            true_params: WeParams::new(2.5, 3.0).unwrap(),
            n_reps: reps,
            methods: methods.iter().map(|m| m.to_string()).collect(),
            seed: 17,
        }
    }

    fn quick() -> MethodSettings {
        MethodSettings {
            gibbs: GibbsConfig { n_iter: 300, burn_in: 100, ..GibbsConfig::default() },
            ..MethodSettings::default()
        }
    }

    #[test]
    fn single_replicate_summary_is_that_fit() {
        // first seed whose replicate 0 converges
        let run = (0..20)
            .map(|s| run_cell(&ExperimentCell { seed: s, ..cell(1, &["mle"]) }, &quick(), &EmConfig::default()).unwrap())
            .find(|r| r.summary.methods[0].n_ok == 1)
            .unwrap();
        let e = run.log[0].estimate.as_ref().unwrap();
        let m = &run.summary.methods[0];
        assert_eq!(m.alpha.average, e.alpha);
        assert_eq!(m.lambda.mse, (e.lambda - 3.0).powi(2));
        assert_eq!(m.alpha.average_length, Some(e.alpha_interval.unwrap().length()));
    }

    #[test]
    fn mse_replays_from_the_log() {
        let c = cell(12, &["mle", "lindley"]);
        let run = run_cell(&c, &quick(), &EmConfig::default()).unwrap();
        for m in &run.summary.methods {
            let mut sum = 0.0;
            let mut k = 0;
            for r in run.log.iter().filter(|r| r.method == m.method) {
                if let Some(e) = &r.estimate {
                    sum += (e.alpha - 2.5) * (e.alpha - 2.5);
                    k += 1;
                }
            }
            assert_eq!(k, m.n_ok);
            assert!((sum / k as f64 - m.alpha.mse).abs() <= 1e-12 * m.alpha.mse.max(1.0));
            assert_eq!(m.n_ok + m.n_failed, 12);
        }
        assert!(run.summary.method("lindley").unwrap().lambda.average_length.is_none());
    }

    #[test]
    fn summaries_are_deterministic_and_order_free() {
        let c = cell(6, &["mle", "gibbs"]);
        let a = run_cell(&c, &quick(), &EmConfig::default()).unwrap();
        let b = run_cell(&c, &quick(), &EmConfig::default()).unwrap();
        assert_eq!(a, b);
        let mut reversed = a.log.clone();
        reversed.reverse();
        assert_eq!(summarize_log(&c, &reversed), a.summary);
    }

    #[test]
    fn unknown_methods_are_rejected_up_front() {
        assert!(run_cell(&cell(2, &["mle", "bogus"]), &quick(), &EmConfig::default()).is_err());
        assert!(run_cell(&cell(0, &["mle"]), &quick(), &EmConfig::default()).is_err());
    }

    #[test]
    fn table_layout() {
        let cells = table_cells(1, 3, &["mle", "lindley", "gibbs"]);
        assert_eq!(cells.len(), 12);
        let summaries: Vec<CellSummary> = cells
            .iter()
            .map(|c| run_cell(&ExperimentCell { n_reps: 2, ..c.clone() }, &quick(), &EmConfig::default()).unwrap().summary)
            .collect();
        let rows = table_rows(&summaries);
        assert_eq!(rows.len(), 4 * 3 * 3 * 2);
        let text = format_tables(&summaries);
        assert_eq!(text.matches("N=").count(), 4);
        assert_eq!(text.matches("R=").count(), 12);
        assert!(text.contains("N=50, T=2"));
    }
}
