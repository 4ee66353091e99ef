use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wehc::em::EmConfig;
use wehc::fisher::BootstrapScheme;
use wehc::harness::{format_tables, harness_settings, reproduce_tables, run_cell, table_rows, ExperimentCell};
use wehc::WeParams;
use wehc_cli::{
    analysis_chain, analyze, chain_csv, density_csv, parse_priors, report_csv, report_text, to_json, AnalysisConfig,
    CliError, CliResult, Source,
};

#[derive(Parser)]
#[command(name = "wehc", version, about = "Weighted exponential estimation from Type-II hybrid censored lifetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum likelihood fit with asymptotic and bootstrap intervals.
    Fit(DataArgs),
    /// Lindley and Gibbs Bayes estimates.
    Bayes(DataArgs),
    /// All methods, optionally with fitted densities and the Gibbs chain.
    Analyze(DataArgs),
    /// Monte Carlo replicates of one censoring design.
    Simulate(SimulateArgs),
    /// The full grid of simulation designs.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boot {
    Nonparametric,
    FailuresOnly,
    Parametric,
}

impl From<Boot> for BootstrapScheme {
    fn from(b: Boot) -> Self {
        match b {
            Boot::Nonparametric => BootstrapScheme::Nonparametric,
            Boot::FailuresOnly => BootstrapScheme::FailuresOnly,
            Boot::Parametric => BootstrapScheme::Parametric,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// File of lifetimes separated by whitespace or commas.
    #[arg(long, conflicts_with = "builtin")]
    data: Option<PathBuf>,
    /// Bundled dataset.
    #[arg(long, default_value = "bjerkedal")]
    builtin: String,
    /// Failure quota R.
    #[arg(short = 'R', long)]
    quota: usize,
    /// Time limit T.
    #[arg(short = 'T', long)]
    time_limit: f64,
    /// `w1,w2,w3,w4` or a preset (flat, bjerkedal-informative).
    #[arg(long, default_value = "flat")]
    priors: String,
    /// Comma-separated methods; defaults depend on the subcommand.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Bootstrap replicates for the alpha interval (0 to skip).
    #[arg(long, default_value_t = 1000)]
    n_boot: usize,
    #[arg(long, value_enum, default_value_t = Boot::Nonparametric)]
    bootstrap: Boot,
    #[arg(long, default_value_t = 11000)]
    n_iter: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    /// Write fitted densities as CSV.
    #[arg(long)]
    density: Option<PathBuf>,
    /// Write the Gibbs chain as CSV.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(short = 'n', long)]
    n: usize,
    #[arg(short = 'R', long)]
    quota: usize,
    #[arg(short = 'T', long)]
    time_limit: f64,
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "mle,lindley,gibbs")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write every replicate as JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn write_out(path: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn data_run(args: DataArgs, default_methods: &[&str]) -> CliResult<()> {
    let source = match args.data {
        Some(p) => Source::File(p),
        None => Source::Builtin(args.builtin),
    };
    let mut config = AnalysisConfig::new(source, args.quota, args.time_limit);
    config.priors = parse_priors(&args.priors)?;
    config.methods = args.methods.unwrap_or_else(|| default_methods.iter().map(|s| s.to_string()).collect());
    config.seed = args.seed;
    config.level = args.level;
    config.n_boot = if config.methods.iter().any(|m| m == "mle") { args.n_boot } else { 0 };
    config.bootstrap = args.bootstrap.into();
    config.gibbs.n_iter = args.n_iter;
    config.gibbs.burn_in = args.burn_in;
    config.density = args.density.is_some();
    let report = analyze(&config)?;
    if let (Some(path), Some(table)) = (&args.density, &report.density) {
        write_out(Some(path), &density_csv(table)?)?;
    }
    if let Some(path) = &args.chain {
        write_out(Some(path), &chain_csv(&analysis_chain(&config, &report)?)?)?;
    }
    let text = match args.format {
        Format::Text => report_text(&report),
        Format::Json => to_json(&report)? + "\n",
        Format::Csv => report_csv(&report)?,
    };
    write_out(args.output.as_ref(), &text)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let cell = ExperimentCell {
        n: args.n,
        quota: args.quota,
        time_limit: args.time_limit,
        true_params: WeParams::new(args.alpha, args.lambda)?,
        n_reps: args.reps,
        methods: args.methods,
        seed: args.seed,
    };
    let run = run_cell(&cell, &harness_settings(), &EmConfig::default())?;
    if let Some(path) = &args.log {
        let mut lines = String::new();
        for rec in &run.log {
            lines += &serde_json::to_string(rec).map_err(|e| CliError::Io(e.to_string()))?;
            lines.push('\n');
        }
        write_out(Some(path), &lines)?;
    }
    let summaries = [run.summary];
    let text = match args.format {
        Format::Text => format_tables(&summaries),
        Format::Json => to_json(&summaries[0])? + "\n",
        Format::Csv => rows_csv(&summaries)?,
    };
    write_out(args.output.as_ref(), &text)
}

fn rows_csv(summaries: &[wehc::harness::CellSummary]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table_rows(summaries) {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

fn tables(args: TablesArgs) -> CliResult<()> {
    let start = Instant::now();
    let summaries = reproduce_tables(args.reps, args.seed, &harness_settings(), &EmConfig::default())?;
    let text = match args.format {
        Format::Text => format_tables(&summaries) + &format!("\n{:.1} s\n", start.elapsed().as_secs_f64()),
        Format::Json => to_json(&summaries)? + "\n",
        Format::Csv => rows_csv(&summaries)?,
    };
    write_out(args.output.as_ref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => data_run(a, &["mle"]),
        Command::Bayes(a) => data_run(a, &["lindley", "gibbs"]),
        Command::Analyze(a) => data_run(a, &["mle", "lindley", "gibbs"]),
        Command::Simulate(a) => simulate(a),
        Command::Tables(a) => tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
