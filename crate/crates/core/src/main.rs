use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carms::experiments::correlation::{run_correlation, CorrelationConfig, PairSampler};
use carms::experiments::output::{write_records, OutputFormat};
use carms::experiments::selfcheck::{run_selfcheck, Level, SelfCheckOptions};
use carms::experiments::toy::{run_toy, ToyConfig};
use carms::experiments::{parse_budget, parse_clip};
use carms::{CopulaKind, Error, EstimatorKind};

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "carms", version, about = "Antithetic categorical gradient estimator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gradient variance of each method on the toy objective.
    Toy(ToyArgs),
    /// Correlation matrix between the coordinates of an antithetic pair.
    Correlation(CorrelationArgs),
    /// Run the oracle-backed invariant checks.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// csv or jsonl
    #[arg(long, default_value = "csv")]
    output: String,
    /// Destination file; stdout when omitted.
    #[arg(long)]
    out_path: Option<PathBuf>,
}

#[derive(Args)]
struct CopulaArgs {
    /// dirichlet or gaussian
    #[arg(long, default_value = "dirichlet")]
    copula: String,
    /// Gaussian equicorrelation; defaults to -1/(N-1).
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
}

#[derive(Args)]
struct ToyArgs {
    /// Comma-separated subset of carms-i, carms-g, loorf, reinforce.
    #[arg(long, value_delimiter = ',', default_value = "carms-i,carms-g,loorf,reinforce")]
    method: Vec<String>,
    #[command(flatten)]
    copula: CopulaArgs,
    #[arg(long, default_value_t = 3)]
    categories: usize,
    #[arg(long, default_value_t = 3)]
    dims: usize,
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Comma-separated Dirichlet concentrations.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Monte Carlo draws per variance estimate.
    #[arg(long, default_value_t = 10_000)]
    inner: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ratio ceiling, or "none".
    #[arg(long, default_value = "10")]
    clip: String,
    /// all, auto, or a number of extra random orderings.
    #[arg(long, default_value = "auto")]
    orderings: String,
    /// Append wall-clock milliseconds to each record.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CorrelationArgs {
    /// inverse-cdf, gumbel or independent
    #[arg(long, default_value = "inverse-cdf")]
    method: String,
    #[command(flatten)]
    copula: CopulaArgs,
    #[arg(long, default_value_t = 3)]
    categories: usize,
    /// Samples per antithetic draw; the first two form the pair.
    #[arg(long, default_value_t = 3)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    /// Comma-separated marginal probabilities; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SelfcheckArgs {
    /// fast or full
    #[arg(long, default_value = "fast")]
    level: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Negate one ratio entry to demonstrate that the suite catches it.
    #[arg(long)]
    inject_fault: bool,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out_path: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Check(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::UnsupportedPath(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn parse_copula(args: &CopulaArgs) -> Result<CopulaKind, Failure> {
    match args.copula.as_str() {
        "dirichlet" => Ok(CopulaKind::Dirichlet),
        "gaussian" => Ok(CopulaKind::Gaussian { rho: args.rho }),
        other => Err(Failure::Usage(format!("unknown copula '{other}'"))),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, Failure> {
    OutputFormat::parse(s).ok_or_else(|| Failure::Usage(format!("unknown output format '{s}'")))
}

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn toy(args: ToyArgs) -> Result<(), Failure> {
    let methods = args
        .method
        .iter()
        .map(|m| EstimatorKind::parse(m).ok_or_else(|| Failure::Usage(format!("unknown method '{m}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let config = ToyConfig {
        methods,
        copula: parse_copula(&args.copula)?,
        categories: args.categories,
        dims: args.dims,
        samples: args.samples,
        alphas: args.alpha,
        trials: args.trials,
        inner: args.inner,
        seed: args.seed,
        clip: parse_clip(&args.clip)?,
        budget: parse_budget(&args.orderings)?,
        timing: args.timing,
    };
    let format = parse_format(&args.out.output)?;
    let records = run_toy(&config)?;
    write_records(sink(&args.out.out_path)?, &records, format)?;
    Ok(())
}

fn correlation(args: CorrelationArgs) -> Result<(), Failure> {
    let sampler = PairSampler::parse(&args.method)
        .ok_or_else(|| Failure::Usage(format!("unknown method '{}'", args.method)))?;
    let config = CorrelationConfig {
        sampler,
        copula: parse_copula(&args.copula)?,
        categories: args.categories,
        samples: args.samples,
        draws: args.draws,
        probs: args.probs,
        seed: args.seed,
    };
    let format = parse_format(&args.out.output)?;
    let records = run_correlation(&config)?;
    write_records(sink(&args.out.out_path)?, &records, format)?;
    Ok(())
}

fn selfcheck(args: SelfcheckArgs) -> Result<(), Failure> {
    let level = Level::parse(&args.level)
        .ok_or_else(|| Failure::Usage(format!("unknown level '{}'", args.level)))?;
    let options = SelfCheckOptions { level, seed: args.seed, inject_fault: args.inject_fault };
    let report = run_selfcheck(&options)?;
    let mut out = sink(&args.out_path)?;
    out.write_all(report.render().as_bytes())?;
    out.flush()?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing checks: {}", report.failed().join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Toy(a) => toy(a),
        Command::Correlation(a) => correlation(a),
        Command::Selfcheck(a) => selfcheck(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CHECK_FAILURE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CHECK_FAILURE)
        }
    }
}
