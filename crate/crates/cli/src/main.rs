mod config;
mod run;
mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_kv, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "trigzeros", version, about = "Zero counts of random trigonometric polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Zero counts of X_N over many replications
    Simulate(Flags),
    /// Zero counts of sample paths of the sinc-kernel Gaussian process
    Gp(Flags),
    /// Kac-Rice moments of the zero count of the sinc-kernel process
    Rice(Flags),
    /// Compare count laws across coefficient distributions
    Compare(Flags),
    /// Four-panel histogram for Rademacher, uniform, Gaussian and Cauchy coefficients
    Figure1(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Flat key = value file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Degree N
    #[arg(long)]
    n: Option<String>,
    /// Interval as lo:hi
    #[arg(long)]
    interval: Option<String>,
    /// Coefficient law(s), comma separated: rademacher, uniform, gaussian, cauchy, exppsi:<file>
    #[arg(long)]
    dist: Option<String>,
    /// Replications (Monte Carlo nodes for `rice`)
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// scan, companion or both
    #[arg(long)]
    method: Option<String>,
    /// Diagonal exclusion width for Kac-Rice integrals
    #[arg(long)]
    epsilon: Option<String>,
    /// Highest factorial moment reported
    #[arg(long = "m-max")]
    m_max: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Spectral frequencies per sinc-process path
    #[arg(long)]
    frequencies: Option<String>,
    /// Moment references for `compare`: rice, sinc or none (comma separated)
    #[arg(long)]
    reference: Option<String>,
    /// Worker threads (does not change results)
    #[arg(long)]
    workers: Option<String>,
    /// Fixed coefficients 'a1,..;b1,..' used for every replication
    #[arg(long = "debug-coeffs", hide = true)]
    debug_coeffs: Option<String>,
}

impl Flags {
    fn to_map(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("n", &self.n),
            ("interval", &self.interval),
            ("dist", &self.dist),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("method", &self.method),
            ("epsilon", &self.epsilon),
            ("m-max", &self.m_max),
            ("out", &self.out),
            ("frequencies", &self.frequencies),
            ("reference", &self.reference),
            ("workers", &self.workers),
            ("debug-coeffs", &self.debug_coeffs),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }
}

fn resolve(command: Command, flags: &Flags) -> Result<ExperimentConfig, String> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_kv(&text).map_err(|e| e.to_string())?
        }
        None => BTreeMap::new(),
    };
    ExperimentConfig::resolve(command, file, flags.to_map()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Simulate(f) => (Command::Simulate, f),
        Cmd::Gp(f) => (Command::Gp, f),
        Cmd::Rice(f) => (Command::Rice, f),
        Cmd::Compare(f) => (Command::Compare, f),
        Cmd::Figure1(f) => (Command::Figure1, f),
    };
    let cfg = match resolve(command, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run::dispatch(&cfg) {
        Ok(text) => {
            if !text.is_empty() {
                println!("{text}");
            }
            println!("outputs written to {}", cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
