//! Command-line front end: `simulate`, `fit`, `replicate` and `diagnose`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
//! 3 malformed input data. Failures also print one machine-readable line to
//! stderr: `qbiv-error kind=<usage|data|runtime> code=<n> message="..."`.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ChainSection, Config, DiagnoseSection, FitSection, HyperSection, ReplicateSection, ScaleArg, ScenarioSection};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QBIV_OUTPUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    Core(qbiv::Error),
}

impl From<qbiv::Error> for CliError {
    fn from(e: qbiv::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::Core(qbiv::Error::InvalidParameter(_)) => "usage",
            CliError::Core(e) if e.is_data_error() => "data",
            CliError::Runtime(_) | CliError::Core(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 2,
            "data" => 3,
            _ => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    pub fn machine_line(&self) -> String {
        format!(
            "qbiv-error kind={} code={} message={:?}",
            self.kind(),
            self.exit_code(),
            self.message()
        )
    }
}

#[derive(Debug, Parser)]
#[command(name = "qbiv", version, about = "Quasi-Bayesian IV variable selection")]
pub struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and write it as CSV files.
    Simulate(ScenarioArgs),
    /// Run the sampler on a dataset and write a posterior summary.
    Fit(FitArgs),
    /// Run repeated simulate-and-fit replicates and write aggregate metrics.
    Replicate(ReplicateArgs),
    /// Report restricted-eigenvalue constants, the contraction radius and,
    /// when the truth is known, the share of draws inside the radius.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Data-generating design (1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub setup: Option<u8>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Setup 1: number of endogenous regressors. Setup 2: instruments per regressor.
    #[arg(long = "m-or-t", visible_aliases = ["m", "t"])]
    pub m_or_t: Option<usize>,
    #[arg(long)]
    pub snr: Option<f64>,
    /// Base seed; replicate r uses a seed derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl From<ScenarioArgs> for ScenarioSection {
    fn from(a: ScenarioArgs) -> Self {
        Self {
            setup: a.setup,
            n: a.n,
            p: a.p,
            m_or_t: a.m_or_t,
            snr: a.snr,
            seed: a.seed,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct HyperArgs {
    /// Quasi-likelihood constant λ. Default: n (Setup 1 and `fit`) or n^(1/3) (Setup 2).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Whether λ refers to the raw or to the unit-norm instruments.
    #[arg(long, value_enum)]
    pub lambda_scale: Option<ScaleArg>,
    /// Slab variance 1/ρ². Default: log(pq)/√n.
    #[arg(long)]
    pub slab_variance: Option<f64>,
    /// Spike variance γ. Default: 10/p.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Prior inclusion exponent: q = p^-(u+1).
    #[arg(long)]
    pub u: Option<f64>,
    /// Sparsity cap. Default: min(p, floor(n / ln p)).
    #[arg(long)]
    pub s_bar: Option<usize>,
    /// SCAD penalty level for the initializer.
    #[arg(long)]
    pub lambda_scad: Option<f64>,
    #[arg(long)]
    pub scad_a: Option<f64>,
    /// Inclusion-probability threshold for the selected model.
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl From<HyperArgs> for HyperSection {
    fn from(a: HyperArgs) -> Self {
        Self {
            lambda: a.lambda,
            lambda_scale: a.lambda_scale,
            slab_variance: a.slab_variance,
            gamma: a.gamma,
            u: a.u,
            s_bar: a.s_bar,
            lambda_scad: a.lambda_scad,
            scad_a: a.scad_a,
            threshold: a.threshold,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub thin: Option<u64>,
    /// Chain seed for `fit` and `diagnose` on a dataset.
    #[arg(long)]
    pub chain_seed: Option<u64>,
    /// Sweeps between full recomputations of the cached quantities.
    #[arg(long)]
    pub refresh_every: Option<u64>,
    /// Probability of a single-flip move; the rest are swaps.
    #[arg(long)]
    pub flip_mix: Option<f64>,
}

impl From<ChainArgs> for ChainSection {
    fn from(a: ChainArgs) -> Self {
        Self {
            sweeps: a.sweeps,
            burn_in: a.burn_in,
            thin: a.thin,
            seed: a.chain_seed,
            refresh_every: a.refresh_every,
            flip_mix: a.flip_mix,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    /// Directory holding y.csv, x.csv, w.csv and optionally map.txt.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Credible level of the reported intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// Also write the per-sweep trace.
    #[arg(long)]
    pub emit_trace: bool,
    /// Also write histogram data and raw draws for one coordinate.
    #[arg(long)]
    pub emit_plotdata: bool,
    /// 1-based regressor index used by --emit-plotdata.
    #[arg(long)]
    pub coordinate: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReplicateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Number of replicates R.
    #[arg(long, short = 'r')]
    pub replicates: Option<usize>,
    /// Append block MSEs averaged per coordinate.
    #[arg(long)]
    pub per_coordinate_mse: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DiagnoseArgs {
    /// Dataset directory; without it a scenario is simulated.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Single-column CSV with the true coefficients for a dataset.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Multiplier M of the contraction radius.
    #[arg(long = "big-m")]
    pub big_m: Option<f64>,
    /// Multiplier m of the inactive-coordinate radius m√(γp).
    #[arg(long = "small-m")]
    pub small_m: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// True support size used in the radius when no truth is given.
    #[arg(long)]
    pub s_star: Option<usize>,
    /// Number of random patterns used to estimate the design constants.
    #[arg(long)]
    pub patterns: Option<usize>,
    /// Enumerate every admissible pattern instead (small p only).
    #[arg(long)]
    pub exhaustive: bool,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Command {
    /// Settings given on the command line, as a sparse config overlay.
    fn overlay(&self) -> Config {
        let mut c = Config::default();
        match self {
            Command::Simulate(a) => c.scenario = a.clone().into(),
            Command::Fit(a) => {
                c.hyper = a.hyper.clone().into();
                c.chain = a.chain.clone().into();
                c.fit = FitSection {
                    data: a.data.clone(),
                    level: a.level,
                    emit_trace: flag(a.emit_trace),
                    emit_plotdata: flag(a.emit_plotdata),
                    coordinate: a.coordinate,
                    bins: a.bins,
                };
            }
            Command::Replicate(a) => {
                c.scenario = a.scenario.clone().into();
                c.hyper = a.hyper.clone().into();
                c.chain = a.chain.clone().into();
                c.replicate = ReplicateSection {
                    replicates: a.replicates,
                    per_coordinate_mse: flag(a.per_coordinate_mse),
                };
            }
            Command::Diagnose(a) => {
                c.scenario = a.scenario.clone().into();
                c.hyper = a.hyper.clone().into();
                c.chain = a.chain.clone().into();
                c.fit.data = a.data.clone();
                c.diagnose = DiagnoseSection {
                    big_m: a.big_m,
                    small_m: a.small_m,
                    sigma0: a.sigma0,
                    s_star: a.s_star,
                    patterns: a.patterns,
                    exhaustive: flag(a.exhaustive),
                    truth: a.truth.clone(),
                };
            }
        }
        c
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut cfg = cli.command.overlay().or(file).or(Config::defaults());
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = Some(dir);
    }
    match &cli.command {
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Fit(_) => commands::fit(&cfg),
        Command::Replicate(_) => commands::replicate(&cfg),
        Command::Diagnose(_) => commands::diagnose(&cfg),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                eprintln!("{}", CliError::Usage(e.kind().to_string()).machine_line());
            }
            return code;
        }
    };
    init_logging(cli.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}
