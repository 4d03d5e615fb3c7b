//! `symsub`: run a maximization algorithm on an instance file and compare it
//! with the brute-force optimum.

mod report;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use report::Format;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Parse = 1,
    Flags = 2,
    OracleLimit = 3,
    SelfCheckFailed = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Failure {
            exit,
            message: message.into(),
        }
    }

    pub fn flags(message: impl Into<String>) -> Self {
        Self::new(Exit::Flags, message)
    }
}

impl From<symsub::Error> for Failure {
    fn from(e: symsub::Error) -> Self {
        use symsub::Error as E;
        let exit = match e {
            E::InvalidArgument(_) | E::UnsupportedPolytope(_) | E::Infeasible | E::TooLarge { .. } => Exit::Flags,
            _ => Exit::Parse,
        };
        Failure::new(exit, e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Mcg,
    DmcgSymmetric,
    DmcgGeneral,
    TwoSided,
    WelfareRandom,
    BruteUnconstrained,
    BruteCardinality,
    BruteCardinalityLe,
    BrutePolytope,
    BruteWelfare,
}

impl Algorithm {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_owned()
    }
}

#[derive(Debug, Parser)]
#[command(name = "symsub", version, about = "Submodular maximization experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,

    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,

    /// Cardinality (dmcg, brute-cardinality), budget (mcg on a bare
    /// objective) or player count (welfare on a bare objective).
    #[arg(long)]
    k: Option<usize>,

    /// Stopping time of the continuous algorithms.
    #[arg(long = "T")]
    t: Option<f64>,

    #[arg(long)]
    steps: Option<usize>,

    /// Samples per multilinear evaluation, or trials for welfare and the
    /// self-check.
    #[arg(long)]
    samples: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Fail with exit code 3 when the optimum cannot be computed.
    #[arg(long)]
    require_oracle: bool,

    /// Run the built-in lemma and property suite.
    #[arg(long)]
    self_check: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ratio curve of the symmetric double greedy over a k/n grid.
    Sweep(sweep::SweepArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Exit::Flags as u8),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Some(Command::Sweep(args)) => {
            if cli.instance.is_some() || cli.algorithm.is_some() || cli.self_check {
                return Err(Failure::flags("sweep takes no --instance, --algorithm or --self-check"));
            }
            sweep::run(args)
        }
        None if cli.self_check => {
            if cli.instance.is_some() || cli.algorithm.is_some() || cli.k.is_some() || cli.t.is_some() {
                return Err(Failure::flags(
                    "--self-check runs on built-in fixtures; drop the instance flags",
                ));
            }
            run::self_check(&cli)
        }
        None => run::run(&cli),
    }
}
