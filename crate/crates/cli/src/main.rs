//! Command-line surface for kernel-based random-field path construction.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage/config error,
//! 3 numerical failure (pivot / eigensolver / quadrature).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kernelpath::io::EnsembleFormat;
use kernelpath::Error;

use kernelpath_cli::commands;
use kernelpath_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "kernelpath",
    version,
    about = "Random-field paths from covariance kernels via orthonormal expansions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the innovation seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut config = RunConfig::load(&self.config)?;
        config.apply_overrides(self.seed, self.out.clone());
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

impl From<FormatArg> for EnsembleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => EnsembleFormat::Csv,
            FormatArg::Bin => EnsembleFormat::Bin,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Select interpolation nodes by the P-greedy rule.
    Greedy(CommonArgs),
    /// Build and export a Newton or Karhunen–Loève basis.
    Basis(CommonArgs),
    /// Sample a path ensemble with its truncation-variance certificate.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Ensemble output format.
        #[arg(long, value_enum, default_value = "bin")]
        format: FormatArg,
        /// Sample from a previously exported basis file.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Test hook: replace all innovations by zero.
        #[arg(long)]
        zero_innovations: bool,
    },
    /// Run a diagnostic suite; exit 0 only if every asserted check passes.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Suite name: default, gap, or equivalence.
        #[arg(long, default_value = "default")]
        suite: String,
        /// Check the integrity of a basis artifact first.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Classify Sobolev-scale membership of paths for a probe grid.
    Gap(CommonArgs),
    /// Nyström eigensystem table and decay-exponent fit.
    Mercer(CommonArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidSpec(_)
        | Error::Domain(_)
        | Error::Io(_)
        | Error::Format(_)
        | Error::UnsupportedFamily(_)
        | Error::IndexOutOfRange { .. } => 2,
        Error::PivotFailure { .. }
        | Error::EigenFailure(_)
        | Error::QuadratureNonConvergence { .. }
        | Error::Overflow(_)
        | Error::InadmissibleDerivative { .. }
        | Error::UnstableExtrapolation { .. }
        | Error::DegenerateFit(_) => 3,
    }
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Greedy(common) => commands::cmd_greedy(&common.load()?),
        Command::Basis(common) => commands::cmd_basis(&common.load()?),
        Command::Sample {
            common,
            format,
            basis,
            zero_innovations,
        } => commands::cmd_sample(
            &common.load()?,
            format.into(),
            basis.as_deref(),
            zero_innovations,
        ),
        Command::Verify {
            common,
            suite,
            basis,
        } => commands::cmd_verify(&common.load()?, &suite, basis.as_deref()),
        Command::Gap(common) => commands::cmd_gap(&common.load()?),
        Command::Mercer(common) => commands::cmd_mercer(&common.load()?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
