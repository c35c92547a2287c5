//! `hardylab`: classify linear fractional self-maps of the disk and run the
//! complex-symmetry experiments on their composition operators.
//!
//! Exit codes: 0 ok, 1 usage or parse error, 2 domain precondition failed,
//! 3 ambiguous classification.

mod commands;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hardylab_core::conjugations::ConjugationKind;
use hardylab_core::moebius::{parse_complex, Moebius};
use hardylab_core::Error as CoreError;
use num_complex::Complex64;

use experiments::{Experiment, ExperimentConfig};
use output::{Format, UsageError};

const MAP_HELP: &str = "Maps are written a,b,c,d for (az+b)/(cz+d). Each coefficient is a complex literal \
without spaces: 0.5, -2, 1.5i, -i, 0.3+0.2i, 1e-3-4i. Use `--` or `=` before a map that starts with '-'.";

#[derive(Debug, Parser)]
#[command(name = "hardylab", version, about, after_help = MAP_HELP)]
struct Cli {
    /// Truncation dimension N.
    #[arg(long, global = true, env = "HARDYLAB_DIM", default_value = "64", value_parser = parse_dim)]
    dim: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for experiments that draw random inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the pass threshold of an experiment.
    #[arg(long, global = true, value_parser = parse_tol)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fixed points, multiplier and class of a map.
    Classify {
        #[arg(value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
    },
    /// Complex-symmetry verdict for C_f with its recommended witnesses.
    Verdict {
        #[arg(value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        /// Also run the witnesses.
        #[arg(long)]
        run: bool,
    },
    /// The matrix of C_f in the monomial basis.
    Matrix {
        #[arg(value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        /// Take the leading block of a larger compression instead of the plain N x N compression.
        #[arg(long)]
        section: bool,
    },
    /// Residual of C_f against a conjugation: canonical, rotation:THETA or jalpha:ALPHA.
    Csym {
        #[arg(value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        #[arg(long, default_value = "canonical", value_parser = parse_conjugation)]
        conjugation: ConjugationKind,
    },
    /// Koenigs eigenfunction of a map with an attractive interior fixed point.
    Koenigs {
        #[arg(value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
    },
    /// Run a named experiment.
    #[command(subcommand)]
    Experiment(Experiment),
}

pub(crate) fn parse_dim(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("{s:?} is not a dimension"))?;
    if (8..=256).contains(&n) {
        Ok(n)
    } else {
        Err(format!("dimension {n} is outside 8..=256"))
    }
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance {s:?} must be a positive number")),
    }
}

pub(crate) fn parse_map(s: &str) -> std::result::Result<Moebius, String> {
    s.parse::<Moebius>().map_err(|e| e.to_string())
}

pub(crate) fn parse_alpha(s: &str) -> std::result::Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn parse_conjugation(s: &str) -> std::result::Result<ConjugationKind, String> {
    let (name, arg) = s.split_once(':').unwrap_or((s, ""));
    match (name, arg) {
        ("canonical", "") => Ok(ConjugationKind::Canonical),
        ("rotation", t) => t
            .parse::<f64>()
            .map(|theta| ConjugationKind::Rotation { theta })
            .map_err(|_| format!("bad angle {t:?}")),
        ("jalpha", a) => parse_alpha(a).map(|alpha| ConjugationKind::JAlpha { alpha }),
        _ => Err(format!("unknown conjugation {s:?}; expected canonical, rotation:THETA or jalpha:ALPHA")),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let report = match &cli.command {
        Command::Classify { map } => commands::classify(map)?,
        Command::Verdict { map, run } => commands::verdict(map, cli.dim, *run)?,
        Command::Matrix { map, section } => commands::matrix(map, cli.dim, *section)?,
        Command::Csym { map, conjugation } => commands::csym(map, cli.dim, *conjugation)?,
        Command::Koenigs { map } => commands::koenigs(map, cli.dim)?,
        Command::Experiment(exp) => experiments::run(
            exp,
            ExperimentConfig {
                dim: cli.dim,
                seed: cli.seed,
                tol: cli.tol,
            },
        )?,
    };
    report.emit(cli.format, cli.out.as_deref())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Parse(_)) => 1,
        Some(CoreError::AmbiguousClass { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
