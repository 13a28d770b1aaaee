//! `openbaker`: spectra, phase-space grids and classical diagnostics of open
//! quantum baker maps, written as CSV / JSON / PGM files plus a `meta.json`
//! sidecar describing the run.
//!
//! Exit codes: 0 success, 2 configuration, 3 numerical failure, 4 refusal on
//! a near-defective resonance, 1 for I/O and other failures.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use openbaker::maps::MapFamily;

use crate::output::GridFormat;

#[derive(Parser, Debug)]
#[command(name = "openbaker", version, about = "Open quantum baker maps: resonances, phase space, classical repellers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resonance spectrum as `spectrum.csv`.
    Spectrum {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Husimi or `h` distribution of one resonance on a grid.
    Husimi {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
        /// Resonance index in spectrum order.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value_t = HusimiKind::H)]
        kind: HusimiKind,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Coherent-state autocorrelation `⟨q,p|Uⁿ|q,p⟩` on a grid.
    Autocorr {
        #[command(flatten)]
        map: MapArgs,
        /// Iteration count.
        #[arg(long = "n", id = "iterations")]
        n: u32,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Finite-time repeller rectangles as `repeller.json`.
    Repeller {
        #[arg(long, value_parser = parse_family, default_value = "dyadic")]
        family: MapFamily,
        /// Opening depth of the dyadic map.
        #[arg(long)]
        l: Option<u32>,
        #[arg(long = "t-back")]
        t_back: u32,
        #[arg(long = "t-fwd")]
        t_fwd: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time-reversal measure τ against |λ|, with per-depth slopes.
    Tau {
        #[arg(long = "N")]
        n: usize,
        /// Opening depths; omit for the closed dyadic map.
        #[arg(long, value_delimiter = ',')]
        l: Vec<u32>,
        /// Only resonances with |λ| above this enter the slope fit.
        #[arg(long = "min-modulus", default_value_t = 0.3)]
        min_modulus: f64,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Counts of resonances with |λ| ≥ ν_c over several N and the scaling fit.
    Weyl {
        #[arg(long, value_parser = parse_family, default_value = "dyadic")]
        family: MapFamily,
        #[arg(long = "N", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        closed: bool,
        #[arg(long = "nu-c", default_value_t = 0.5)]
        nu_c: f64,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Topological entropy of the shift pruned of `0^l` and `1^l`.
    Entropy {
        #[arg(long)]
        l: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo classical escape rate.
    Escape {
        #[arg(long, value_parser = parse_family, default_value = "dyadic")]
        family: MapFamily,
        #[arg(long)]
        l: Option<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    #[arg(long, value_parser = parse_family, default_value = "dyadic")]
    family: MapFamily,
    /// Hilbert-space dimension.
    #[arg(long = "N")]
    n: usize,
    /// Opening depth of the dyadic map; without it the dyadic map is closed.
    #[arg(long)]
    l: Option<u32>,
    /// Use the closed (unitary) map.
    #[arg(long)]
    closed: bool,
}

#[derive(Args, Debug, Clone)]
struct SpectralArgs {
    /// Eigenvalues below this modulus count as null modes.
    #[arg(long = "null-threshold", default_value_t = openbaker::spectral::DEFAULT_NULL_THRESHOLD)]
    null_threshold: f64,
    /// Fail when the right-eigenvector condition number exceeds this.
    #[arg(long = "max-condition")]
    max_condition: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = openbaker::phasespace::DEFAULT_GRID)]
    nq: usize,
    #[arg(long, default_value_t = openbaker::phasespace::DEFAULT_GRID)]
    np: usize,
    #[arg(long, value_enum, default_value_t = GridFormat::Both)]
    format: GridFormat,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HusimiKind {
    Right,
    Left,
    H,
}

fn parse_family(s: &str) -> Result<MapFamily, String> {
    s.parse::<MapFamily>().map_err(|e| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<openbaker::Error>() {
            return match e {
                openbaker::Error::Config(_) | openbaker::Error::Domain(_) => 2,
                openbaker::Error::Numerical(_) => 3,
                openbaker::Error::NearDefective(_) => 4,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn domain_errors_map_to_exit_two() {
        let err = anyhow::Error::new(openbaker::Error::Domain("x".into())).context("while running");
        assert_eq!(exit_code(&err), 2);
    }
}
