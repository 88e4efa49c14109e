//! `qdiode`: reports, spectra, maps, calibration, fits and synthetic data
//! for the flux-qubit microwave diode.
//!
//! Frequencies are given in GHz, rates in MHz, powers in dBm and flux in
//! Φ/Φ0; grids are `start:stop:count`. Output files use SI units.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod grid;
mod model;
mod output;
mod table;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{calibrate, fit, map, modes, qubit, rmap, spectrum, synth};
use error::{Result, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "qdiode",
    version,
    about = "Flux-qubit microwave diode model",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hybrid-mode record (frequencies, mixing angle, damping, thresholds).
    Modes(modes::ModesArgs),
    /// |S31|², |S42|² and R along frequency at one input power.
    Spectrum(spectrum::SpectrumArgs),
    /// Power–frequency transmission map of one direction.
    Map(map::MapArgs),
    /// Rectification-ratio map over power or flux, low-transmission cells masked.
    Rmap(rmap::RmapArgs),
    /// Qubit f01 and f12 along a flux sweep.
    Qubit(qubit::QubitArgs),
    /// Remove line attenuation using a background from flux stacks.
    Calibrate(calibrate::CalibrateArgs),
    /// Fit model parameters to data.
    Fit(fit::FitArgs),
    /// Synthetic data in the input formats of the other subcommands.
    Synth(synth::SynthArgs),
}

fn run(cli: Cli) -> Result<()> {
    let outputs = match &cli.command {
        Command::Modes(a) => modes::run(a)?,
        Command::Spectrum(a) => spectrum::run(a)?,
        Command::Map(a) => map::run(a)?,
        Command::Rmap(a) => rmap::run(a)?,
        Command::Qubit(a) => qubit::run(a)?,
        Command::Calibrate(a) => calibrate::run(a)?,
        Command::Fit(a) => fit::run(a)?,
        Command::Synth(a) => synth::run(a)?,
    };
    output::commit(outputs)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdiode: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
