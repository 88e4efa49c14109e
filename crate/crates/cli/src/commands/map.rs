//! `map`: transmission over frequency × input power for one direction,
//! with the closed-form peak loci alongside.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use qdiode::kerr::{peak_frequencies, Peaks};
use qdiode::map::spectrum_map;
use qdiode::{Direction, PowerLevel};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::model::ModelArgs;
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Frequency grid in GHz, `start:stop:count`.
    #[arg(long, value_name = "GRID")]
    pub freq: GridSpec,

    /// Input-power grid in dBm, `start:stop:count`.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub power: GridSpec,

    /// Transmission direction: 13 (|S31|², drive on line 1) or 24 (|S42|²).
    #[arg(long, default_value = "13")]
    pub direction: Direction,

    /// Also write the closed-form peak positions per power,
    /// CSV `power_dbm,f_minus_hz,f_plus_hz` (equal below threshold).
    #[arg(long, value_name = "FILE")]
    pub loci: Option<PathBuf>,

    /// Output grid CSV [default: standard output].
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(args: &MapArgs) -> Result<Vec<Artifact>> {
    for path in args.output.iter().chain(&args.loci) {
        check_writable(path)?;
    }
    let device = args.model.load()?;
    let freqs = args.freq.values(1e9);
    let powers = args.power.values(1.0);
    let map = spectrum_map(&device.model, &freqs, &powers)?;
    let grid = render(|out| map.write_csv(out, args.direction));
    let mut outputs = vec![Artifact::new(args.output.as_deref(), grid)];
    if let Some(path) = &args.loci {
        let loci = render(|out| {
            writeln!(out, "power_dbm,f_minus_hz,f_plus_hz")?;
            for &p in &powers {
                let (lo, hi) =
                    match peak_frequencies(&device.model, PowerLevel::dbm(p), args.direction) {
                        Peaks::Single(f) => (f, f),
                        Peaks::Pair { minus, plus } => (minus, plus),
                    };
                writeln!(out, "{p},{lo},{hi}")?;
            }
            Ok(())
        });
        outputs.push(Artifact::new(Some(path), loci));
    }
    Ok(outputs)
}
