//! `calibrate`: background extraction from flux stacks and its removal
//! from measured sweeps.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use qdiode::calibration::{calibrate, extract_background, read_sweeps, BackgroundMethod, WireLoss};
use qdiode::RawSweep64;

use crate::error::{in_file, CliError, Result};
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Flux-stack sweep files; routes O4I1 and O3I2 are both needed,
    /// at least three flux points each.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    pub stack: Vec<PathBuf>,

    /// Sweep files to calibrate (any route).
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,

    /// Per-frequency background estimator across flux: median or max.
    #[arg(long, default_value = "median")]
    pub method: BackgroundMethod,

    /// Output-wire attenuation S̃_O33 in dB.
    #[arg(
        long,
        default_value_t = 0.0,
        allow_hyphen_values = true,
        value_name = "DB"
    )]
    pub o33_db: f64,

    /// Output-wire attenuation S̃_O44 in dB.
    #[arg(
        long,
        default_value_t = 0.0,
        allow_hyphen_values = true,
        value_name = "DB"
    )]
    pub o44_db: f64,

    /// Also write the extracted background, CSV `frequency_hz,bg41_db,bg32_db`.
    #[arg(long, value_name = "FILE")]
    pub background: Option<PathBuf>,

    /// Output: one calibrated block per input sweep [default: standard output].
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<RawSweep64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_sweeps(BufReader::new(file)).map_err(in_file(path))
}

pub fn run(args: &CalibrateArgs) -> Result<Vec<Artifact>> {
    for path in args.output.iter().chain(&args.background) {
        check_writable(path)?;
    }
    let mut stack = Vec::new();
    for path in &args.stack {
        stack.extend(read(path)?);
    }
    let wires = WireLoss {
        o33: args.o33_db,
        o44: args.o44_db,
    };
    let bg = extract_background(&stack, args.method, wires)?;
    let mut calibrated = Vec::new();
    for path in &args.input {
        for sweep in read(path)? {
            calibrated.push(calibrate(&sweep, &bg).map_err(in_file(path))?);
        }
    }
    let bytes = render(|out| {
        for (i, c) in calibrated.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            c.write_csv(out)?;
        }
        Ok(())
    });
    let mut outputs = vec![Artifact::new(args.output.as_deref(), bytes)];
    if let Some(path) = &args.background {
        let table = render(|out| {
            writeln!(out, "frequency_hz,bg41_db,bg32_db")?;
            for i in 0..bg.frequencies.len() {
                writeln!(out, "{},{},{}", bg.frequencies[i], bg.bg41[i], bg.bg32[i])?;
            }
            Ok(())
        });
        outputs.push(Artifact::new(Some(path), table));
    }
    Ok(outputs)
}
