//! `spectrum`: both transmissions and their rectification ratio along
//! frequency at a fixed input power.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use qdiode::map::{rectification_map, spectrum_map, DEFAULT_MASK_THRESHOLD};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::model::ModelArgs;
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Frequency grid in GHz, `start:stop:count`.
    #[arg(long, value_name = "GRID")]
    pub freq: GridSpec,

    /// Input power in dBm.
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub power: f64,

    /// Leave R empty where |S31|² + |S42|² falls below this.
    #[arg(long, default_value_t = DEFAULT_MASK_THRESHOLD)]
    pub threshold: f64,

    /// Output CSV `frequency_hz,s31,s42,rectification` [default: standard output].
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(args: &SpectrumArgs) -> Result<Vec<Artifact>> {
    if let Some(path) = &args.output {
        check_writable(path)?;
    }
    let device = args.model.load()?;
    let freqs = args.freq.values(1e9);
    let map = spectrum_map(&device.model, &freqs, &[args.power])?;
    let r = rectification_map(&map, args.threshold);
    let bytes = render(|out| {
        writeln!(out, "frequency_hz,s31,s42,rectification")?;
        for (i, f) in freqs.iter().enumerate() {
            write!(out, "{f},{},{},", map.values31[0][i], map.values42[0][i])?;
            match r.values[0][i] {
                Some(v) => writeln!(out, "{v}")?,
                None => writeln!(out)?,
            }
        }
        Ok(())
    });
    Ok(vec![Artifact::new(args.output.as_deref(), bytes)])
}
