//! `rmap`: rectification ratio over frequency × power, or over
//! frequency × flux at a fixed power, with low-transmission cells masked.

use std::path::PathBuf;

use clap::Args;
use qdiode::map::{rectification_map, spectrum_map, spectrum_map_flux, DEFAULT_MASK_THRESHOLD};
use qdiode::qubit::DEFAULT_BASIS;
use qdiode::{KerrModel64, PowerLevel};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::model::{mode_at_flux, qubit_block, ModelArgs};
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct RmapArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Frequency grid in GHz, `start:stop:count`.
    #[arg(long, value_name = "GRID")]
    pub freq: GridSpec,

    /// Input-power grid in dBm, `start:stop:count`.
    #[arg(
        long,
        value_name = "GRID",
        allow_hyphen_values = true,
        required_unless_present = "flux",
        conflicts_with = "flux"
    )]
    pub power: Option<GridSpec>,

    /// Flux grid in Φ/Φ0, `start:stop:count`. The resonance then follows the
    /// avoided crossing of the hybrid mode with the qubit (qubit block required).
    #[arg(long, value_name = "GRID", allow_hyphen_values = true,
          requires_all = ["at_power", "coupling_mhz"])]
    pub flux: Option<GridSpec>,

    /// Input power in dBm for a flux map.
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub at_power: Option<f64>,

    /// Qubit–hybrid-mode coupling g/2π in MHz for a flux map.
    #[arg(long, value_name = "MHZ")]
    pub coupling_mhz: Option<f64>,

    /// Charge-basis half-width for the qubit spectrum.
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub basis: usize,

    /// Mask cells where |S31|² + |S42|² is below this; 0 masks nothing.
    #[arg(long, default_value_t = DEFAULT_MASK_THRESHOLD)]
    pub threshold: f64,

    /// Output grid CSV, masked cells empty [default: standard output].
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(args: &RmapArgs) -> Result<Vec<Artifact>> {
    if let Some(path) = &args.output {
        check_writable(path)?;
    }
    let device = args.model.load()?;
    let freqs = args.freq.values(1e9);
    let map = match (&args.power, &args.flux) {
        (Some(power), _) => spectrum_map(&device.model, &freqs, &power.values(1.0))?,
        (None, Some(flux)) => {
            let q = qubit_block(&device.file, &args.model.params)?;
            let g = args.coupling_mhz.expect("required by clap") * 1e6;
            let p_in = PowerLevel::dbm(args.at_power.expect("required by clap"));
            let base = device.model;
            let f_mode = device.mode.f_h;
            let basis = args.basis;
            spectrum_map_flux(&freqs, &flux.values(1.0), p_in, |phi| {
                let f_r = mode_at_flux(&q, f_mode, g, basis, phi)?;
                KerrModel64 { f_r, ..base }.validated()
            })?
        }
        (None, None) => unreachable!("clap requires a power or flux grid"),
    };
    let r = rectification_map(&map, args.threshold);
    let bytes = render(|out| r.write_csv(out));
    Ok(vec![Artifact::new(args.output.as_deref(), bytes)])
}
