//! Device parameters and Kerr-model flags shared by several subcommands.

use std::path::{Path, PathBuf};

use clap::Args;
use qdiode::hybrid::HybridMode;
use qdiode::params::{load_param_file, ParamFile};
use qdiode::qubit::{avoided_crossing, f01};
use qdiode::{FluxQubitParams64, HybridMode64, KerrModel64, PowerLevel};

use crate::error::{in_file, Result};

const MHZ: f64 = 1e6;
const GHZ: f64 = 1e9;

/// Reads and validates a parameter file.
pub fn load(path: &Path) -> Result<ParamFile<f64>> {
    load_param_file(path).map_err(in_file(path))
}

/// The qubit block of a parameter file, required by flux-dependent commands.
pub fn qubit_block(file: &ParamFile<f64>, path: &Path) -> Result<FluxQubitParams64> {
    file.qubit.ok_or_else(|| {
        in_file(path)(qdiode::Error::MissingKey(
            "ej (qubit block: ej, alpha, ec1, ec2)".into(),
        ))
    })
}

/// Kerr model of the hybrid mode: predicted from the parameter file, with
/// any fitted quantity overridden from the command line.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Device parameter file (`key = value`, SI units, rates over 2π).
    #[arg(long, value_name = "FILE")]
    pub params: PathBuf,

    /// Kerr coefficient K/2π in MHz [default: `kerr` from the parameter file].
    #[arg(long, value_name = "MHZ", allow_hyphen_values = true)]
    pub kerr_mhz: Option<f64>,

    /// Total hybrid-mode linewidth κ_h/2π in MHz [default: κ_h1 + κ_h2 + κ_hi].
    #[arg(long, value_name = "MHZ")]
    pub kappa_h_mhz: Option<f64>,

    /// Coupling of the hybrid mode to line 1, κ_h1/2π in MHz [default: predicted].
    #[arg(long, value_name = "MHZ")]
    pub kappa_h1_mhz: Option<f64>,

    /// Coupling of the hybrid mode to line 2, κ_h2/2π in MHz [default: predicted].
    #[arg(long, value_name = "MHZ")]
    pub kappa_h2_mhz: Option<f64>,

    /// Bistability threshold for transmission 1→3 in dBm [default: predicted from the couplings].
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub p_star1: Option<f64>,

    /// Bistability threshold for transmission 2→4 in dBm [default: predicted from the couplings].
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub p_star2: Option<f64>,

    /// Dressed resonance f_r in GHz [default: f_H + χ].
    #[arg(long, value_name = "GHZ")]
    pub f_r_ghz: Option<f64>,
}

/// Everything the model flags resolve to.
#[derive(Debug, Clone)]
pub struct Device {
    pub file: ParamFile<f64>,
    pub mode: HybridMode64,
    pub model: KerrModel64,
}

impl ModelArgs {
    pub fn load(&self) -> Result<Device> {
        let file = load(&self.params)?;
        let p = &file.circuit;
        let mode = HybridMode::from_params(p)?;
        let partial_override = self.kappa_h1_mhz.is_some() || self.kappa_h2_mhz.is_some();
        let kh1 = self.kappa_h1_mhz.map_or(mode.kappa_h1, |v| v * MHZ);
        let kh2 = self.kappa_h2_mhz.map_or(mode.kappa_h2, |v| v * MHZ);
        let kh = match self.kappa_h_mhz {
            Some(v) => v * MHZ,
            None if partial_override => kh1 + kh2 + p.kappa_hi,
            None => mode.kappa_h,
        };
        let f_r = self.f_r_ghz.map_or(mode.f_h + p.chi, |v| v * GHZ);
        let kerr = self.kerr_mhz.map_or(p.kerr, |v| v * MHZ);
        let mut model = KerrModel64::theoretical(f_r, kerr, kh, kh1, kh2, p.f1, p.f2, mode.f_h)?;
        if let Some(dbm) = self.p_star1 {
            model.p_star1 = PowerLevel::dbm(dbm).to_watts();
        }
        if let Some(dbm) = self.p_star2 {
            model.p_star2 = PowerLevel::dbm(dbm).to_watts();
        }
        let model = model.validated()?;
        Ok(Device { file, mode, model })
    }
}

/// Resonator-like branch of the hybrid mode `f_mode` coupled with strength
/// `g` to a qubit at `f01`: the upper branch while the qubit lies below the
/// mode, the lower one above it.
pub fn dressed_mode(f_mode: f64, f01: f64, g: f64) -> f64 {
    let (upper, lower) = avoided_crossing(f_mode, f01, g);
    if f01 <= f_mode {
        upper
    } else {
        lower
    }
}

/// Dressed hybrid-mode frequency at a flux bias.
pub fn mode_at_flux(
    q: &FluxQubitParams64,
    f_mode: f64,
    g: f64,
    basis: usize,
    flux: f64,
) -> qdiode::Result<f64> {
    let levels = f01(&q.at_flux(flux), basis)?;
    Ok(dressed_mode(f_mode, levels.f01, g))
}
