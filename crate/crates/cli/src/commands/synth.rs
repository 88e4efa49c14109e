//! `synth`: noisy synthetic data in the formats the other subcommands read.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use qdiode::calibration::{write_sweeps, Route};
use qdiode::fit::{add_noise, synthesize_lineshape, synthesize_map};
use qdiode::hybrid::HybridMode;
use qdiode::kerr::{duffing_transmission, linear_transmission, ThroughPath};
use qdiode::qubit::{f01, qubit_spectrum, DEFAULT_BASIS};
use qdiode::{Direction, KerrModel64, LinearResponse64, PowerLevel, RawSweep64};

use crate::error::{CliError, Result};
use crate::grid::GridSpec;
use crate::model::{load, mode_at_flux, qubit_block, ModelArgs};
use crate::output::{check_writable, render, Artifact};
use crate::table::write_columns;

const MHZ: f64 = 1e6;
const GHZ: f64 = 1e9;

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub data: SynthData,

    /// Noise seed; identical seeds give identical files.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    /// Output file [default: standard output].
    #[arg(short, long, value_name = "FILE", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthData {
    /// Linear notch lineshapes, CSV `frequency_hz,s41,s32` (for `fit --kind lineshape`).
    Lineshape {
        /// Device parameter file.
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// Frequency grid in GHz.
        #[arg(long, value_name = "GRID")]
        freq: GridSpec,
        /// Noise standard deviation in linear |S|².
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Power–frequency map of one direction (for `fit --kind duffing`).
    Map {
        #[command(flatten)]
        model: ModelArgs,
        /// Frequency grid in GHz.
        #[arg(long, value_name = "GRID")]
        freq: GridSpec,
        /// Input-power grid in dBm.
        #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
        power: GridSpec,
        /// Direction: 13 or 24.
        #[arg(long, default_value = "13")]
        direction: Direction,
        /// Noise standard deviation in linear |S|².
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Both avoided-crossing branches per flux point, CSV `f01_hz,frequency_hz`
    /// (for `fit --kind crossing`).
    Crossing {
        /// Parameter file with a qubit block.
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// Flux grid in Φ/Φ0.
        #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
        flux: GridSpec,
        /// Coupling g/2π in MHz.
        #[arg(long, value_name = "MHZ")]
        coupling_mhz: f64,
        /// Uncoupled mode in GHz [default: f_H].
        #[arg(long, value_name = "GHZ")]
        mode_ghz: Option<f64>,
        /// Noise standard deviation on the mode frequencies, MHz.
        #[arg(long, default_value_t = 0.0)]
        sigma_mhz: f64,
        /// Charge-basis half-width.
        #[arg(long, default_value_t = DEFAULT_BASIS)]
        basis: usize,
    },
    /// Qubit transition frequencies, CSV `flux,f01` (for `fit --kind qubit`).
    Qubit {
        /// Parameter file with a qubit block.
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// Flux grid in Φ/Φ0.
        #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
        flux: GridSpec,
        /// Noise standard deviation on f01, MHz.
        #[arg(long, default_value_t = 0.0)]
        sigma_mhz: f64,
        /// Charge-basis half-width.
        #[arg(long, default_value_t = DEFAULT_BASIS)]
        basis: usize,
    },
    /// Raw flux stack of one measurement route in dB, including a synthetic
    /// line attenuation (for `calibrate`).
    Sweeps {
        #[command(flatten)]
        model: ModelArgs,
        /// Route: O3I1, O4I1, O3I2 or O4I2.
        #[arg(long)]
        route: Route,
        /// Frequency grid in GHz.
        #[arg(long, value_name = "GRID")]
        freq: GridSpec,
        /// Flux grid in Φ/Φ0.
        #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
        flux: GridSpec,
        /// Qubit–hybrid-mode coupling g/2π in MHz.
        #[arg(long, value_name = "MHZ")]
        coupling_mhz: f64,
        /// Input power for the transmission routes O3I1 and O4I2, dBm.
        #[arg(long, value_name = "DBM", allow_hyphen_values = true, default_value_t = -140.0)]
        power: f64,
        /// Output-wire attenuation S̃_O33 in dB.
        #[arg(
            long,
            default_value_t = 0.0,
            allow_hyphen_values = true,
            value_name = "DB"
        )]
        o33_db: f64,
        /// Output-wire attenuation S̃_O44 in dB.
        #[arg(
            long,
            default_value_t = 0.0,
            allow_hyphen_values = true,
            value_name = "DB"
        )]
        o44_db: f64,
        /// Noise standard deviation, dB.
        #[arg(long, default_value_t = 0.0)]
        sigma_db: f64,
        /// Charge-basis half-width.
        #[arg(long, default_value_t = DEFAULT_BASIS)]
        basis: usize,
    },
}

/// Synthetic input-line attenuation in dB: a level, a slope and a standing-wave ripple.
pub fn line_attenuation(line: u8, f: f64) -> f64 {
    let (level, slope, ripple, period) = match line {
        1 => (52.0, 3.0, 0.8, 23e6),
        _ => (55.0, 2.5, 0.6, 31e6),
    };
    -(level + slope * (f - 6.5e9) / GHZ + ripple * (std::f64::consts::TAU * f / period).sin())
}

/// Floor for converting near-zero transmissions to dB.
const DB_FLOOR: f64 = 1e-15;

fn to_db(v: f64) -> f64 {
    10.0 * v.max(DB_FLOOR).log10()
}

struct SweepSpec<'a> {
    model: &'a ModelArgs,
    route: Route,
    freqs: Vec<f64>,
    fluxes: Vec<f64>,
    g: f64,
    power: f64,
    wires: (f64, f64),
    sigma: f64,
    basis: usize,
    seed: u64,
}

fn sweeps(s: SweepSpec) -> Result<Vec<RawSweep64>> {
    let device = s.model.load()?;
    let q = qubit_block(&device.file, &s.model.params)?;
    let base = device.model;
    let linear = LinearResponse64 {
        kappa_h1: base.kappa_h1,
        kappa_h2: base.kappa_h2,
        kappa_h: base.kappa_h,
        ..LinearResponse64::from_circuit(&device.file.circuit, &device.mode)
    };
    let (line, wire) = match s.route {
        Route::O3I1 | Route::O3I2 => (if s.route == Route::O3I1 { 1 } else { 2 }, s.wires.0),
        Route::O4I1 | Route::O4I2 => (if s.route == Route::O4I1 { 1 } else { 2 }, s.wires.1),
    };
    let p_in = PowerLevel::dbm(s.power);
    let mut clean = Vec::with_capacity(s.freqs.len() * s.fluxes.len());
    for &phi in &s.fluxes {
        let f_h = mode_at_flux(&q, device.mode.f_h, s.g, s.basis, phi)?;
        let model = KerrModel64 { f_r: f_h, ..base };
        let resp = LinearResponse64 { f_h, ..linear };
        for &f in &s.freqs {
            let device_db = match s.route {
                Route::O4I1 => to_db(linear_transmission(&resp, f, ThroughPath::S41)),
                Route::O3I2 => to_db(linear_transmission(&resp, f, ThroughPath::S32)),
                Route::O3I1 => to_db(duffing_transmission(&model, f, p_in, Direction::Forward)?),
                Route::O4I2 => to_db(duffing_transmission(&model, f, p_in, Direction::Backward)?),
            };
            clean.push(line_attenuation(line, f) + device_db + wire);
        }
    }
    let noisy = add_noise(&clean, s.sigma, s.seed)?;
    noisy
        .chunks(s.freqs.len())
        .zip(&s.fluxes)
        .map(|(db, &phi)| {
            Ok(RawSweep64::new(
                s.freqs.clone(),
                db.to_vec(),
                s.route,
                Some(phi),
            )?)
        })
        .collect()
}

pub fn run(args: &SynthArgs) -> Result<Vec<Artifact>> {
    if let Some(path) = &args.output {
        check_writable(path)?;
    }
    let seed = args.seed;
    let bytes = match &args.data {
        SynthData::Lineshape {
            params,
            freq,
            sigma,
        } => {
            let file = load(params)?;
            let mode = HybridMode::from_params(&file.circuit)?;
            let resp = LinearResponse64::from_circuit(&file.circuit, &mode);
            let d = synthesize_lineshape(&resp, &freq.values(GHZ), *sigma, seed)?;
            render(|out| {
                write_columns(
                    out,
                    &["frequency_hz", "s41", "s32"],
                    &[&d.frequencies, &d.s41, &d.s32],
                )
            })
        }
        SynthData::Map {
            model,
            freq,
            power,
            direction,
            sigma,
        } => {
            let device = model.load()?;
            let map = synthesize_map(
                &device.model,
                &freq.values(GHZ),
                &power.values(1.0),
                *sigma,
                seed,
            )?;
            render(|out| map.write_csv(out, *direction))
        }
        SynthData::Crossing {
            params,
            flux,
            coupling_mhz,
            mode_ghz,
            sigma_mhz,
            basis,
        } => {
            let file = load(params)?;
            let q = qubit_block(&file, params)?;
            let f_mode = match mode_ghz {
                Some(v) => v * GHZ,
                None => HybridMode::from_params(&file.circuit)?.f_h,
            };
            let g = coupling_mhz * MHZ;
            let mut qubit = Vec::new();
            let mut clean = Vec::new();
            for &phi in &flux.values(1.0) {
                let q01 = f01(&q.at_flux(phi), *basis)?.f01;
                let (upper, lower) = qdiode::qubit::avoided_crossing(f_mode, q01, g);
                qubit.extend([q01, q01]);
                clean.extend([lower, upper]);
            }
            let noisy = add_noise(&clean, sigma_mhz * MHZ, seed)?;
            render(|out| write_columns(out, &["f01_hz", "frequency_hz"], &[&qubit, &noisy]))
        }
        SynthData::Qubit {
            params,
            flux,
            sigma_mhz,
            basis,
        } => {
            let file = load(params)?;
            let q = qubit_block(&file, params)?;
            let spectrum = qubit_spectrum(&q, &flux.values(1.0), *basis)?;
            let noisy = add_noise(&spectrum.f01, sigma_mhz * MHZ, seed)?;
            render(|out| write_columns(out, &["flux", "f01"], &[&spectrum.flux, &noisy]))
        }
        SynthData::Sweeps {
            model,
            route,
            freq,
            flux,
            coupling_mhz,
            power,
            o33_db,
            o44_db,
            sigma_db,
            basis,
        } => {
            let stack = sweeps(SweepSpec {
                model,
                route: *route,
                freqs: freq.values(GHZ),
                fluxes: flux.values(1.0),
                g: coupling_mhz * MHZ,
                power: *power,
                wires: (*o33_db, *o44_db),
                sigma: *sigma_db,
                basis: *basis,
                seed,
            })?;
            let mut buf = Vec::new();
            write_sweeps(&mut buf, &stack).map_err(CliError::from)?;
            buf
        }
    };
    Ok(vec![Artifact::new(args.output.as_deref(), bytes)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_attenuation_is_smooth_and_distinct_per_line() {
        let a = line_attenuation(1, 6.7e9);
        let b = line_attenuation(2, 6.7e9);
        assert!(a < -40.0 && b < -40.0 && a != b);
        // Ripple bounded by its amplitude around the sloped level.
        for i in 0..100 {
            let f = 6.6e9 + 2e6 * i as f64;
            let level = -(52.0 + 3.0 * (f - 6.5e9) / 1e9);
            assert!((line_attenuation(1, f) - level).abs() <= 0.8 + 1e-12);
        }
    }

    #[test]
    fn db_conversion_is_floored() {
        assert_eq!(to_db(1.0), 0.0);
        assert_eq!(to_db(0.0), -150.0);
    }
}
