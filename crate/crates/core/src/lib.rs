//! Flux-qubit microwave diode: coupled-resonator hybridisation, Kerr
//! transmission, flux-qubit spectra, background calibration and fitting.
//!
//! Everything is generic over the floating-point type through [`Real`];
//! the `*64` aliases below fix it to `f64`. Frequencies and damping rates
//! are ordinary frequencies in Hz (the `/2π` convention), powers carry their
//! unit in [`PowerLevel`].

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod calibration;
pub mod error;
pub mod fit;
pub mod hybrid;
pub mod kerr;
pub mod map;
pub mod params;
pub mod qubit;
pub mod scalar;
pub mod special;

pub use error::{Error, ErrorClass, Result};
pub use kerr::{Direction, KerrModel};
pub use params::{CircuitParams, FluxQubitParams, PowerLevel, PowerUnit};
pub use scalar::Real;

/// Double-precision aliases for the generic types.
pub type CircuitParams64 = CircuitParams<f64>;
pub type FluxQubitParams64 = FluxQubitParams<f64>;
pub type PowerLevel64 = PowerLevel<f64>;
pub type KerrModel64 = KerrModel<f64>;
pub type HybridMode64 = hybrid::HybridMode<f64>;
pub type LinearResponse64 = kerr::LinearResponse<f64>;
pub type SpectrumMap64 = map::SpectrumMap<f64>;
pub type RectificationMap64 = map::RectificationMap<f64>;
pub type FitResult64 = fit::FitResult<f64>;
pub type RawSweep64 = calibration::RawSweep<f64>;
pub type Background64 = calibration::Background<f64>;
