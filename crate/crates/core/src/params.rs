//! Device parameters, power units and the `key = value` parameter file.
//!
//! Every frequency and rate is stored as a linear frequency in Hz. Routines
//! that need angular quantities convert internally.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Resonator/line parameters of the two-resonator device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams<T> {
    /// Bare frequency of resonator 1, Hz.
    pub f1: T,
    /// Bare frequency of resonator 2, Hz. Must exceed `f1`.
    pub f2: T,
    /// Resonator-resonator coupling, Hz.
    pub g12: T,
    /// Line/resonator impedance, Ohm.
    pub z0: T,
    /// Line coupling capacitances, F.
    pub ck1: T,
    pub ck2: T,
    /// Internal damping of the hybrid mode, Hz.
    pub kappa_hi: T,
    /// Dispersive shift of the hybrid mode, Hz.
    pub chi: T,
    /// Kerr coefficient K/2π, Hz. Signed.
    pub kerr: T,
}

impl<T: Real> CircuitParams<T> {
    /// Builds a parameter set with `kappa_hi`, `chi` and `kerr` zeroed.
    pub fn new(f1: T, f2: T, g12: T, z0: T, ck1: T, ck2: T) -> Result<Self> {
        Self {
            f1,
            f2,
            g12,
            z0,
            ck1,
            ck2,
            kappa_hi: T::zero(),
            chi: T::zero(),
            kerr: T::zero(),
        }
        .validated()
    }

    /// Checks every invariant and returns `self` unchanged on success.
    pub fn validated(self) -> Result<Self> {
        let finite = [
            ("f1", self.f1),
            ("f2", self.f2),
            ("g12", self.g12),
            ("z0", self.z0),
            ("ck1", self.ck1),
            ("ck2", self.ck2),
            ("kappa_hi", self.kappa_hi),
            ("chi", self.chi),
            ("kerr", self.kerr),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::invariant(key, "must be finite"));
            }
        }
        if self.f1 <= T::zero() {
            return Err(Error::invariant("f1", "must be positive"));
        }
        if self.f2 <= T::zero() {
            return Err(Error::invariant("f2", "must be positive"));
        }
        if self.f2 <= self.f1 {
            return Err(Error::invariant("f2", "must be greater than f1"));
        }
        if self.g12 < T::zero() {
            return Err(Error::invariant("g12", "must be non-negative"));
        }
        if self.z0 <= T::zero() {
            return Err(Error::invariant("z0", "must be positive"));
        }
        if self.ck1 < T::zero() {
            return Err(Error::invariant("ck1", "must be non-negative"));
        }
        if self.ck2 < T::zero() {
            return Err(Error::invariant("ck2", "must be non-negative"));
        }
        if self.kappa_hi < T::zero() {
            return Err(Error::invariant("kappa_hi", "must be non-negative"));
        }
        Ok(self)
    }
}

/// Three-junction flux qubit parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxQubitParams<T> {
    /// Josephson energy of the two big junctions, E_J/h in Hz.
    pub ej: T,
    /// Small-junction ratio.
    pub alpha: T,
    /// Island charging energies e²/(2 C_G) over h, Hz.
    pub ec1: T,
    pub ec2: T,
    /// External flux in units of the flux quantum, taken modulo 1.
    pub flux: T,
}

impl<T: Real> FluxQubitParams<T> {
    pub fn new(ej: T, alpha: T, ec1: T, ec2: T, flux: T) -> Result<Self> {
        Self {
            ej,
            alpha,
            ec1,
            ec2,
            flux,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.ej > T::zero() && self.ej.is_finite()) {
            return Err(Error::invariant("ej", "must be positive"));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::invariant("alpha", "must lie in (0, 1)"));
        }
        if !(self.ec1 > T::zero() && self.ec1.is_finite()) {
            return Err(Error::invariant("ec1", "must be positive"));
        }
        if !(self.ec2 > T::zero() && self.ec2.is_finite()) {
            return Err(Error::invariant("ec2", "must be positive"));
        }
        if !self.flux.is_finite() {
            return Err(Error::invariant("flux", "must be finite"));
        }
        Ok(self)
    }

    /// Same qubit at another flux bias.
    pub fn at_flux(mut self, flux: T) -> Self {
        self.flux = flux;
        self
    }

    /// Flux reduced into `[0, 1)`.
    pub fn reduced_flux(&self) -> T {
        let f = self.flux - self.flux.floor();
        if f >= T::one() {
            T::zero()
        } else {
            f
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerUnit {
    Dbm,
    Watts,
}

/// A microwave power carrying its unit; conversion is always explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLevel<T> {
    value: T,
    unit: PowerUnit,
}

impl<T: Real> PowerLevel<T> {
    pub fn dbm(value: T) -> Self {
        Self {
            value,
            unit: PowerUnit::Dbm,
        }
    }

    pub fn watts(value: T) -> Result<Self> {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power in watts must be positive and finite, got {value}"
            )));
        }
        Ok(Self {
            value,
            unit: PowerUnit::Watts,
        })
    }

    pub fn unit(&self) -> PowerUnit {
        self.unit
    }

    /// Raw number in whatever unit the level carries.
    pub fn value(&self) -> T {
        self.value
    }

    pub fn to_watts(self) -> Self {
        match self.unit {
            PowerUnit::Watts => self,
            PowerUnit::Dbm => Self {
                value: dbm_to_watts(self.value),
                unit: PowerUnit::Watts,
            },
        }
    }

    pub fn to_dbm(self) -> Self {
        match self.unit {
            PowerUnit::Dbm => self,
            PowerUnit::Watts => Self {
                value: watts_to_dbm(self.value),
                unit: PowerUnit::Dbm,
            },
        }
    }

    pub fn as_watts(&self) -> T {
        self.to_watts().value
    }

    pub fn as_dbm(&self) -> T {
        self.to_dbm().value
    }
}

impl<T: Real> fmt::Display for PowerLevel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            PowerUnit::Dbm => write!(f, "{} dBm", self.value),
            PowerUnit::Watts => write!(f, "{:e} W", self.value.as_f64()),
        }
    }
}

/// W = 1 mW · 10^(dBm/10)
pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    T::lit(1e-3) * T::lit(10.0).powf(dbm / T::lit(10.0))
}

pub fn watts_to_dbm<T: Real>(watts: T) -> T {
    T::lit(10.0) * (watts / T::lit(1e-3)).log10()
}

// Keys accepted in a parameter file.
const CIRCUIT_KEYS: [&str; 9] = [
    "f1", "f2", "g12", "z0", "ck1", "ck2", "kappa_hi", "chi", "kerr",
];
const QUBIT_KEYS: [&str; 4] = ["ej", "alpha", "ec1", "ec2"];

/// Parsed contents of a parameter file.
///
/// The circuit block is mandatory. The qubit block is optional, but once
/// any of its keys appears all four are required; flux is not part of the
/// file and starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile<T> {
    pub circuit: CircuitParams<T>,
    pub qubit: Option<FluxQubitParams<T>>,
}

impl<T: Real + FromStr> FromStr for ParamFile<T> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: BTreeMap<String, T> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if !CIRCUIT_KEYS.contains(&key.as_str()) && !QUBIT_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey { key, line: line_no });
            }
            let parsed: T = value.parse().map_err(|_| Error::NotNumeric {
                key: key.clone(),
                value: value.to_string(),
            })?;
            if values.insert(key.clone(), parsed).is_some() {
                return Err(Error::Syntax {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }

        let required = |key: &str| -> Result<T> {
            values
                .get(key)
                .copied()
                .ok_or_else(|| Error::MissingKey(key.to_string()))
        };
        let optional = |key: &str| values.get(key).copied().unwrap_or_else(T::zero);

        let circuit = CircuitParams {
            f1: required("f1")?,
            f2: required("f2")?,
            g12: required("g12")?,
            z0: required("z0")?,
            ck1: required("ck1")?,
            ck2: required("ck2")?,
            kappa_hi: optional("kappa_hi"),
            chi: optional("chi"),
            kerr: optional("kerr"),
        }
        .validated()?;

        let qubit = if QUBIT_KEYS.iter().any(|k| values.contains_key(*k)) {
            Some(
                FluxQubitParams {
                    ej: required("ej")?,
                    alpha: required("alpha")?,
                    ec1: required("ec1")?,
                    ec2: required("ec2")?,
                    flux: T::zero(),
                }
                .validated()?,
            )
        } else {
            None
        };

        Ok(ParamFile { circuit, qubit })
    }
}

/// Reads and validates a parameter file.
pub fn load_param_file<T: Real + FromStr>(path: impl AsRef<Path>) -> Result<ParamFile<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.parse()
}

/// Reads a parameter file and returns only its circuit block.
pub fn load_params<T: Real + FromStr>(path: impl AsRef<Path>) -> Result<CircuitParams<T>> {
    load_param_file(path).map(|p| p.circuit)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
# reference device
f1 = 6.209e9
f2 = 6.595e9
g12 = 3.13e8
z0 = 50
ck1 = 7e-15
ck2 = 7e-15
";

    #[test]
    fn parses_reference_fixture() {
        let p: ParamFile<f64> = FIXTURE.parse().unwrap();
        assert_eq!(p.circuit.f1, 6.209e9);
        assert_eq!(p.circuit.f2, 6.595e9);
        assert_eq!(p.circuit.g12, 3.13e8);
        assert_eq!(p.circuit.z0, 50.0);
        assert_eq!(p.circuit.ck1, 7e-15);
        assert_eq!(p.circuit.ck2, 7e-15);
        assert_eq!(p.circuit.kappa_hi, 0.0);
        assert!(p.qubit.is_none());
    }

    #[test]
    fn missing_key_is_named() {
        let text = FIXTURE.replace("g12 = 3.13e8\n", "");
        let err = text.parse::<ParamFile<f64>>().unwrap_err();
        assert!(matches!(&err, Error::MissingKey(k) if k == "g12"));
        assert!(err.to_string().contains("g12"));
    }

    #[test]
    fn frequency_order_enforced() {
        let text = FIXTURE.replace("f2 = 6.595e9", "f2 = 6.0e9");
        let err = text.parse::<ParamFile<f64>>().unwrap_err();
        assert!(matches!(&err, Error::Invariant { key, .. } if key == "f2"));
    }

    #[test]
    fn non_numeric_and_unknown_keys() {
        let text = FIXTURE.replace("z0 = 50", "z0 = fifty");
        let err = text.parse::<ParamFile<f64>>().unwrap_err();
        assert!(matches!(&err, Error::NotNumeric { key, .. } if key == "z0"));

        let text = format!("{FIXTURE}bogus = 1\n");
        let err = text.parse::<ParamFile<f64>>().unwrap_err();
        assert!(matches!(&err, Error::UnknownKey { key, line: 8 } if key == "bogus"));
    }

    #[test]
    fn qubit_block_all_or_nothing() {
        let text = format!("{FIXTURE}ej = 37.5e9\nalpha = 0.632\n");
        let err = text.parse::<ParamFile<f64>>().unwrap_err();
        assert!(matches!(&err, Error::MissingKey(k) if k == "ec1"));

        let text = format!("{FIXTURE}ej = 37.5e9\nalpha = 0.632\nec1 = 5e8\nec2 = 5e8\n");
        let p: ParamFile<f64> = text.parse().unwrap();
        let q = p.qubit.unwrap();
        assert_eq!(q.alpha, 0.632);
        assert_eq!(q.flux, 0.0);
    }

    #[test]
    fn dbm_conversion_values() {
        assert_eq!(dbm_to_watts(0.0_f64), 1e-3);
        assert!((dbm_to_watts(-112.0_f64) / 6.3096e-15 - 1.0).abs() < 1e-4);
        assert!((dbm_to_watts(-117.0_f64) / 1.9953e-15 - 1.0).abs() < 1e-4);
        let ratio = dbm_to_watts(-112.0_f64) / dbm_to_watts(-117.0_f64);
        assert!((ratio - 10f64.powf(0.5)).abs() < 1e-9);
    }

    #[test]
    fn watts_must_be_positive() {
        assert!(PowerLevel::watts(0.0_f64).is_err());
        assert!(PowerLevel::watts(-1e-15_f64).is_err());
        assert!(PowerLevel::watts(f64::NAN).is_err());
    }

    #[test]
    fn flux_reduced_modulo_one() {
        let q = FluxQubitParams::new(37.5e9, 0.632, 5e8, 5e8, 1.25_f64).unwrap();
        assert!((q.reduced_flux() - 0.25).abs() < 1e-15);
        assert!((q.at_flux(-0.25).reduced_flux() - 0.75).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn dbm_round_trip(dbm in -200.0_f64..10.0) {
            let back = PowerLevel::dbm(dbm).to_watts().to_dbm().value();
            proptest::prop_assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }

        #[test]
        fn five_db_is_root_ten(dbm in -200.0_f64..5.0) {
            let r = dbm_to_watts(dbm + 5.0) / dbm_to_watts(dbm);
            proptest::prop_assert!((r - 3.162_277_660_168_379).abs() < 1e-9);
        }
    }
}
