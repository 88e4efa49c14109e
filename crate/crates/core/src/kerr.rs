//! Driven Kerr (Duffing) response of the qubit-dressed hybrid mode.
//!
//! The steady-state transmission in either direction is
//!
//! ```text
//! |S|² = κ_in κ_out / (4Δ² + κ²) · |₀F₂(1 − c⁻/K, −c⁺/K; ζ)|² / |₀F₂(−c⁻/K, −c⁺/K; ζ)|²
//! c± = Δ ± iκ/2,   ζ = 2κ² P_in / (9 K² P*)
//! ```
//!
//! Only ratios of frequencies enter, so everything is evaluated in Hz with
//! rates and K quoted over 2π. Which port is driven only selects the
//! threshold P*; the two partial widths appear symmetrically.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hybrid::{threshold_power, HybridMode};
use crate::params::{CircuitParams, PowerLevel};
use crate::scalar::Real;
use crate::special::hyp0f2;

/// Propagation direction through the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Port 1 in, port 3 out: `|S31|²`.
    Forward,
    /// Port 2 in, port 4 out: `|S42|²`.
    Backward,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];

    pub fn label(self) -> &'static str {
        match self {
            Direction::Forward => "s31",
            Direction::Backward => "s42",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "13" | "1" | "s31" | "forward" | "1->3" => Ok(Direction::Forward),
            "24" | "2" | "s42" | "backward" | "2->4" => Ok(Direction::Backward),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction `{other}` (expected 13 or 24)"
            ))),
        }
    }
}

/// Couplings seen by a drive entering through one port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Port<T> {
    pub kappa_in: T,
    pub kappa_out: T,
    pub p_star: PowerLevel<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrModel<T> {
    /// Dressed resonance f_h + χ, Hz.
    pub f_r: T,
    /// K/2π, Hz. Signed.
    pub kerr: T,
    pub kappa_h: T,
    pub kappa_h1: T,
    pub kappa_h2: T,
    pub p_star1: PowerLevel<T>,
    pub p_star2: PowerLevel<T>,
}

impl<T: Real> KerrModel<T> {
    pub fn new(
        f_r: T,
        kerr: T,
        kappa_h: T,
        kappa_h1: T,
        kappa_h2: T,
        p_star1: PowerLevel<T>,
        p_star2: PowerLevel<T>,
    ) -> Result<Self> {
        Self {
            f_r,
            kerr,
            kappa_h,
            kappa_h1,
            kappa_h2,
            p_star1: p_star1.to_watts(),
            p_star2: p_star2.to_watts(),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.f_r > T::zero() && self.f_r.is_finite()) {
            return Err(Error::invariant("f_r", "must be positive"));
        }
        if !self.kerr.is_finite() {
            return Err(Error::invariant("kerr", "must be finite"));
        }
        if self.kappa_h1 < T::zero() || self.kappa_h2 < T::zero() {
            return Err(Error::invariant(
                "kappa_h1/kappa_h2",
                "must be non-negative",
            ));
        }
        if !(self.kappa_h > T::zero()) {
            return Err(Error::invariant("kappa_h", "must be positive"));
        }
        // Allow a few ulps so kappa_h = kappa_h1 + kappa_h2 round trips.
        let slack = T::lit(8.0) * T::epsilon() * self.kappa_h;
        if self.kappa_h + slack < self.kappa_h1 + self.kappa_h2 {
            return Err(Error::invariant(
                "kappa_h",
                "must be at least kappa_h1 + kappa_h2",
            ));
        }
        for (key, p) in [("p_star1", self.p_star1), ("p_star2", self.p_star2)] {
            let w = p.as_watts();
            if !(w > T::zero() && w.is_finite()) {
                return Err(Error::invariant(key, "must be a positive power"));
            }
        }
        Ok(self)
    }

    /// Kerr model with thresholds predicted from the line couplings.
    ///
    /// `f_j` are the bare resonator frequencies and `f_h` the hybrid mode
    /// they enter through.
    #[allow(clippy::too_many_arguments)]
    pub fn theoretical(
        f_r: T,
        kerr: T,
        kappa_h: T,
        kappa_h1: T,
        kappa_h2: T,
        f1: T,
        f2: T,
        f_h: T,
    ) -> Result<Self> {
        let p1 = threshold_power(kappa_h, f1, kappa_h1, f_h)?;
        let p2 = threshold_power(kappa_h, f2, kappa_h2, f_h)?;
        Self::new(f_r, kerr, kappa_h, kappa_h1, kappa_h2, p1, p2)
    }

    /// Kerr model built entirely from circuit parameters: f_r = f_h + χ and
    /// theoretical thresholds.
    pub fn from_circuit(p: &CircuitParams<T>, mode: &HybridMode<T>) -> Result<Self> {
        Self::new(
            mode.f_h + p.chi,
            p.kerr,
            mode.kappa_h,
            mode.kappa_h1,
            mode.kappa_h2,
            mode.p_star1,
            mode.p_star2,
        )
    }

    pub fn port(&self, direction: Direction) -> Port<T> {
        match direction {
            Direction::Forward => Port {
                kappa_in: self.kappa_h1,
                kappa_out: self.kappa_h2,
                p_star: self.p_star1,
            },
            Direction::Backward => Port {
                kappa_in: self.kappa_h2,
                kappa_out: self.kappa_h1,
                p_star: self.p_star2,
            },
        }
    }

    pub fn p_star(&self, direction: Direction) -> PowerLevel<T> {
        self.port(direction).p_star
    }

    /// Low-power Lorentzian κ_in κ_out / (4Δ² + κ²).
    pub fn lorentzian(&self, f: T) -> T {
        let d = f - self.f_r;
        self.kappa_h1 * self.kappa_h2 / (T::lit(4.0) * d * d + self.kappa_h * self.kappa_h)
    }
}

/// Steady-state `|S|²` for a drive of power `p_in` entering along `direction`.
pub fn duffing_transmission<T: Real>(
    model: &KerrModel<T>,
    f: T,
    p_in: PowerLevel<T>,
    direction: Direction,
) -> Result<T> {
    let port = model.port(direction);
    let drive = p_in.as_watts() / port.p_star.as_watts();
    transmission_at_drive(model, port, f, drive)
}

/// Same as [`duffing_transmission`] with the drive given as P_in/P*.
pub fn transmission_at_drive<T: Real>(
    model: &KerrModel<T>,
    port: Port<T>,
    f: T,
    drive: T,
) -> Result<T> {
    if model.kerr == T::zero() {
        return Err(Error::ZeroKerr);
    }
    if !(drive >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "drive ratio must be non-negative, got {drive}"
        )));
    }
    let k = model.kerr;
    let kappa = model.kappa_h;
    let d = f - model.f_r;
    let half = kappa / T::lit(2.0);
    let lorentz = port.kappa_in * port.kappa_out / (T::lit(4.0) * d * d + kappa * kappa);

    let minus = Complex::new(d, -half) / k;
    let plus = Complex::new(d, half) / k;
    let one = Complex::new(T::one(), T::zero());
    let zeta = Complex::new(
        T::lit(2.0) * kappa * kappa * drive / (T::lit(9.0) * k * k),
        T::zero(),
    );

    let num = hyp0f2(one - minus, -plus, zeta)?;
    let den = hyp0f2(-minus, -plus, zeta)?;
    Ok(lorentz * num.norm_sqr() / den.norm_sqr())
}

/// Closed-form peak positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Peaks<T> {
    Single(T),
    Pair { minus: T, plus: T },
}

impl<T: Real> Peaks<T> {
    pub fn splitting(&self) -> T {
        match *self {
            Peaks::Single(_) => T::zero(),
            Peaks::Pair { minus, plus } => plus - minus,
        }
    }
}

/// f± = f_r ± (√2/3) κ √(P_in/P* − 1) above threshold; one peak at f_r otherwise.
///
/// Valid for κ ≪ |K|. At exactly P* the pair is degenerate.
pub fn peak_frequencies<T: Real>(
    model: &KerrModel<T>,
    p_in: PowerLevel<T>,
    direction: Direction,
) -> Peaks<T> {
    let ratio = p_in.as_watts() / model.p_star(direction).as_watts();
    if ratio < T::one() {
        return Peaks::Single(model.f_r);
    }
    let offset = T::lit(2.0).sqrt() / T::lit(3.0) * model.kappa_h * (ratio - T::one()).sqrt();
    Peaks::Pair {
        minus: model.f_r - offset,
        plus: model.f_r + offset,
    }
}

/// P_peak = P* (1 + 9 Δ² / (2κ²)): the drive at which a peak sits at `f`.
pub fn peak_power<T: Real>(model: &KerrModel<T>, f: T, direction: Direction) -> PowerLevel<T> {
    let d = f - model.f_r;
    let k = model.kappa_h;
    let w = model.p_star(direction).as_watts()
        * (T::one() + T::lit(9.0) * d * d / (T::lit(2.0) * k * k));
    PowerLevel::watts(w).expect("positive threshold yields positive peak power")
}

/// Local maxima of the full transmission between `lo` and `hi`, located on a
/// grid of `samples` points and refined by golden-section search.
pub fn numerical_peaks<T: Real>(
    model: &KerrModel<T>,
    p_in: PowerLevel<T>,
    direction: Direction,
    lo: T,
    hi: T,
    samples: usize,
) -> Result<Vec<T>> {
    let samples = samples.max(8);
    let step = (hi - lo) / T::from_usize_lossy(samples - 1);
    let grid: Vec<T> = (0..samples)
        .map(|i| lo + step * T::from_usize_lossy(i))
        .collect();
    let values = grid
        .iter()
        .map(|&f| duffing_transmission(model, f, p_in, direction))
        .collect::<Result<Vec<T>>>()?;

    let mut peaks = Vec::new();
    for i in 1..samples - 1 {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            let f = |x: T| duffing_transmission(model, x, p_in, direction).unwrap_or(T::zero());
            peaks.push(golden_max(f, grid[i - 1], grid[i + 1], step * T::lit(1e-6)));
        }
    }
    Ok(peaks)
}

/// Maximises a unimodal function on `[a, b]`.
pub(crate) fn golden_max<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / T::lit(2.0)
}

/// Bare (qubit-decoupled) hybrid-mode response seen as a notch in the
/// through transmissions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponse<T> {
    pub f_h: T,
    pub f1: T,
    pub f2: T,
    pub kappa_h1: T,
    pub kappa_h2: T,
    pub kappa_h: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThroughPath {
    S41,
    S32,
}

impl<T: Real> LinearResponse<T> {
    pub fn from_circuit(p: &CircuitParams<T>, mode: &HybridMode<T>) -> Self {
        Self {
            f_h: mode.f_h,
            f1: p.f1,
            f2: p.f2,
            kappa_h1: mode.kappa_h1,
            kappa_h2: mode.kappa_h2,
            kappa_h: mode.kappa_h,
        }
    }

    /// Depth of the notch at resonance along `path`.
    pub fn depth(&self, path: ThroughPath) -> T {
        let (fj, own) = match path {
            ThroughPath::S41 => (self.f1, self.kappa_h1),
            ThroughPath::S32 => (self.f2, self.kappa_h2),
        };
        let r = self.f_h / fj;
        let cross = T::lit(2.0) * self.kappa_h1 * self.kappa_h2;
        r * r * r * r * (own * own + cross) / (self.kappa_h * self.kappa_h)
    }
}

/// |S41|² = 1 − (f_h/f1)⁴ (κ_h1² + 2κ_h1κ_h2) / (4(f−f_h)² + κ_h²); S32 with 1↔2.
pub fn linear_transmission<T: Real>(resp: &LinearResponse<T>, f: T, path: ThroughPath) -> T {
    let d = f - resp.f_h;
    let k2 = resp.kappa_h * resp.kappa_h;
    T::one() - resp.depth(path) * k2 / (T::lit(4.0) * d * d + k2)
}

/// R = |s42 − s31| / (s42 + s31).
pub fn rectification_ratio<T: Real>(s31: T, s42: T) -> Result<T> {
    if s31 < T::zero() || s42 < T::zero() {
        return Err(Error::InvalidArgument(
            "transmissions must be non-negative".into(),
        ));
    }
    let sum = s31 + s42;
    if sum == T::zero() {
        return Err(Error::UndefinedRatio);
    }
    Ok((s42 - s31).abs() / sum)
}
