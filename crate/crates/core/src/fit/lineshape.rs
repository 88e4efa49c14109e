//! Joint fit of the two linear notch responses |S41|², |S32|².

use crate::error::{Error, Result};
use crate::kerr::{linear_transmission, LinearResponse, ThroughPath};
use crate::map::check_monotone;
use crate::scalar::Real;

use super::optimizer::{least_squares, Options, Param};
use super::{mad, FitResult};

/// Both through-transmission sweeps (linear |S|²) on a common grid, with the
/// bare resonator frequencies that enter the notch depths.
#[derive(Debug, Clone, PartialEq)]
pub struct LineshapeData<T> {
    pub frequencies: Vec<T>,
    pub s41: Vec<T>,
    pub s32: Vec<T>,
    pub f1: T,
    pub f2: T,
}

impl<T: Real> LineshapeData<T> {
    pub fn new(frequencies: Vec<T>, s41: Vec<T>, s32: Vec<T>, f1: T, f2: T) -> Result<Self> {
        if s41.len() != frequencies.len() || s32.len() != frequencies.len() {
            return Err(Error::GridMismatch(format!(
                "{} frequencies, {} S41 and {} S32 values",
                frequencies.len(),
                s41.len(),
                s32.len()
            )));
        }
        check_monotone(&frequencies, "frequency")?;
        if !(f1 > T::zero() && f2 > T::zero()) {
            return Err(Error::invariant("f1/f2", "must be positive"));
        }
        if s41.iter().chain(&s32).any(|v| !v.is_finite()) {
            return Err(Error::invariant("transmission", "values must be finite"));
        }
        Ok(Self {
            frequencies,
            s41,
            s32,
            f1,
            f2,
        })
    }
}

/// Noise level from successive differences, robust to the dip itself.
fn noise_level<T: Real>(values: &[T]) -> T {
    let diffs: Vec<T> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // MAD → σ for a Gaussian, and differences carry √2 σ.
    mad(&diffs) / T::lit(0.674_489_75 * std::f64::consts::SQRT_2)
}

/// Full width at half depth around the minimum at `centre`.
fn half_depth_width<T: Real>(f: &[T], s: &[T], centre: usize, depth: T) -> Option<T> {
    let level = T::one() - depth / T::lit(2.0);
    let crossing = |i: usize, j: usize| {
        // linear interpolation between sample i (inside) and j (outside)
        let t = (level - s[i]) / (s[j] - s[i]);
        f[i] + t * (f[j] - f[i])
    };
    let outside = |i: &usize| s[*i] >= level;
    let left = (0..centre)
        .rev()
        .find(outside)
        .map(|i| crossing(i + 1, i))?;
    let right = (centre + 1..s.len())
        .find(outside)
        .map(|i| crossing(i - 1, i))?;
    Some(right - left)
}

/// Solves x² + 2xy = d1, y² + 2xy = d2 for x, y ≥ 0 by alternating updates.
fn split_partials<T: Real>(d1: T, d2: T) -> (T, T) {
    let mut x = (d1 / T::lit(3.0)).sqrt();
    let mut y = (d2 / T::lit(3.0)).sqrt();
    for _ in 0..200 {
        x = (y * y + d1).sqrt() - y;
        y = (x * x + d2).sqrt() - x;
    }
    (x.max(T::zero()), y.max(T::zero()))
}

/// Fits f_h, κ_h1, κ_h2 and κ_h (all Hz) to both notch curves at once.
///
/// Starts from the |S41|² minimum and its full width at half depth; the grid
/// must span at least five linewidths.
pub fn fit_linear_lineshape<T: Real>(data: &LineshapeData<T>) -> Result<FitResult<T>> {
    let f = &data.frequencies;
    let n = f.len();
    if n < 8 {
        return Err(Error::InsufficientData(format!(
            "{n} points, need at least 8"
        )));
    }
    let argmin = |s: &[T]| {
        s.iter().enumerate().fold(
            (0, T::infinity()),
            |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
        )
    };
    let (i41, min41) = argmin(&data.s41);
    let (_, min32) = argmin(&data.s32);
    let depth41 = T::one() - min41;
    let depth32 = T::one() - min32;
    for (name, depth, s) in [("S41", depth41, &data.s41), ("S32", depth32, &data.s32)] {
        let floor = (T::lit(5.0) * noise_level(s)).max(T::lit(1e-9));
        if !(depth > floor) {
            return Err(Error::Degenerate(format!(
                "{name} shows no resonance dip (depth {:e} against noise floor {:e})",
                depth.as_f64(),
                floor.as_f64()
            )));
        }
    }

    let f_h0 = f[i41];
    let kappa0 = half_depth_width(f, &data.s41, i41, depth41).ok_or_else(|| {
        Error::InsufficientData("dip is not resolved within the frequency grid".into())
    })?;
    let span = f[n - 1] - f[0];
    if !(kappa0 > T::zero()) || span < T::lit(5.0) * kappa0 {
        return Err(Error::InsufficientData(format!(
            "grid spans {:e} Hz, need at least five linewidths ({:e} Hz each)",
            span.as_f64(),
            kappa0.as_f64()
        )));
    }
    let r1 = data.f1 / f_h0;
    let r2 = data.f2 / f_h0;
    let (x, y) = split_partials(depth41 * r1.powi(4), depth32 * r2.powi(4));

    let step = kappa0 / T::lit(10.0);
    let params = [
        Param::new("f_h", f_h0, f[0], f[n - 1], step),
        Param::new(
            "kappa_h1",
            x * kappa0,
            T::zero(),
            T::lit(100.0) * kappa0,
            step,
        ),
        Param::new(
            "kappa_h2",
            y * kappa0,
            T::zero(),
            T::lit(100.0) * kappa0,
            step,
        ),
        Param::new(
            "kappa_h",
            kappa0,
            kappa0 / T::lit(100.0),
            T::lit(100.0) * kappa0,
            step,
        ),
    ];
    let residuals = |p: &[T]| -> Result<Vec<T>> {
        let resp = LinearResponse {
            f_h: p[0],
            f1: data.f1,
            f2: data.f2,
            kappa_h1: p[1],
            kappa_h2: p[2],
            kappa_h: p[3],
        };
        let r41 = f
            .iter()
            .zip(&data.s41)
            .map(|(&fi, &v)| linear_transmission(&resp, fi, ThroughPath::S41) - v);
        let r32 = f
            .iter()
            .zip(&data.s32)
            .map(|(&fi, &v)| linear_transmission(&resp, fi, ThroughPath::S32) - v);
        Ok(r41.chain(r32).collect())
    };
    least_squares(&params, residuals, Options::default())
}
