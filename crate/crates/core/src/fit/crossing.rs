//! Coupling strength and bare mode frequency from the two branches of an
//! avoided crossing between a resonator mode and the qubit.

use crate::error::{Error, Result};
use crate::qubit::avoided_crossing;
use crate::scalar::Real;

use super::optimizer::{least_squares, Options, Param};
use super::{median, FitResult};

/// A resonance observed at `frequency` while the bare qubit sat at `f01`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingPoint<T> {
    pub f01: T,
    pub frequency: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

/// Branch a point belongs to for mode `f_mode`.
///
/// The branches satisfy f₊² + f₋² = f_mode² + f01², so the mean of the two
/// squared bare frequencies separates them exactly for any coupling.
pub fn branch_of<T: Real>(point: &CrossingPoint<T>, f_mode: T) -> Branch {
    let mid = (f_mode * f_mode + point.f01 * point.f01) / T::lit(2.0);
    if point.frequency * point.frequency >= mid {
        Branch::Upper
    } else {
        Branch::Lower
    }
}

fn branch_counts<T: Real>(points: &[CrossingPoint<T>], f_mode: T) -> (usize, usize) {
    let upper = points
        .iter()
        .filter(|p| branch_of(p, f_mode) == Branch::Upper)
        .count();
    (upper, points.len() - upper)
}

/// Fits `g` and `f_mode` (Hz) to peak positions on both branches.
///
/// `init` optionally gives starting values `(g, f_mode)`; otherwise f_mode
/// starts at the median frequency of the points furthest from the qubit
/// line and `g` at the median of the per-point inversions
/// g² = (f² − f_mode²)(f² − f01²) / (4 f_mode f01).
pub fn fit_avoided_crossing<T: Real>(
    points: &[CrossingPoint<T>],
    init: Option<(T, T)>,
) -> Result<FitResult<T>> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} peak positions, need at least 4",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|p| !(p.f01 > T::zero() && p.frequency > T::zero()))
    {
        return Err(Error::invariant(
            "frequency",
            "peak and qubit frequencies must be positive",
        ));
    }

    let (g0, fm0) = match init {
        Some(v) => v,
        None => {
            let dist: Vec<T> = points.iter().map(|p| (p.frequency - p.f01).abs()).collect();
            let cut = median(&dist);
            let far: Vec<T> = points
                .iter()
                .zip(&dist)
                .filter(|(_, &d)| d >= cut)
                .map(|(p, _)| p.frequency)
                .collect();
            let fm = median(&far);
            let g2: Vec<T> = points
                .iter()
                .map(|p| {
                    let f2 = p.frequency * p.frequency;
                    (f2 - fm * fm) * (f2 - p.f01 * p.f01) / (T::lit(4.0) * fm * p.f01)
                })
                .filter(|&v| v > T::zero())
                .collect();
            let g = if g2.is_empty() {
                T::lit(1e-4) * fm
            } else {
                median(&g2).sqrt()
            };
            (g, fm)
        }
    };

    let (up, low) = branch_counts(points, fm0);
    if up < 2 || low < 2 {
        return Err(Error::IllPosed(format!(
            "need peaks on both branches, found {up} upper and {low} lower"
        )));
    }

    let f_lo = points
        .iter()
        .map(|p| p.frequency)
        .fold(T::infinity(), T::min);
    let f_hi = points
        .iter()
        .map(|p| p.frequency)
        .fold(T::neg_infinity(), T::max);
    let spread = (f_hi - f_lo).max(g0);
    let scale = (g0 / T::lit(5.0)).max(spread * T::lit(1e-4));
    let g_start = g0.min(spread);
    let params = [
        Param::new("g", g_start, T::zero(), spread, scale),
        Param::new("f_mode", fm0.max(f_lo).min(f_hi), f_lo, f_hi, scale),
    ];
    let residuals = |p: &[T]| -> Result<Vec<T>> {
        Ok(points
            .iter()
            .map(|pt| {
                let (plus, minus) = avoided_crossing(p[1], pt.f01, p[0]);
                match branch_of(pt, p[1]) {
                    Branch::Upper => plus - pt.frequency,
                    Branch::Lower => minus - pt.frequency,
                }
            })
            .collect())
    };
    let fit = least_squares(&params, residuals, Options::default())?;
    let (up, low) = branch_counts(points, fit.values[1]);
    if up < 2 || low < 2 {
        return Err(Error::IllPosed(format!(
            "fitted mode leaves {up} upper and {low} lower peaks; data cover one branch"
        )));
    }
    Ok(fit)
}
