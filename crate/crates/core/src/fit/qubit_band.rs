//! Asymmetry α and Josephson energy E_J from a measured f01(Φ) band.

use crate::error::{Error, Result};
use crate::params::FluxQubitParams;
use crate::qubit::f01_at;
use crate::scalar::Real;

use super::optimizer::{least_squares, Options, Param};
use super::FitResult;

/// Basis half-width used inside the fit: within 1 kHz of the converged
/// value for Φ/Φ0 ∈ [0.35, 0.65] at the reference parameters.
pub const FIT_BASIS: usize = 8;
// Coarse basis for the starting-point search.
const SEARCH_BASIS: usize = 4;
const MIN_POINTS: usize = 10;
const MIN_FLUX_SPAN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint<T> {
    /// Φ/Φ0.
    pub flux: T,
    /// Measured f01, Hz.
    pub f01: T,
}

fn band_residuals<T: Real>(
    points: &[BandPoint<T>],
    ec1: T,
    ec2: T,
    alpha: T,
    ej: T,
    basis: usize,
) -> Result<Vec<T>> {
    points
        .iter()
        .map(|p| {
            let q = FluxQubitParams {
                ej,
                alpha,
                ec1,
                ec2,
                flux: p.flux,
            };
            Ok(f01_at(&q, basis)? - p.f01)
        })
        .collect()
}

/// Fits α and E_J (Hz) with the charging energies held fixed.
///
/// Without `init` the start is the best point of a coarse α × E_J grid
/// evaluated in a small basis.
pub fn fit_qubit_band<T: Real>(
    points: &[BandPoint<T>],
    ec1: T,
    ec2: T,
    init: Option<(T, T)>,
) -> Result<FitResult<T>> {
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} flux points, need at least {MIN_POINTS}",
            points.len()
        )));
    }
    if !(ec1 > T::zero() && ec2 > T::zero()) {
        return Err(Error::invariant(
            "ec1/ec2",
            "charging energies must be positive",
        ));
    }
    let lo = points.iter().map(|p| p.flux).fold(T::infinity(), T::min);
    let hi = points
        .iter()
        .map(|p| p.flux)
        .fold(T::neg_infinity(), T::max);
    if !(hi - lo >= T::lit(MIN_FLUX_SPAN)) {
        return Err(Error::Degenerate(format!(
            "flux range {:.4} is narrower than {MIN_FLUX_SPAN}",
            (hi - lo).as_f64()
        )));
    }

    let (alpha0, ej0) = match init {
        Some(v) => v,
        None => {
            let mut best = (T::infinity(), T::zero(), T::zero());
            for a in [0.45, 0.55, 0.65, 0.75, 0.85] {
                for ej in [15e9, 25e9, 35e9, 50e9, 70e9, 100e9] {
                    let (a, ej) = (T::lit(a), T::lit(ej));
                    let Ok(r) = band_residuals(points, ec1, ec2, a, ej, SEARCH_BASIS) else {
                        continue;
                    };
                    let c: T = r.iter().map(|&v| v * v).sum();
                    if c < best.0 {
                        best = (c, a, ej);
                    }
                }
            }
            if !best.0.is_finite() {
                return Err(Error::NonConvergence("no usable starting point".into()));
            }
            (best.1, best.2)
        }
    };

    let params = [
        Param::new("alpha", alpha0, T::lit(0.2), T::lit(0.99), T::lit(0.02)),
        Param::new(
            "e_j",
            ej0,
            ej0 / T::lit(4.0),
            ej0 * T::lit(4.0),
            ej0 * T::lit(0.02),
        ),
    ];
    let opts = Options {
        // Each evaluation diagonalises one matrix per point; the grid
        // search already places the start in the basin.
        simplex_evals: 0,
        // Steps well above the 1 Hz eigenvalue bracket.
        diff_step: T::lit(1e-4),
        ..Options::default()
    };
    least_squares(
        &params,
        |p| band_residuals(points, ec1, ec2, p[0], p[1], FIT_BASIS),
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::add_noise;
    use crate::qubit::{qubit_spectrum, DEFAULT_BASIS};

    fn band(alpha: f64, ej: f64, n: usize, sigma: f64, seed: u64) -> Vec<BandPoint<f64>> {
        let q = FluxQubitParams::new(ej, alpha, 0.5e9, 0.5e9, 0.5).unwrap();
        let flux: Vec<f64> = (0..n)
            .map(|i| 0.40 + 0.1 * i as f64 / (n - 1) as f64)
            .collect();
        let s = qubit_spectrum(&q, &flux, DEFAULT_BASIS).unwrap();
        let noisy = add_noise(&s.f01, sigma, seed).unwrap();
        flux.iter()
            .zip(noisy)
            .map(|(&flux, f01)| BandPoint { flux, f01 })
            .collect()
    }

    #[test]
    fn noiseless_recovery() {
        let fit = fit_qubit_band(&band(0.632, 37.5e9, 12, 0.0, 0), 0.5e9, 0.5e9, None).unwrap();
        assert!((fit.get("alpha").unwrap() - 0.632).abs() < 1e-6, "{fit:?}");
        assert!(((fit.get("e_j").unwrap() - 37.5e9) / 37.5e9).abs() < 1e-6);
    }

    #[test]
    fn other_asymmetry_is_found() {
        let fit = fit_qubit_band(&band(0.5, 37.5e9, 12, 0.0, 0), 0.5e9, 0.5e9, None).unwrap();
        assert!((fit.get("alpha").unwrap() - 0.5).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn too_few_points_or_narrow_range() {
        let pts = band(0.632, 37.5e9, 12, 0.0, 0);
        assert!(matches!(
            fit_qubit_band(&pts[..9], 0.5e9, 0.5e9, None),
            Err(Error::InsufficientData(_))
        ));
        let narrow: Vec<_> = (0..12)
            .map(|i| BandPoint {
                flux: 0.49 + 0.001 * i as f64,
                f01: 2e9,
            })
            .collect();
        assert!(matches!(
            fit_qubit_band(&narrow, 0.5e9, 0.5e9, None),
            Err(Error::Degenerate(_))
        ));
    }
}
