//! Forward model plus seeded Gaussian noise in the linear domain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::kerr::{linear_transmission, KerrModel, LinearResponse, ThroughPath};
use crate::map::{spectrum_map, SpectrumMap};
use crate::scalar::Real;

use super::LineshapeData;

fn noise_source<T: Real>(sigma: T, seed: u64) -> Result<(ChaCha8Rng, Normal<f64>)> {
    let s = sigma.as_f64();
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    let normal = Normal::new(0.0, s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((ChaCha8Rng::seed_from_u64(seed), normal))
}

/// Adds independent N(0, σ²) noise to every value; σ = 0 returns the input.
pub fn add_noise<T: Real>(values: &[T], sigma: T, seed: u64) -> Result<Vec<T>> {
    let (mut rng, normal) = noise_source(sigma, seed)?;
    if sigma == T::zero() {
        return Ok(values.to_vec());
    }
    Ok(values
        .iter()
        .map(|&v| v + T::lit(normal.sample(&mut rng)))
        .collect())
}

/// Evaluates `model` on `grid` and adds noise.
pub fn synthesize_sweep<T, F>(model: F, grid: &[T], sigma: T, seed: u64) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let clean = grid.iter().map(|&f| model(f)).collect::<Result<Vec<T>>>()?;
    add_noise(&clean, sigma, seed)
}

/// Noisy |S41|² and |S32|² of a linear notch response on a common grid.
pub fn synthesize_lineshape<T: Real>(
    resp: &LinearResponse<T>,
    grid: &[T],
    sigma: T,
    seed: u64,
) -> Result<LineshapeData<T>> {
    let path = |p| move |f| Ok(linear_transmission(resp, f, p));
    // Independent streams for the two curves.
    let s41 = synthesize_sweep(path(ThroughPath::S41), grid, sigma, seed)?;
    let s32 = synthesize_sweep(path(ThroughPath::S32), grid, sigma, seed.wrapping_add(1))?;
    LineshapeData::new(grid.to_vec(), s41, s32, resp.f1, resp.f2)
}

/// Power–frequency map of both directions with noise on every cell.
pub fn synthesize_map<T: Real>(
    model: &KerrModel<T>,
    frequencies: &[T],
    powers_dbm: &[T],
    sigma: T,
    seed: u64,
) -> Result<SpectrumMap<T>> {
    let mut map = spectrum_map(model, frequencies, powers_dbm)?;
    let width = frequencies.len();
    let rows = powers_dbm.len();
    // One stream, fixed order: all forward rows, then all backward rows.
    let flat: Vec<T> = map
        .values31
        .iter()
        .chain(&map.values42)
        .flat_map(|row| row.iter().copied())
        .collect();
    let noisy = add_noise(&flat, sigma, seed)?;
    let mut chunks = noisy.chunks(width);
    for row in map.values31.iter_mut().chain(map.values42.iter_mut()) {
        row.copy_from_slice(chunks.next().expect("same size"));
    }
    debug_assert_eq!(map.values31.len(), rows);
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PowerLevel;

    fn model() -> KerrModel<f64> {
        KerrModel::new(
            6.784e9,
            -11.5e6,
            1.1e6,
            160e3,
            430e3,
            PowerLevel::dbm(-112.0),
            PowerLevel::dbm(-117.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_sigma_is_exact() {
        let v = vec![0.1, 0.5, 0.9];
        assert_eq!(add_noise(&v, 0.0, 7).unwrap(), v);
        let freqs: Vec<f64> = (0..30).map(|i| 6.78e9 + 2e5 * i as f64).collect();
        let clean = spectrum_map(&model(), &freqs, &[-130.0, -110.0]).unwrap();
        assert_eq!(
            synthesize_map(&model(), &freqs, &[-130.0, -110.0], 0.0, 3).unwrap(),
            clean
        );
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let v = vec![0.0; 100];
        let a = add_noise(&v, 0.01, 42).unwrap();
        assert_eq!(a, add_noise(&v, 0.01, 42).unwrap());
        assert_ne!(a, add_noise(&v, 0.01, 43).unwrap());
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(add_noise(&[1.0], -0.1, 0).is_err());
        assert!(add_noise(&[1.0], f64::NAN, 0).is_err());
    }

    #[test]
    fn sample_mean_matches_model() {
        let m = model();
        let f = m.f_r + 2e5;
        let truth = m.lorentzian(f);
        let sigma = 0.01;
        let n = 1000;
        let samples = add_noise(&vec![truth; n], sigma, 2024).unwrap();
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!((mean - truth).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn lineshape_curves_use_independent_streams() {
        let resp = LinearResponse {
            f_h: 6.762e9,
            f1: 6.209e9,
            f2: 6.595e9,
            kappa_h1: 160e3,
            kappa_h2: 430e3,
            kappa_h: 787e3,
        };
        let grid: Vec<f64> = (0..50).map(|i| 6.758e9 + 1.6e5 * i as f64).collect();
        let d = synthesize_lineshape(&resp, &grid, 0.005, 9).unwrap();
        let clean = synthesize_lineshape(&resp, &grid, 0.0, 9).unwrap();
        let n41: Vec<f64> = d.s41.iter().zip(&clean.s41).map(|(a, b)| a - b).collect();
        let n32: Vec<f64> = d.s32.iter().zip(&clean.s32).map(|(a, b)| a - b).collect();
        assert_ne!(n41, n32);
    }
}
