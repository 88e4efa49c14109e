//! Threshold power and Kerr coefficient from a power–frequency map of one
//! transmission direction.
//!
//! Stage 1 reads the split-peak loci: every row with two resolved maxima
//! gives P* = P / (1 + 9s²/(8κ²)) from the splitting `s`, with κ from a
//! Lorentzian fit to the lowest-power row. Stage 2 refines P*, K, κ, f_r and
//! an overall amplitude against the full ₀F₂ transmission of every cell.

use crate::error::{Error, Result};
use crate::kerr::{transmission_at_drive, Direction, KerrModel, Port};
use crate::map::{check_monotone, SpectrumMap};
use crate::params::{dbm_to_watts, PowerLevel};
use crate::scalar::Real;

use super::optimizer::{least_squares, Options, Param};
use super::{mad, median, FitResult};

/// |S|² of one direction, `values[j][i]` at `powers_dbm[j]`, `frequencies[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap<T> {
    pub frequencies: Vec<T>,
    pub powers_dbm: Vec<T>,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> PowerMap<T> {
    pub fn new(frequencies: Vec<T>, powers_dbm: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        check_monotone(&frequencies, "frequency")?;
        check_monotone(&powers_dbm, "power_dbm")?;
        if values.len() != powers_dbm.len() || values.iter().any(|r| r.len() != frequencies.len()) {
            return Err(Error::GridMismatch(format!(
                "map values do not form a {}x{} grid",
                powers_dbm.len(),
                frequencies.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invariant("map", "values must be finite"));
        }
        Ok(Self {
            frequencies,
            powers_dbm,
            values,
        })
    }

    /// One direction of a power-axis spectrum map.
    pub fn from_spectrum(map: &SpectrumMap<T>, direction: Direction) -> Result<Self> {
        if map.kind != crate::map::SecondAxis::PowerDbm {
            return Err(Error::InvalidArgument("map must have a power axis".into()));
        }
        Self::new(
            map.frequencies.clone(),
            map.axis2.clone(),
            map.values(direction).to_vec(),
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DuffingFitOptions<T> {
    pub direction: Direction,
    pub p_star_dbm: Option<T>,
    pub kerr: Option<T>,
    pub kappa_h: Option<T>,
}

impl<T: Real> DuffingFitOptions<T> {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            p_star_dbm: None,
            kerr: None,
            kappa_h: None,
        }
    }
}

/// Local maxima of a row standing out of its noise, at most the two highest.
///
/// The noise σ is the median absolute deviation of second differences
/// (scaled to a Gaussian σ), which cancel the local slope so the broad
/// resonance itself does not inflate it. Maxima are taken on the row
/// smoothed with a five-point binomial kernel, whose noise is 0.52σ; call
/// that σ_s. A maximum must exceed the row median by 3σ_s; a second maximum
/// must lie at least `min_separation` from the first and rise 3σ_s above the
/// lowest smoothed sample between them. Positions are refined by a parabola
/// through three smoothed samples and returned in ascending order.
pub fn detect_peaks<T: Real>(frequencies: &[T], row: &[T], min_separation: T) -> Vec<T> {
    let n = row.len();
    if n < 3 {
        return Vec::new();
    }
    // Second differences of white noise carry √6 σ.
    let diffs: Vec<T> = row
        .windows(3)
        .map(|w| w[2] - T::lit(2.0) * w[1] + w[0])
        .collect();
    let sigma = mad(&diffs) / T::lit(0.674_489_75 * 6f64.sqrt());
    let row = &smooth(row);
    // √(Σw²) of the [1, 4, 6, 4, 1]/16 kernel.
    let margin = T::lit(3.0 * (70.0_f64 / 256.0).sqrt()) * sigma;
    let floor = median(row) + margin;
    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| row[i] > floor && row[i] >= row[i - 1] && row[i] > row[i + 1])
        .collect();
    candidates.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let refine = |i: usize| {
        let (y0, y1, y2) = (row[i - 1], row[i], row[i + 1]);
        let curvature = y0 - T::lit(2.0) * y1 + y2;
        let shift = if curvature < T::zero() {
            (y0 - y2) / (T::lit(2.0) * curvature)
        } else {
            T::zero()
        };
        frequencies[i] + shift * (frequencies[i + 1] - frequencies[i - 1]) / T::lit(2.0)
    };
    let Some(&first) = candidates.first() else {
        return Vec::new();
    };
    let mut kept = vec![refine(first)];
    for &i in &candidates[1..] {
        let f = refine(i);
        if (f - kept[0]).abs() < min_separation {
            continue;
        }
        let (a, b) = if i < first { (i, first) } else { (first, i) };
        let valley = row[a..=b].iter().copied().fold(T::infinity(), T::min);
        if row[i] - valley >= margin && valley < row[i] {
            kept.push(f);
            break;
        }
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    kept
}

/// Five-point binomial smoothing; the two samples at each end are kept.
fn smooth<T: Real>(row: &[T]) -> Vec<T> {
    let mut out = row.to_vec();
    if row.len() >= 5 {
        for (i, w) in row.windows(5).enumerate() {
            out[i + 2] =
                (w[0] + w[4] + T::lit(4.0) * (w[1] + w[3]) + T::lit(6.0) * w[2]) / T::lit(16.0);
        }
    }
    out
}

/// Lorentzian fit `A / (1 + 4(f − f_r)²/κ²)` to the lowest-power row.
fn lorentzian_start<T: Real>(f: &[T], row: &[T]) -> Result<FitResult<T>> {
    let (imax, vmax) =
        row.iter().enumerate().fold(
            (0, T::neg_infinity()),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    let base = median(row).min(vmax);
    let half = base + (vmax - base) / T::lit(2.0);
    let left = (0..imax).rev().find(|&i| row[i] < half).unwrap_or(0);
    let right = (imax + 1..row.len())
        .find(|&i| row[i] < half)
        .unwrap_or(row.len() - 1);
    let width = (f[right] - f[left]).max(f[1] - f[0]);
    let n = f.len();
    let params = [
        Param::new("f_r", f[imax], f[0], f[n - 1], width / T::lit(10.0)),
        Param::new(
            "kappa_h",
            width,
            width / T::lit(20.0),
            width * T::lit(20.0),
            width / T::lit(10.0),
        ),
        Param::new(
            "amplitude",
            vmax,
            T::zero(),
            vmax * T::lit(10.0),
            vmax / T::lit(10.0),
        ),
    ];
    least_squares(
        &params,
        |p| {
            Ok(f.iter()
                .zip(row)
                .map(|(&x, &v)| {
                    let d = T::lit(2.0) * (x - p[0]) / p[1];
                    p[2] / (T::one() + d * d) - v
                })
                .collect())
        },
        Options::default(),
    )
}

/// Cell model with equal partials: `amplitude` is the low-power peak height.
fn map_residuals<T: Real>(map: &PowerMap<T>, p: &[T], direction: Direction) -> Result<Vec<T>> {
    let (p_star_dbm, kerr, kappa, f_r, amplitude) = (p[0], p[1], p[2], p[3], p[4]);
    let half = kappa / T::lit(2.0);
    let p_star = PowerLevel::dbm(p_star_dbm);
    let model = KerrModel::new(f_r, kerr, kappa, half, half, p_star, p_star)?;
    let port: Port<T> = model.port(direction);
    let p_star_w = dbm_to_watts(p_star_dbm);
    let mut out = Vec::with_capacity(map.values.len() * map.frequencies.len());
    for (row, &pdbm) in map.values.iter().zip(&map.powers_dbm) {
        let drive = dbm_to_watts(pdbm) / p_star_w;
        for (&f, &v) in map.frequencies.iter().zip(row) {
            let t = transmission_at_drive(&model, port, f, drive)?;
            out.push(T::lit(4.0) * amplitude * t - v);
        }
    }
    Ok(out)
}

/// Fits P* (dBm), K (Hz), κ_h, f_r and amplitude to a power–frequency map.
///
/// If no row shows two resolved maxima the splitting onset lies above the
/// map: the result then holds only `p_star_dbm` (the highest power, flagged
/// as a lower bound) and the Lorentzian `kappa_h`, `f_r`, `amplitude`.
pub fn fit_duffing_map<T: Real>(
    map: &PowerMap<T>,
    opts: DuffingFitOptions<T>,
) -> Result<FitResult<T>> {
    if map.powers_dbm.len() < 3 || map.frequencies.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "map is {}x{}; need at least 3 powers and 10 frequencies",
            map.powers_dbm.len(),
            map.frequencies.len()
        )));
    }
    let f = &map.frequencies;
    let linear = lorentzian_start(f, &map.values[0])?;
    let kappa0 = opts.kappa_h.unwrap_or(linear.values[1]);
    let f_r0 = linear.values[0];
    let amp0 = linear.values[2];

    // Stage 1: splitting of every resolved pair.
    let min_sep = kappa0 / T::lit(2.0);
    let mut estimates = Vec::new();
    for (row, &pdbm) in map.values.iter().zip(&map.powers_dbm) {
        let peaks = detect_peaks(f, row, min_sep);
        if let [lo, hi] = peaks[..] {
            let s = hi - lo;
            let ratio = T::one() + T::lit(9.0) * s * s / (T::lit(8.0) * kappa0 * kappa0);
            let p_star_w = dbm_to_watts(pdbm) / ratio;
            estimates.push(T::lit(10.0) * (p_star_w / T::lit(1e-3)).log10());
        }
    }

    if estimates.is_empty() && opts.p_star_dbm.is_none() {
        let top = *map.powers_dbm.last().expect("checked non-empty");
        return Ok(FitResult {
            names: ["p_star_dbm", "kappa_h", "f_r", "amplitude"]
                .map(String::from)
                .to_vec(),
            values: vec![top, linear.values[1], linear.values[0], linear.values[2]],
            uncertainties: vec![
                T::infinity(),
                linear.uncertainties[1],
                linear.uncertainties[0],
                linear.uncertainties[2],
            ],
            rss: linear.rss,
            iterations: linear.iterations,
            evaluations: linear.evaluations,
            converged: linear.converged,
            at_bound: vec![false; 4],
            lower_bound: vec![true, false, false, false],
        });
    }
    let p_star0 = opts.p_star_dbm.unwrap_or_else(|| median(&estimates));

    // Starts: best (P*, K) of a coarse scan around the stage-1 threshold and
    // across the map's power range, for each sign of K. The sign shows up
    // as which split peak is taller (the upper one for K < 0), but at high
    // drive that height difference sinks into the noise, so both signs are
    // refined and the lower residual wins. A single spurious pair can throw
    // the stage-1 P* far off, hence the scan over the whole power range.
    let cost = |p_star: T, k: T| -> T {
        map_residuals(map, &[p_star, k, kappa0, f_r0, amp0], opts.direction)
            .map(|r| r.iter().map(|&v| v * v).sum())
            .unwrap_or_else(|_| T::infinity())
    };
    // Splitting was seen inside the map, so P* lies below its top power.
    let p_lo = map.powers_dbm[0] - T::lit(20.0);
    let p_hi = *map.powers_dbm.last().expect("checked non-empty");
    let p_grid: Vec<T> = match opts.p_star_dbm {
        Some(p) => vec![p],
        None => {
            let mut grid: Vec<T> = (-3..=3).map(|i| p_star0 + T::lit(1.5 * i as f64)).collect();
            let mut p = map.powers_dbm[0];
            while p <= p_hi {
                grid.push(p);
                p = p + T::lit(4.0);
            }
            grid.retain(|&p| p >= p_lo && p <= p_hi);
            grid
        }
    };
    let signs: Vec<T> = match opts.kerr {
        Some(k) => vec![k.signum()],
        None => vec![-T::one(), T::one()],
    };
    let starts: Vec<(T, T)> = signs
        .into_iter()
        .filter_map(|sign| {
            let kerrs: Vec<T> = match opts.kerr {
                Some(k) => vec![k],
                None => (0..11)
                    .map(|i| sign * kappa0 * T::lit(10.0).powf(T::lit(-0.5 + 0.3 * i as f64)))
                    .collect(),
            };
            let mut best = (T::infinity(), None);
            for &p in &p_grid {
                for &k in &kerrs {
                    let c = cost(p, k);
                    if c < best.0 {
                        best = (c, Some((p, k)));
                    }
                }
            }
            best.1
        })
        .collect();

    let mut best: Option<FitResult<T>> = None;
    let mut last_err = None;
    for (p_start, kerr0) in starts {
        let (k_lo, k_hi) = if kerr0 < T::zero() {
            (kerr0 * T::lit(20.0), kerr0 / T::lit(20.0))
        } else {
            (kerr0 / T::lit(20.0), kerr0 * T::lit(20.0))
        };
        let params = [
            Param::new(
                "p_star_dbm",
                p_start,
                p_lo.min(p_start),
                p_hi.max(p_start),
                T::lit(0.5),
            ),
            Param::new("kerr", kerr0, k_lo, k_hi, kerr0.abs() / T::lit(10.0)),
            Param::new(
                "kappa_h",
                kappa0,
                kappa0 / T::lit(5.0),
                kappa0 * T::lit(5.0),
                kappa0 / T::lit(20.0),
            ),
            Param::new("f_r", f_r0, f[0], f[f.len() - 1], kappa0 / T::lit(20.0)),
            Param::new(
                "amplitude",
                amp0,
                T::zero(),
                amp0 * T::lit(5.0),
                amp0 / T::lit(20.0),
            ),
        ];
        match least_squares(
            &params,
            |p| map_residuals(map, p, opts.direction),
            Options::default(),
        ) {
            Ok(fit) if best.as_ref().is_none_or(|b| fit.rss < b.rss) => best = Some(fit),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::NonConvergence("no usable Kerr start".into()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::synthesize_map;

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

    fn freqs() -> Vec<f64> {
        (0..81).map(|i| 6.784e9 - 4e6 + 1e5 * i as f64).collect()
    }

    fn powers(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + step * i as f64).collect()
    }

    #[test]
    fn peaks_are_found_and_separated() {
        let f: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let bump = |c: f64, h: f64| move |x: f64| h / (1.0 + ((x - c) / 4.0).powi(2));
        let (a, b) = (bump(80.0, 1.0), bump(120.0, 0.7));
        let row: Vec<f64> = f.iter().map(|&x| a(x) + b(x)).collect();
        let peaks = detect_peaks(&f, &row, 10.0);
        assert_eq!(peaks.len(), 2);
        assert!(
            (peaks[0] - 80.0).abs() < 0.5 && (peaks[1] - 120.0).abs() < 0.5,
            "{peaks:?}"
        );
        // One peak only when the separation rule merges them.
        assert_eq!(detect_peaks(&f, &row, 50.0).len(), 1);
        // Flat rows have none.
        assert!(detect_peaks(&f, &vec![0.3; 200], 1.0).is_empty());
    }

    #[test]
    fn noiseless_map_recovers_parameters() {
        let m = model();
        let map = synthesize_map(&m, &freqs(), &powers(-130.0, -98.0, 2.0), 0.0, 0).unwrap();
        let pm = PowerMap::from_spectrum(&map, Direction::Forward).unwrap();
        let fit = fit_duffing_map(&pm, DuffingFitOptions::new(Direction::Forward)).unwrap();
        assert!(
            (fit.get("p_star_dbm").unwrap() + 112.0).abs() < 0.01,
            "{fit:?}"
        );
        assert!(((fit.get("kerr").unwrap() + 11.5e6) / 11.5e6).abs() < 0.01);
        assert!(((fit.get("kappa_h").unwrap() - 1.1e6) / 1.1e6).abs() < 0.01);
    }

    #[test]
    fn noisy_backward_map() {
        let m = model();
        let map = synthesize_map(&m, &freqs(), &powers(-135.0, -97.0, 2.0), 2e-4, 8).unwrap();
        let pm = PowerMap::from_spectrum(&map, Direction::Backward).unwrap();
        let fit = fit_duffing_map(&pm, DuffingFitOptions::new(Direction::Backward)).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.get("p_star_dbm").unwrap() + 117.0).abs() < 1.0,
            "{fit:?}"
        );
        assert!(((fit.get("kerr").unwrap() + 11.5e6) / 11.5e6).abs() < 0.15);
    }

    #[test]
    fn no_splitting_gives_lower_bound() {
        let m = model();
        let map = synthesize_map(&m, &freqs(), &powers(-140.0, -125.0, 1.0), 2e-4, 1).unwrap();
        let pm = PowerMap::from_spectrum(&map, Direction::Forward).unwrap();
        let fit = fit_duffing_map(&pm, DuffingFitOptions::new(Direction::Forward)).unwrap();
        assert!(fit.is_lower_bound("p_star_dbm"));
        assert_eq!(fit.get("p_star_dbm"), Some(-125.0));
        assert_eq!(fit.get("kerr"), None);
    }

    #[test]
    fn map_shape_is_checked() {
        assert!(PowerMap::new(vec![1.0, 2.0], vec![-1.0], vec![vec![0.0]]).is_err());
        let pm =
            PowerMap::new(vec![1.0, 2.0], vec![-2.0, -1.0, 0.0], vec![vec![0.0; 2]; 3]).unwrap();
        assert!(matches!(
            fit_duffing_map(&pm, DuffingFitOptions::new(Direction::Forward)),
            Err(Error::InsufficientData(_))
        ));
    }
}
