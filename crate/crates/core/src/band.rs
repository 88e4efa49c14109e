//! Banded Hermitian matrices and their lowest eigenvalues.
//!
//! Eigenvalues are bracketed with Sylvester inertia counts: the number of
//! negative pivots in the LDLᴴ factorisation of `H − σI` equals the number
//! of eigenvalues below `σ`. A factorisation costs O(n·w²) for bandwidth `w`,
//! far below a dense solve for the charge-basis Hamiltonians used here.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower band of a Hermitian matrix: `get(i, j)` for `i − w ≤ j ≤ i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian<T> {
    dim: usize,
    width: usize,
    // data[i * (width + 1) + (i - j)] = H[i][j]
    data: Vec<Complex<T>>,
}

impl<T: Real> BandedHermitian<T> {
    pub fn zeros(dim: usize, width: usize) -> Self {
        Self {
            dim,
            width,
            data: vec![Complex::new(T::zero(), T::zero()); dim * (width + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.width
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.width && i < self.dim);
        i * (self.width + 1) + (i - j)
    }

    /// Element `H[i][j]`, using Hermiticity above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        if i >= j {
            if i - j > self.width {
                Complex::new(T::zero(), T::zero())
            } else {
                self.data[self.slot(i, j)]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    /// Sets `H[i][j]` (and implicitly `H[j][i]`). Diagonal entries must be real.
    pub fn set(&mut self, i: usize, j: usize, value: Complex<T>) {
        let (i, j, value) = if i >= j {
            (i, j, value)
        } else {
            (j, i, value.conj())
        };
        assert!(i - j <= self.width, "element ({i}, {j}) outside the band");
        let slot = self.slot(i, j);
        self.data[slot] = if i == j {
            Complex::new(value.re, T::zero())
        } else {
            value
        };
    }

    pub fn add(&mut self, i: usize, j: usize, value: Complex<T>) {
        let current = self.get(i, j);
        self.set(i, j, current + value);
    }

    /// Dense row-major copy of the full matrix.
    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..self.dim {
            let first = i.saturating_sub(self.width);
            let last = (i + self.width).min(self.dim - 1);
            let radius: T = (first..=last)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).norm())
                .sum();
            let d = self.get(i, i).re;
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: T, scratch: &mut Scratch<T>) -> usize {
        let n = self.dim;
        let w = self.width;
        scratch.resize(n, w);
        let stride = w + 1;
        let l = &mut scratch.lower;
        let d = &mut scratch.pivots;
        let tiny = T::epsilon() * T::epsilon() * (sigma.abs() + T::one());
        let mut negatives = 0;

        for j in 0..n {
            let first = j.saturating_sub(w);
            let mut dj = self.data[j * stride].re - sigma;
            for m in first..j {
                dj = dj - l[j * stride + (j - m)].norm_sqr() * d[m];
            }
            if dj == T::zero() {
                dj = -tiny;
            }
            d[j] = dj;
            if dj < T::zero() {
                negatives += 1;
            }
            let last = (j + w).min(n - 1);
            for i in j + 1..=last {
                let mut s = self.data[i * stride + (i - j)];
                for m in i.saturating_sub(w)..j {
                    s = s - l[i * stride + (i - m)] * l[j * stride + (j - m)].conj() * d[m];
                }
                l[i * stride + (i - j)] = s / dj;
            }
        }
        negatives
    }

    /// The `k` lowest eigenvalues in ascending order, each bracketed to `tol`.
    pub fn lowest_eigenvalues(&self, k: usize, tol: T) -> Result<Vec<T>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        if k > self.dim {
            return Err(Error::Eigensolver(format!(
                "requested {k} eigenvalues of a {0}x{0} matrix",
                self.dim
            )));
        }
        let (glo, ghi) = self.gershgorin();
        if !glo.is_finite() || !ghi.is_finite() {
            return Err(Error::Eigensolver("non-finite matrix entries".into()));
        }
        let scale = glo.abs().max(ghi.abs()).max(T::min_positive_value());
        let tol = tol.max(T::lit(4.0) * T::epsilon() * scale);
        let mut scratch = Scratch::default();

        // lower[i] < λ_i ≤ upper[i]
        let mut lower = vec![glo - tol; k];
        let mut upper = vec![ghi + tol; k];
        for idx in 0..k {
            if idx > 0 {
                lower[idx] = lower[idx].max(lower[idx - 1]);
            }
            let mut steps = 0;
            while upper[idx] - lower[idx] > tol {
                let mid = (lower[idx] + upper[idx]) / T::lit(2.0);
                if mid <= lower[idx] || mid >= upper[idx] {
                    break;
                }
                let count = self.count_below(mid, &mut scratch);
                for (i, (lo, hi)) in lower.iter_mut().zip(upper.iter_mut()).enumerate().skip(idx) {
                    if count > i {
                        *hi = hi.min(mid);
                    } else {
                        *lo = lo.max(mid);
                    }
                }
                steps += 1;
                if steps > 4096 {
                    return Err(Error::Eigensolver("bisection did not terminate".into()));
                }
            }
        }
        Ok(lower
            .iter()
            .zip(&upper)
            .map(|(&lo, &hi)| (lo + hi) / T::lit(2.0))
            .collect())
    }
}

/// Reusable work arrays for [`BandedHermitian::count_below`].
#[derive(Debug, Default)]
pub struct Scratch<T> {
    lower: Vec<Complex<T>>,
    pivots: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn resize(&mut self, n: usize, w: usize) {
        self.lower
            .resize(n * (w + 1), Complex::new(T::zero(), T::zero()));
        self.pivots.resize(n, T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Complex as NComplex, DMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, w: usize, seed: u64) -> BandedHermitian<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = BandedHermitian::zeros(n, w);
        for i in 0..n {
            h.set(
                i,
                i,
                Complex::new(rng.random_range(-5.0..5.0) * (i as f64 + 1.0), 0.0),
            );
            for j in i.saturating_sub(w)..i {
                h.set(
                    i,
                    j,
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                );
            }
        }
        h
    }

    fn dense_eigenvalues(h: &BandedHermitian<f64>) -> Vec<f64> {
        let n = h.dim();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let v = h.get(i, j);
            NComplex::new(v.re, v.im)
        });
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn hermitian_access() {
        let h = random_band(12, 3, 1);
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(h.get(i, j), h.get(j, i).conj());
            }
            assert_eq!(h.get(i, i).im, 0.0);
        }
        assert_eq!(h.get(11, 0), Complex::new(0.0, 0.0));
    }

    #[test]
    fn counts_match_dense_spectrum() {
        for seed in 0..6 {
            let h = random_band(40, 5, seed);
            let e = dense_eigenvalues(&h);
            let mut scratch = Scratch::default();
            for w in e.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let expected = e.iter().filter(|&&x| x < mid).count();
                assert_eq!(h.count_below(mid, &mut scratch), expected);
            }
        }
    }

    #[test]
    fn lowest_eigenvalues_match_dense() {
        for seed in 10..16 {
            let h = random_band(60, 7, seed);
            let e = dense_eigenvalues(&h);
            let got = h.lowest_eigenvalues(4, 1e-11).unwrap();
            for (a, b) in got.iter().zip(&e) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let h = random_band(30, 4, 99);
        let (lo, hi) = h.gershgorin();
        let e = dense_eigenvalues(&h);
        assert!(lo <= e[0] && e[e.len() - 1] <= hi);
    }

    #[test]
    fn too_many_eigenvalues() {
        let h = random_band(3, 1, 0);
        assert!(h.lowest_eigenvalues(4, 1e-9).is_err());
        assert!(h.lowest_eigenvalues(0, 1e-9).unwrap().is_empty());
    }
}
