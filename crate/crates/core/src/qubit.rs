//! Three-junction flux qubit in the two-island charge basis.
//!
//! ```text
//! H = 4/(1−r²) [E_C1 n1² + 2r √(E_C1 E_C2) n1 n2 + E_C2 n2²]
//!     − E_J cos φ1 − E_J cos φ2 − α E_J cos(2πΦ/Φ0 + φ1 − φ2)
//! ```
//!
//! Islands 1 and 2 sit between the big junctions and the small one; the
//! small junction joins the islands, and its capacitance (α times that of a
//! big junction) couples their charges with r = α/(1+α). Gate charges are
//! zero. Plane waves e^{i(n1 φ1 + n2 φ2)} with |n1|, |n2| ≤ N form the
//! basis, ordered `(n1 + N)(2N + 1) + (n2 + N)`, which gives a Hermitian
//! matrix of bandwidth 2N + 1. The constant (2 + α) E_J is dropped.

use std::io::Write;

use num_complex::Complex;

use crate::band::BandedHermitian;
use crate::error::{Error, Result};
use crate::hybrid::coupled_oscillator_modes;
use crate::params::FluxQubitParams;
use crate::scalar::{two_pi, Real};

pub const DEFAULT_BASIS: usize = 12;
/// Largest basis dimension (2N+1)² accepted.
pub const MAX_BASIS_DIM: usize = 99 * 99;
/// Change in f01 (Hz) tolerated between successive basis sizes.
pub const CONVERGENCE_HZ: f64 = 1e6;
// Eigenvalue bracket width, Hz.
const EIGEN_TOL_HZ: f64 = 1.0;

/// Capacitive coupling ratio between the two islands.
fn island_coupling<T: Real>(alpha: T) -> T {
    alpha / (T::one() + alpha)
}

/// Qubit Hamiltonian truncated to charges in `[−n, n]`; energies in Hz.
pub fn qubit_hamiltonian<T: Real>(q: &FluxQubitParams<T>, n: usize) -> Result<BandedHermitian<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "basis half-width must be at least 1".into(),
        ));
    }
    let side = 2 * n + 1;
    let dim = side * side;
    if dim > MAX_BASIS_DIM {
        return Err(Error::BasisTooLarge {
            n,
            dim,
            limit: MAX_BASIS_DIM,
        });
    }
    let r = island_coupling(q.alpha);
    let kin = T::lit(4.0) / (T::one() - r * r);
    let cross = T::lit(2.0) * r * (q.ec1 * q.ec2).sqrt();
    let half_ej = -q.ej / T::lit(2.0);
    let phase = two_pi::<T>() * q.reduced_flux();
    let small = Complex::new(phase.cos(), phase.sin()) * (-q.alpha * q.ej / T::lit(2.0));
    let big = Complex::new(half_ej, T::zero());

    let ni = n as i64;
    let index = |a: i64, b: i64| ((a + ni) as usize) * side + (b + ni) as usize;
    let mut h = BandedHermitian::zeros(dim, side);
    for a in -ni..=ni {
        for b in -ni..=ni {
            let i = index(a, b);
            let (fa, fb) = (T::lit(a as f64), T::lit(b as f64));
            let diag = kin * (q.ec1 * fa * fa + cross * fa * fb + q.ec2 * fb * fb);
            h.set(i, i, Complex::new(diag, T::zero()));
            if a < ni {
                h.set(index(a + 1, b), i, big);
            }
            if b < ni {
                h.set(index(a, b + 1), i, big);
            }
            // e^{i(φ1 − φ2)}: n1 → n1 + 1, n2 → n2 − 1
            if a < ni && b > -ni {
                h.set(index(a + 1, b - 1), i, small);
            }
        }
    }
    Ok(h)
}

/// Transition frequencies from the three lowest levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitLevels<T> {
    pub f01: T,
    pub f12: T,
    /// Basis half-width the values were computed with.
    pub basis: usize,
    pub converged: bool,
}

/// Levels at a fixed basis size, without a convergence check.
pub fn levels_at<T: Real>(q: &FluxQubitParams<T>, n: usize) -> Result<QubitLevels<T>> {
    let h = qubit_hamiltonian(q, n)?;
    let e = h.lowest_eigenvalues(3, T::lit(EIGEN_TOL_HZ))?;
    Ok(QubitLevels {
        f01: e[1] - e[0],
        f12: e[2] - e[1],
        basis: n,
        converged: false,
    })
}

/// f01 alone at a fixed basis size (two eigenvalues instead of three).
pub fn f01_at<T: Real>(q: &FluxQubitParams<T>, n: usize) -> Result<T> {
    let h = qubit_hamiltonian(q, n)?;
    let e = h.lowest_eigenvalues(2, T::lit(EIGEN_TOL_HZ))?;
    Ok(e[1] - e[0])
}

/// f01 (and f12) with basis doubling until f01 moves by less than 1 MHz.
///
/// Starts by comparing half-width ⌊n/2⌋ against `n` (`n ≥ 2`); if they disagree the
/// basis doubles until it agrees or reaches [`MAX_BASIS_DIM`], in which case
/// the last value is returned with `converged == false`.
pub fn f01<T: Real>(q: &FluxQubitParams<T>, n: usize) -> Result<QubitLevels<T>> {
    let mut fine_n = n.max(2);
    let mut coarse = levels_at(q, fine_n / 2)?;
    loop {
        let mut fine = levels_at(q, fine_n)?;
        if (fine.f01 - coarse.f01).abs() < T::lit(CONVERGENCE_HZ) {
            fine.converged = true;
            return Ok(fine);
        }
        let next = 2 * fine_n;
        if (2 * next + 1) * (2 * next + 1) > MAX_BASIS_DIM {
            return Ok(fine);
        }
        coarse = fine;
        fine_n = next;
    }
}

/// f01 and f12 over a flux grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpectrum<T> {
    pub flux: Vec<T>,
    pub f01: Vec<T>,
    pub f12: Vec<T>,
    pub basis: Vec<usize>,
    pub converged: Vec<bool>,
}

pub fn qubit_spectrum<T: Real>(
    q: &FluxQubitParams<T>,
    fluxes: &[T],
    n: usize,
) -> Result<QubitSpectrum<T>> {
    use rayon::prelude::*;
    let levels = fluxes
        .par_iter()
        .map(|&flux| f01(&q.at_flux(flux), n))
        .collect::<Result<Vec<_>>>()?;
    Ok(QubitSpectrum {
        flux: fluxes.to_vec(),
        f01: levels.iter().map(|l| l.f01).collect(),
        f12: levels.iter().map(|l| l.f12).collect(),
        basis: levels.iter().map(|l| l.basis).collect(),
        converged: levels.iter().map(|l| l.converged).collect(),
    })
}

impl<T: Real> QubitSpectrum<T> {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "flux,f01,f12,converged")?;
        for i in 0..self.flux.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.flux[i].as_f64(),
                self.f01[i].as_f64(),
                self.f12[i].as_f64(),
                self.converged[i]
            )?;
        }
        Ok(())
    }
}

/// Branches (f₊, f₋) of a resonator mode `f_mode` coupled to the qubit with strength `g`.
pub fn avoided_crossing<T: Real>(f_mode: T, f01: T, g: T) -> (T, T) {
    coupled_oscillator_modes(f_mode, f01, g)
}
