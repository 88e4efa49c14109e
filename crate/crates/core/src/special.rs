//! Generalized hypergeometric function ₀F₂ by direct power series.
//!
//! ```text
//! ₀F₂(; a, b; z) = Σ_{n≥0} zⁿ / ((a)_n (b)_n n!)
//! ```
//!
//! The series is entire in `z`; convergence is geometric once `n` exceeds
//! `|a|`, `|b|` and `|z|^(1/3)`, so the transmission regime needs only a
//! handful of terms.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct SeriesOptions<T> {
    /// Stop once a term falls below `rel_tol · |partial sum|`.
    pub rel_tol: T,
    pub max_terms: usize,
}

impl<T: Real> Default for SeriesOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-15).max(T::epsilon()),
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

fn is_pole<T: Real>(x: Complex<T>) -> bool {
    x.im == T::zero() && x.re <= T::zero() && x.re == x.re.round()
}

pub fn hyp0f2<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> Result<Complex<T>> {
    hyp0f2_with(a, b, z, SeriesOptions::default())
}

pub fn hyp0f2_with<T: Real>(
    a: Complex<T>,
    b: Complex<T>,
    z: Complex<T>,
    opts: SeriesOptions<T>,
) -> Result<Complex<T>> {
    if is_pole(a) {
        return Err(Error::PoleArgument(format!("a = {}{:+}i", a.re, a.im)));
    }
    if is_pole(b) {
        return Err(Error::PoleArgument(format!("b = {}{:+}i", b.re, b.im)));
    }

    let one = Complex::new(T::one(), T::zero());
    let mut sum = one;
    let mut term = one;
    if z == Complex::new(T::zero(), T::zero()) {
        return Ok(sum);
    }
    let z_abs = z.norm();
    let half = T::lit(0.5);

    for n in 0..opts.max_terms {
        let k = T::from_usize_lossy(n);
        let ka = a + k;
        let kb = b + k;
        let denom = ka * kb * (k + T::one());
        term = term * z / denom;
        sum = sum + term;

        // Only trust the size test once the term ratio is shrinking for good.
        let next = T::from_usize_lossy(n + 1);
        let next_ratio = z_abs / ((a + next).norm() * (b + next).norm() * (next + T::one()));
        if next_ratio < half && term.norm() <= opts.rel_tol * sum.norm() {
            return Ok(sum);
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            break;
        }
    }

    Err(Error::SeriesNonConvergence {
        terms: opts.max_terms,
        partial_re: sum.re.as_f64(),
        partial_im: sum.im.as_f64(),
        last_term: term.norm().as_f64(),
    })
}
