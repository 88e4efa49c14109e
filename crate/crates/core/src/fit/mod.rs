//! Parameter estimation against the forward models, plus a seeded synthetic
//! data generator for round-trip checks.

mod crossing;
mod duffing;
mod lineshape;
pub mod optimizer;
mod qubit_band;
mod synth;

use std::io::Write;

pub use crossing::{fit_avoided_crossing, Branch, CrossingPoint};
pub use duffing::{detect_peaks, fit_duffing_map, DuffingFitOptions, PowerMap};
pub use lineshape::{fit_linear_lineshape, LineshapeData};
pub use optimizer::{least_squares, Options, Param};
pub use qubit_band::{fit_qubit_band, BandPoint, FIT_BASIS};
pub use synth::{add_noise, synthesize_lineshape, synthesize_map, synthesize_sweep};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub names: Vec<String>,
    pub values: Vec<T>,
    /// One-σ estimates from `(JᵀJ)⁻¹ · RSS/(N − p)`.
    pub uncertainties: Vec<T>,
    pub rss: T,
    /// Levenberg–Marquardt iterations.
    pub iterations: usize,
    /// Residual evaluations, simplex stage included.
    pub evaluations: usize,
    pub converged: bool,
    /// Parameter finished on its box boundary.
    pub at_bound: Vec<bool>,
    /// Value is only a lower bound, not a point estimate.
    pub lower_bound: Vec<bool>,
}

impl<T: Real> FitResult<T> {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.values[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.uncertainties[i])
    }

    pub fn is_lower_bound(&self, name: &str) -> bool {
        self.index(name).is_some_and(|i| self.lower_bound[i])
    }

    /// `key=value` report, one entry per line.
    pub fn write_report<W: Write>(&self, out: &mut W, kind: &str) -> std::io::Result<()> {
        writeln!(out, "fit={kind}")?;
        writeln!(out, "converged={}", self.converged)?;
        writeln!(out, "iterations={}", self.iterations)?;
        writeln!(out, "evaluations={}", self.evaluations)?;
        writeln!(out, "rss={:e}", self.rss.as_f64())?;
        for i in 0..self.names.len() {
            let name = &self.names[i];
            writeln!(out, "{name}={}", self.values[i].as_f64())?;
            writeln!(out, "{name}_uncertainty={}", self.uncertainties[i].as_f64())?;
            if self.lower_bound[i] {
                writeln!(out, "{name}_lower_bound=true")?;
            }
            if self.at_bound[i] {
                writeln!(out, "{name}_at_bound=true")?;
            }
        }
        Ok(())
    }
}

/// Median of a copy of `values` (empty input gives NaN).
pub(crate) fn median<T: Real>(values: &[T]) -> T {
    let mut v: Vec<T> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return T::nan();
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Median absolute deviation from the median.
pub(crate) fn mad<T: Real>(values: &[T]) -> T {
    let m = median(values);
    let dev: Vec<T> = values.iter().map(|&v| (v - m).abs()).collect();
    median(&dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_lists_every_parameter() {
        let r = FitResult {
            names: vec!["a".into(), "b".into()],
            values: vec![1.5, -2.0],
            uncertainties: vec![0.1, 0.2],
            rss: 1e-3,
            iterations: 4,
            evaluations: 30,
            converged: true,
            at_bound: vec![false, true],
            lower_bound: vec![true, false],
        };
        let mut out = Vec::new();
        r.write_report(&mut out, "demo").unwrap();
        let text = String::from_utf8(out).unwrap();
        for line in [
            "fit=demo",
            "a=1.5",
            "a_lower_bound=true",
            "b=-2",
            "b_at_bound=true",
        ] {
            assert!(
                text.lines().any(|l| l == line),
                "missing `{line}` in\n{text}"
            );
        }
        assert_eq!(r.get("b"), Some(-2.0));
        assert!(r.is_lower_bound("a") && !r.is_lower_bound("b"));
        assert_eq!(r.get("c"), None);
    }

    #[test]
    fn robust_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(mad(&[1.0, 1.0, 2.0, 2.0, 100.0]), 1.0);
    }
}
