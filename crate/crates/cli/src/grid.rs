//! `start:stop:count` grid flags.

use std::fmt;
use std::str::FromStr;

/// Evenly spaced grid, both end points included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    /// Grid points multiplied by `scale` (e.g. `1e9` for GHz → Hz), rounded
    /// to 12 significant digits so that `6.7:6.9:3` gives exactly 6.8e9
    /// rather than an accumulated-step neighbour.
    pub fn values(&self, scale: f64) -> Vec<f64> {
        let last = self.count - 1;
        let step = (self.stop - self.start) / last as f64;
        (0..self.count)
            .map(|i| {
                let x = if i == last {
                    self.stop
                } else {
                    self.start + step * i as f64
                };
                round_sig(round_sig(x) * scale)
            })
            .collect()
    }
}

fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(format!("`{s}` is not of the form start:stop:count"));
        };
        let number = |v: &str| -> Result<f64, String> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{v}` is not a finite number"))
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count
            .parse()
            .map_err(|_| format!("`{count}` is not a point count"))?;
        if !(start < stop) {
            return Err(format!("grid start {start} must be below stop {stop}"));
        }
        if count < 2 {
            return Err(format!("grid needs at least 2 points, got {count}"));
        }
        // Points are rounded to 12 significant digits; keep them distinct.
        if (stop - start) / (count - 1) as f64 <= 1e-10 * start.abs().max(stop.abs()) {
            return Err(format!("grid {s} is too fine to resolve"));
        }
        Ok(GridSpec { start, stop, count })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}
