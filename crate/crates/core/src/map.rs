//! Frequency × (power | flux) maps of both transmissions and of the
//! rectification ratio derived from them.
//!
//! Rows are evaluated in parallel; each cell depends only on its own grid
//! coordinates, so output is identical regardless of scheduling.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kerr::{duffing_transmission, rectification_ratio, Direction, KerrModel};
use crate::params::PowerLevel;
use crate::scalar::Real;

/// Masking threshold on `|S31|² + |S42|²` used when none is given.
pub const DEFAULT_MASK_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondAxis {
    PowerDbm,
    Flux,
}

impl SecondAxis {
    pub fn label(self) -> &'static str {
        match self {
            SecondAxis::PowerDbm => "power_dbm",
            SecondAxis::Flux => "flux",
        }
    }
}

/// `values31[j][i]` is `|S31|²` at `axis2[j]`, `frequencies[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap<T> {
    pub frequencies: Vec<T>,
    pub axis2: Vec<T>,
    pub kind: SecondAxis,
    pub values31: Vec<Vec<T>>,
    pub values42: Vec<Vec<T>>,
}

/// Masked cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectificationMap<T> {
    pub frequencies: Vec<T>,
    pub axis2: Vec<T>,
    pub kind: SecondAxis,
    pub values: Vec<Vec<Option<T>>>,
}

impl<T: Real> SpectrumMap<T> {
    pub fn values(&self, direction: Direction) -> &[Vec<T>] {
        match direction {
            Direction::Forward => &self.values31,
            Direction::Backward => &self.values42,
        }
    }
}

impl<T: Real> RectificationMap<T> {
    pub fn masked_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }
}

pub(crate) fn check_monotone<T: Real>(grid: &[T], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

fn build_map<T, F>(
    frequencies: &[T],
    axis2: &[T],
    kind: SecondAxis,
    at: F,
) -> Result<SpectrumMap<T>>
where
    T: Real,
    F: Fn(T) -> Result<(KerrModel<T>, PowerLevel<T>)> + Sync,
{
    check_monotone(frequencies, "frequency")?;
    check_monotone(axis2, kind.label())?;
    let rows: Vec<(Vec<T>, Vec<T>)> = axis2
        .par_iter()
        .map(|&y| {
            let (model, p_in) = at(y)?;
            let row = |dir| {
                frequencies
                    .iter()
                    .map(|&f| duffing_transmission(&model, f, p_in, dir))
                    .collect::<Result<Vec<T>>>()
            };
            Ok((row(Direction::Forward)?, row(Direction::Backward)?))
        })
        .collect::<Result<_>>()?;
    let (values31, values42) = rows.into_iter().unzip();
    Ok(SpectrumMap {
        frequencies: frequencies.to_vec(),
        axis2: axis2.to_vec(),
        kind,
        values31,
        values42,
    })
}

/// Both transmissions over frequency × input power (dBm) for a fixed model.
pub fn spectrum_map<T: Real>(
    model: &KerrModel<T>,
    frequencies: &[T],
    powers_dbm: &[T],
) -> Result<SpectrumMap<T>> {
    build_map(frequencies, powers_dbm, SecondAxis::PowerDbm, |dbm| {
        Ok((*model, PowerLevel::dbm(dbm)))
    })
}

/// Both transmissions over frequency × flux at a fixed input power.
/// `model_at` supplies the Kerr model at each flux bias.
pub fn spectrum_map_flux<T, F>(
    frequencies: &[T],
    fluxes: &[T],
    p_in: PowerLevel<T>,
    model_at: F,
) -> Result<SpectrumMap<T>>
where
    T: Real,
    F: Fn(T) -> Result<KerrModel<T>> + Sync,
{
    build_map(frequencies, fluxes, SecondAxis::Flux, |flux| {
        Ok((model_at(flux)?, p_in))
    })
}

/// Pointwise R with cells whose summed transmission falls below `threshold`
/// masked out. A zero threshold masks nothing except undefined 0/0 cells.
pub fn rectification_map<T: Real>(map: &SpectrumMap<T>, threshold: T) -> RectificationMap<T> {
    let values = map
        .values31
        .iter()
        .zip(&map.values42)
        .map(|(r31, r42)| {
            r31.iter()
                .zip(r42)
                .map(|(&a, &b)| {
                    if a + b < threshold {
                        None
                    } else {
                        rectification_ratio(a, b).ok()
                    }
                })
                .collect()
        })
        .collect();
    RectificationMap {
        frequencies: map.frequencies.clone(),
        axis2: map.axis2.clone(),
        kind: map.kind,
        values,
    }
}

/// Rectification map over frequency × power for a fixed model.
pub fn rectification_map_power<T: Real>(
    model: &KerrModel<T>,
    frequencies: &[T],
    powers_dbm: &[T],
    threshold: T,
) -> Result<RectificationMap<T>> {
    spectrum_map(model, frequencies, powers_dbm).map(|m| rectification_map(&m, threshold))
}

/// Writes a grid as CSV: the header row holds the second-axis values, the
/// first column the frequencies, and each cell the value at that point
/// (empty when `None`).
pub fn write_grid_csv<T: Real, W: Write>(
    out: &mut W,
    frequencies: &[T],
    axis2: &[T],
    kind: SecondAxis,
    cell: impl Fn(usize, usize) -> Option<T>,
) -> std::io::Result<()> {
    write!(out, "frequency_hz\\{}", kind.label())?;
    for y in axis2 {
        write!(out, ",{}", y.as_f64())?;
    }
    writeln!(out)?;
    for (i, f) in frequencies.iter().enumerate() {
        write!(out, "{}", f.as_f64())?;
        for j in 0..axis2.len() {
            match cell(i, j) {
                Some(v) => write!(out, ",{}", v.as_f64())?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

impl<T: Real> SpectrumMap<T> {
    pub fn write_csv<W: Write>(&self, out: &mut W, direction: Direction) -> std::io::Result<()> {
        let values = self.values(direction);
        write_grid_csv(out, &self.frequencies, &self.axis2, self.kind, |i, j| {
            Some(values[j][i])
        })
    }
}

impl<T: Real> RectificationMap<T> {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_grid_csv(out, &self.frequencies, &self.axis2, self.kind, |i, j| {
            self.values[j][i]
        })
    }
}

/// Grid read back from CSV; `values[j][i]` as in [`SpectrumMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub frequencies: Vec<T>,
    pub axis2: Vec<T>,
    pub kind: SecondAxis,
    pub values: Vec<Vec<Option<T>>>,
}

pub fn read_grid_csv<T: Real + std::str::FromStr, R: BufRead>(input: R) -> Result<Grid<T>> {
    let mut lines = input.lines().enumerate();
    let parse = |s: &str, line: usize| -> Result<T> {
        s.trim().parse::<T>().map_err(|_| Error::Syntax {
            line,
            message: format!("`{s}` is not a number"),
        })
    };
    let io_err = |e: std::io::Error| Error::Io {
        path: "<grid csv>".into(),
        source: e,
    };

    let (header, kind) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(Error::InsufficientData("grid file is empty".into()));
        };
        let line = line.map_err(io_err)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cells = trimmed.split(',');
        let corner = cells.next().unwrap_or_default();
        let kind = if corner.ends_with("flux") {
            SecondAxis::Flux
        } else {
            SecondAxis::PowerDbm
        };
        let axis2 = cells
            .map(|c| parse(c, idx + 1))
            .collect::<Result<Vec<T>>>()?;
        break (axis2, kind);
    };

    let mut frequencies = Vec::new();
    let mut columns: Vec<Vec<Option<T>>> = vec![Vec::new(); header.len()];
    for (idx, line) in lines {
        let line = line.map_err(io_err)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != header.len() + 1 {
            return Err(Error::Syntax {
                line: idx + 1,
                message: format!("expected {} cells, found {}", header.len() + 1, cells.len()),
            });
        }
        frequencies.push(parse(cells[0], idx + 1)?);
        for (j, c) in cells[1..].iter().enumerate() {
            columns[j].push(if c.trim().is_empty() {
                None
            } else {
                Some(parse(c, idx + 1)?)
            });
        }
    }
    check_monotone(&frequencies, "frequency")?;
    check_monotone(&header, kind.label())?;
    Ok(Grid {
        frequencies,
        axis2: header,
        kind,
        values: columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn values_in_unit_interval() {
        let m = model();
        let map = spectrum_map(&m, &grid(6.774e9, 6.794e9, 81), &grid(-135.0, -95.0, 9)).unwrap();
        for v in map.values31.iter().chain(&map.values42).flatten() {
            assert!(*v >= -1e-9 && *v <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn zero_threshold_masks_nothing() {
        let m = model();
        let r =
            rectification_map_power(&m, &grid(6.70e9, 6.86e9, 41), &[-134.0, -99.0], 0.0).unwrap();
        assert_eq!(r.masked_count(), 0);
        let r =
            rectification_map_power(&m, &grid(6.70e9, 6.86e9, 41), &[-134.0, -99.0], 1e-4).unwrap();
        assert!(r.masked_count() > 0);
    }

    #[test]
    fn low_power_rectification_is_weak_off_resonance() {
        let m = model();
        let freqs: Vec<f64> = grid(6.70e9, 6.86e9, 161)
            .into_iter()
            .filter(|f| (f - m.f_r).abs() > 5e6)
            .collect();
        let r = rectification_map_power(&m, &freqs, &[-134.0], DEFAULT_MASK_THRESHOLD).unwrap();
        for v in r.values[0].iter().flatten() {
            assert!(*v < 0.1);
        }
    }

    #[test]
    fn rejects_unsorted_grid() {
        let m = model();
        assert!(spectrum_map(&m, &[2.0, 1.0], &[-120.0]).is_err());
        assert!(spectrum_map(&m, &[1.0, 2.0], &[-120.0, -120.0]).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_mask() {
        let m = model();
        let r =
            rectification_map_power(&m, &grid(6.78e9, 6.79e9, 5), &[-120.0, -100.0], 1e-3).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let g: Grid<f64> = read_grid_csv(buf.as_slice()).unwrap();
        assert_eq!(g.frequencies, r.frequencies);
        assert_eq!(g.axis2, r.axis2);
        assert_eq!(g.kind, SecondAxis::PowerDbm);
        assert_eq!(g.values, r.values);
    }

    #[test]
    fn flux_axis_uses_supplied_models() {
        let m = model();
        let freqs = grid(6.77e9, 6.80e9, 31);
        let map = spectrum_map_flux(&freqs, &[0.45, 0.5], PowerLevel::dbm(-130.0), |flux| {
            Ok(KerrModel {
                f_r: m.f_r + (flux - 0.5) * 1e8,
                ..m
            })
        })
        .unwrap();
        assert_eq!(map.kind, SecondAxis::Flux);
        let argmax = |row: &[f64]| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0
        };
        assert!(argmax(&map.values31[0]) < argmax(&map.values31[1]));
    }
}
