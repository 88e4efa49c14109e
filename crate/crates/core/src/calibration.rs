//! In-situ background calibration of measured transmission sweeps.
//!
//! Every measured route (switch output `O_k`, input line `I_j`) is the sum
//! in dB of input-line attenuation, the device transmission and the output
//! wire. Off resonance the device transmits fully (0 dB), so a flux sweep
//! that moves the resonance away at each frequency exposes the lines alone:
//!
//! ```text
//! bg41 = S̃_1I1 + S̃_O44        (route O4I1 off resonance)
//! bg32 = S̃_2I2 + S̃_O33        (route O3I2 off resonance)
//! S̃31  = S̃_O3I1 − bg41 + (S̃_O44 − S̃_O33)
//! S̃42  = S̃_O4I2 − bg32 + (S̃_O33 − S̃_O44)
//! ```
//!
//! With identical output wires the bracketed terms vanish; they are carried
//! explicitly so that assumption is visible rather than silently applied.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::map::check_monotone;
use crate::scalar::Real;

/// Minimum number of flux points per frequency for background extraction.
pub const MIN_FLUX_POINTS: usize = 3;

/// `10^(x/10)`.
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// `10·log10(x)`; `x` must be positive.
pub fn linear_to_db<T: Real>(linear: T) -> Result<T> {
    if !(linear > T::zero()) || !linear.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cannot express {linear} in dB: must be positive and finite"
        )));
    }
    Ok(T::lit(10.0) * linear.log10())
}

/// Measurement route: switch output `O3`/`O4` fed from input line `I1`/`I2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    O3I1,
    O4I1,
    O3I2,
    O4I2,
}

impl Route {
    pub const ALL: [Route; 4] = [Route::O3I1, Route::O4I1, Route::O3I2, Route::O4I2];

    pub fn label(self) -> &'static str {
        match self {
            Route::O3I1 => "O3I1",
            Route::O4I1 => "O4I1",
            Route::O3I2 => "O3I2",
            Route::O4I2 => "O4I2",
        }
    }

    /// Device coefficient the route measures.
    pub fn coefficient(self) -> Coefficient {
        match self {
            Route::O3I1 => Coefficient::S31,
            Route::O4I1 => Coefficient::S41,
            Route::O3I2 => Coefficient::S32,
            Route::O4I2 => Coefficient::S42,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown route `{s}`")))
    }
}

/// Calibrated device coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    S31,
    S42,
    S41,
    S32,
}

impl Coefficient {
    pub fn label(self) -> &'static str {
        match self {
            Coefficient::S31 => "S31",
            Coefficient::S42 => "S42",
            Coefficient::S41 => "S41",
            Coefficient::S32 => "S32",
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One measured sweep, values in dB (`10·log10|S|²`).
#[derive(Debug, Clone, PartialEq)]
pub struct RawSweep<T> {
    frequencies: Vec<T>,
    db: Vec<T>,
    route: Route,
    flux: Option<T>,
}

impl<T: Real> RawSweep<T> {
    pub fn new(frequencies: Vec<T>, db: Vec<T>, route: Route, flux: Option<T>) -> Result<Self> {
        if frequencies.len() != db.len() {
            return Err(Error::InvalidArgument(format!(
                "{} frequencies but {} values",
                frequencies.len(),
                db.len()
            )));
        }
        check_monotone(&frequencies, "frequency")?;
        if let Some(i) = db.iter().position(|v| !v.is_finite()) {
            return Err(Error::invariant(
                "s_db",
                format!("non-finite value at row {}", i + 1),
            ));
        }
        Ok(Self {
            frequencies,
            db,
            route,
            flux,
        })
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn db(&self) -> &[T] {
        &self.db
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn flux(&self) -> Option<T> {
        self.flux
    }
}

/// Output-wire attenuations `S̃_O33`, `S̃_O44` in dB; zero for identical wires.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WireLoss<T> {
    pub o33: T,
    pub o44: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackgroundMethod {
    /// Per-frequency median across flux.
    #[default]
    Median,
    /// Per-frequency maximum transmission across flux.
    Max,
}

impl FromStr for BackgroundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "median" => Ok(Self::Median),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!(
                "unknown background method `{other}` (median, max)"
            ))),
        }
    }
}

/// Line attenuation for both input sides, dB.
#[derive(Debug, Clone, PartialEq)]
pub struct Background<T> {
    pub frequencies: Vec<T>,
    /// Route O4I1 off resonance.
    pub bg41: Vec<T>,
    /// Route O3I2 off resonance.
    pub bg32: Vec<T>,
    pub wires: WireLoss<T>,
}

fn median<T: Real>(values: &mut [T]) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / T::lit(2.0)
    }
}

/// Per-frequency background of one route from a stack of flux sweeps.
pub fn route_background<T: Real>(
    stack: &[RawSweep<T>],
    route: Route,
    method: BackgroundMethod,
) -> Result<(Vec<T>, Vec<T>)> {
    let sweeps: Vec<&RawSweep<T>> = stack.iter().filter(|s| s.route == route).collect();
    if sweeps.len() < MIN_FLUX_POINTS {
        return Err(Error::InsufficientData(format!(
            "route {route}: {} flux point(s), need at least {MIN_FLUX_POINTS}",
            sweeps.len()
        )));
    }
    let grid = &sweeps[0].frequencies;
    if let Some(bad) = sweeps.iter().find(|s| &s.frequencies != grid) {
        return Err(Error::GridMismatch(format!(
            "route {route}: sweep at flux {:?} has a different frequency grid",
            bad.flux.map(|f| f.as_f64())
        )));
    }
    let mut column = vec![T::zero(); sweeps.len()];
    let values = (0..grid.len())
        .map(|i| {
            for (c, s) in column.iter_mut().zip(&sweeps) {
                *c = s.db[i];
            }
            match method {
                BackgroundMethod::Median => median(&mut column),
                BackgroundMethod::Max => column.iter().copied().fold(T::neg_infinity(), T::max),
            }
        })
        .collect();
    Ok((grid.clone(), values))
}

/// Background for both sides from flux stacks of routes O4I1 and O3I2.
///
/// `stack` may hold sweeps of any route; only O4I1 and O3I2 are used.
pub fn extract_background<T: Real>(
    stack: &[RawSweep<T>],
    method: BackgroundMethod,
    wires: WireLoss<T>,
) -> Result<Background<T>> {
    let (grid41, bg41) = route_background(stack, Route::O4I1, method)?;
    let (grid32, bg32) = route_background(stack, Route::O3I2, method)?;
    if grid41 != grid32 {
        return Err(Error::GridMismatch(
            "routes O4I1 and O3I2 use different frequency grids".into(),
        ));
    }
    Ok(Background {
        frequencies: grid41,
        bg41,
        bg32,
        wires,
    })
}

/// A calibrated device coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedSweep<T> {
    pub coefficient: Coefficient,
    pub flux: Option<T>,
    pub frequencies: Vec<T>,
    pub db: Vec<T>,
    pub linear: Vec<T>,
}

/// Removes line attenuation from a raw sweep (exact grid match required).
///
/// S31 and S41 subtract the O4I1 background, S42 and S32 the O3I2 one; the
/// transmissions across the device additionally correct for unequal wires.
pub fn calibrate<T: Real>(raw: &RawSweep<T>, bg: &Background<T>) -> Result<CalibratedSweep<T>> {
    if raw.frequencies != bg.frequencies {
        return Err(Error::GridMismatch(format!(
            "route {} sweep ({} points) does not match the background grid ({} points)",
            raw.route,
            raw.frequencies.len(),
            bg.frequencies.len()
        )));
    }
    let wire = bg.wires.o44 - bg.wires.o33;
    let (reference, offset) = match raw.route {
        Route::O3I1 => (&bg.bg41, wire),
        Route::O4I1 => (&bg.bg41, T::zero()),
        Route::O4I2 => (&bg.bg32, -wire),
        Route::O3I2 => (&bg.bg32, T::zero()),
    };
    let db: Vec<T> = raw
        .db
        .iter()
        .zip(reference)
        .map(|(&r, &b)| r - b + offset)
        .collect();
    Ok(CalibratedSweep {
        coefficient: raw.route.coefficient(),
        flux: raw.flux,
        frequencies: raw.frequencies.clone(),
        linear: db.iter().map(|&v| db_to_linear(v)).collect(),
        db,
    })
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<sweep csv>".into(),
        source: e,
    }
}

/// Reads sweeps from CSV.
///
/// A `#`-prefixed header carries `key = value` metadata; `route` is required
/// and `flux` optional. The column header is `frequency_hz,s_db[,flux]`;
/// with a flux column the rows form a stack and are grouped by flux value in
/// order of first appearance.
pub fn read_sweeps<T: Real + FromStr, R: BufRead>(input: R) -> Result<Vec<RawSweep<T>>> {
    let mut route = None;
    let mut meta_flux = None;
    let mut columns: Option<bool> = None;
    let mut groups: Vec<(Option<T>, Vec<T>, Vec<T>)> = Vec::new();

    let parse = |s: &str, line: usize| -> Result<T> {
        s.trim().parse::<T>().map_err(|_| Error::Syntax {
            line,
            message: format!("`{}` is not a number", s.trim()),
        })
    };

    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once('=') {
                match key.trim().to_ascii_lowercase().as_str() {
                    "route" => route = Some(value.parse::<Route>()?),
                    "flux" => meta_flux = Some(parse(value, lineno)?),
                    _ => {}
                }
            }
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let Some(with_flux) = columns else {
            let has_flux = match cells.as_slice() {
                ["frequency_hz", "s_db"] => false,
                ["frequency_hz", "s_db", "flux"] => true,
                _ => {
                    return Err(Error::Syntax {
                        line: lineno,
                        message: "expected header `frequency_hz,s_db[,flux]`".into(),
                    })
                }
            };
            columns = Some(has_flux);
            continue;
        };
        let expected = if with_flux { 3 } else { 2 };
        if cells.len() != expected {
            return Err(Error::Syntax {
                line: lineno,
                message: format!("expected {expected} cells, found {}", cells.len()),
            });
        }
        let f = parse(cells[0], lineno)?;
        let v = parse(cells[1], lineno)?;
        let flux = if with_flux {
            Some(parse(cells[2], lineno)?)
        } else {
            meta_flux
        };
        match groups.iter_mut().find(|g| g.0 == flux) {
            Some(g) => {
                g.1.push(f);
                g.2.push(v);
            }
            None => groups.push((flux, vec![f], vec![v])),
        }
    }
    let route = route.ok_or_else(|| Error::MissingKey("route".into()))?;
    if groups.is_empty() {
        return Err(Error::InsufficientData(
            "sweep file has no data rows".into(),
        ));
    }
    groups
        .into_iter()
        .map(|(flux, f, v)| RawSweep::new(f, v, route, flux))
        .collect()
}

/// Writes sweeps of one route; a stack gets a flux column.
pub fn write_sweeps<T: Real, W: Write>(out: &mut W, sweeps: &[RawSweep<T>]) -> Result<()> {
    let Some(first) = sweeps.first() else {
        return Err(Error::InsufficientData("no sweeps to write".into()));
    };
    if sweeps.iter().any(|s| s.route != first.route) {
        return Err(Error::InvalidArgument(
            "all sweeps in a file share one route".into(),
        ));
    }
    let stacked = sweeps.len() > 1;
    if stacked && sweeps.iter().any(|s| s.flux.is_none()) {
        return Err(Error::InvalidArgument(
            "stacked sweeps need a flux value each".into(),
        ));
    }
    let w = |r: std::io::Result<()>| r.map_err(io_err);
    w(writeln!(out, "# route = {}", first.route))?;
    if !stacked {
        if let Some(flux) = first.flux {
            w(writeln!(out, "# flux = {}", flux.as_f64()))?;
        }
        w(writeln!(out, "frequency_hz,s_db"))?;
    } else {
        w(writeln!(out, "frequency_hz,s_db,flux"))?;
    }
    for s in sweeps {
        for (f, v) in s.frequencies.iter().zip(&s.db) {
            if stacked {
                let flux = s.flux.expect("checked above").as_f64();
                w(writeln!(out, "{},{},{}", f.as_f64(), v.as_f64(), flux))?;
            } else {
                w(writeln!(out, "{},{}", f.as_f64(), v.as_f64()))?;
            }
        }
    }
    Ok(())
}

impl<T: Real> CalibratedSweep<T> {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# coefficient = {}", self.coefficient)?;
        if let Some(flux) = self.flux {
            writeln!(out, "# flux = {}", flux.as_f64())?;
        }
        writeln!(out, "frequency_hz,s_db,s_linear")?;
        for i in 0..self.frequencies.len() {
            writeln!(
                out,
                "{},{},{}",
                self.frequencies[i].as_f64(),
                self.db[i].as_f64(),
                self.linear[i].as_f64()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| 6.7e9 + 1e5 * i as f64).collect()
    }

    fn flat(route: Route, level: f64, flux: f64) -> RawSweep<f64> {
        RawSweep::new(grid(50), vec![level; 50], route, Some(flux)).unwrap()
    }

    fn background(level41: f64, level32: f64) -> Background<f64> {
        Background {
            frequencies: grid(50),
            bg41: vec![level41; 50],
            bg32: vec![level32; 50],
            wires: WireLoss::default(),
        }
    }

    #[test]
    fn db_conversions() {
        assert_eq!(db_to_linear(0.0_f64), 1.0);
        assert!((db_to_linear(-10.0_f64) - 0.1).abs() < 1e-15);
        assert!((db_to_linear(-5.0_f64) - 0.316_23).abs() < 5e-6);
        assert!(linear_to_db(0.0_f64).is_err());
        assert!(linear_to_db(-1.0_f64).is_err());
        assert!((linear_to_db(0.1_f64).unwrap() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn cross_route_subtraction() {
        let bg = background(-70.0, -60.0);
        let s31 = calibrate(&flat(Route::O3I1, -80.0, 0.0), &bg).unwrap();
        assert_eq!(s31.coefficient, Coefficient::S31);
        assert!(s31.db.iter().all(|&v| (v + 10.0).abs() < 1e-12));
        assert!(s31.linear.iter().all(|&v| (v - 0.1).abs() < 1e-12));
        let s42 = calibrate(&flat(Route::O4I2, -80.0, 0.0), &bg).unwrap();
        assert!(s42.db.iter().all(|&v| (v + 20.0).abs() < 1e-12));
        let s41 = calibrate(&flat(Route::O4I1, -71.0, 0.0), &bg).unwrap();
        assert!(s41.db.iter().all(|&v| (v + 1.0).abs() < 1e-12));
        let s32 = calibrate(&flat(Route::O3I2, -61.0, 0.0), &bg).unwrap();
        assert!(s32.db.iter().all(|&v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_background_is_identity() {
        let raw = RawSweep::new(
            grid(5),
            vec![-3.0, -4.5, -9.0, -4.5, -3.0],
            Route::O3I1,
            None,
        )
        .unwrap();
        let bg = Background {
            frequencies: grid(5),
            bg41: vec![0.0; 5],
            bg32: vec![0.0; 5],
            wires: WireLoss::default(),
        };
        assert_eq!(calibrate(&raw, &bg).unwrap().db, raw.db);
    }

    #[test]
    fn unequal_wires_are_corrected() {
        // S̃_O3I1 = S̃_1I1 + S̃31 + S̃_O33, bg41 = S̃_1I1 + S̃_O44
        let (line, o33, o44, s31) = (-60.0, -2.0, -0.5, -7.0);
        let mut bg = background(line + o44, -50.0);
        bg.wires = WireLoss { o33, o44 };
        let raw = flat(Route::O3I1, line + s31 + o33, 0.0);
        let cal = calibrate(&raw, &bg).unwrap();
        assert!(cal.db.iter().all(|&v| (v - s31).abs() < 1e-12));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let raw = RawSweep::new(grid(49), vec![-80.0; 49], Route::O3I1, None).unwrap();
        assert!(matches!(
            calibrate(&raw, &background(-70.0, -70.0)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn raw_sweep_invariants() {
        assert!(RawSweep::new(vec![2.0, 1.0], vec![0.0, 0.0], Route::O3I1, None).is_err());
        assert!(RawSweep::new(vec![1.0, 2.0], vec![0.0, f64::NAN], Route::O3I1, None).is_err());
        assert!(RawSweep::new(vec![1.0, 2.0], vec![0.0], Route::O3I1, None).is_err());
    }

    #[test]
    fn constant_stack_background() {
        let stack: Vec<_> = (0..5)
            .flat_map(|k| {
                let flux = 0.1 * k as f64;
                [
                    flat(Route::O4I1, -70.0, flux),
                    flat(Route::O3I2, -65.0, flux),
                ]
            })
            .collect();
        for method in [BackgroundMethod::Median, BackgroundMethod::Max] {
            let bg = extract_background(&stack, method, WireLoss::default()).unwrap();
            assert!(bg.bg41.iter().all(|&v| v == -70.0));
            assert!(bg.bg32.iter().all(|&v| v == -65.0));
        }
    }

    #[test]
    fn too_few_flux_points() {
        let stack = vec![
            flat(Route::O4I1, -70.0, 0.0),
            flat(Route::O4I1, -70.0, 0.1),
            flat(Route::O3I2, -70.0, 0.0),
            flat(Route::O3I2, -70.0, 0.1),
            flat(Route::O3I2, -70.0, 0.2),
        ];
        assert!(matches!(
            extract_background(&stack, BackgroundMethod::Median, WireLoss::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn median_rejects_a_moving_dip() {
        // Each flux point has a deep Lorentzian dip at a different frequency.
        let f = grid(200);
        let stack: Vec<_> = (0..7)
            .map(|k| {
                let centre = f[20 + 25 * k];
                let db = f
                    .iter()
                    .map(|&x| {
                        let d = (x - centre) / 3e5;
                        -70.0 + linear_to_db(1.0 - 0.9 / (1.0 + 4.0 * d * d)).unwrap()
                    })
                    .collect();
                RawSweep::new(f.clone(), db, Route::O4I1, Some(k as f64 * 0.05)).unwrap()
            })
            .collect();
        let (_, bg) = route_background(&stack, Route::O4I1, BackgroundMethod::Median).unwrap();
        let worst = bg.iter().map(|v| (v + 70.0).abs()).fold(0.0, f64::max);
        assert!(worst < 0.1, "worst deviation {worst} dB");
    }

    #[test]
    fn csv_round_trip() {
        let stack = vec![
            flat(Route::O4I1, -70.0, 0.0),
            flat(Route::O4I1, -71.5, 0.25),
        ];
        let mut text = Vec::new();
        write_sweeps(&mut text, &stack).unwrap();
        let back: Vec<RawSweep<f64>> = read_sweeps(&text[..]).unwrap();
        assert_eq!(back, stack);

        let single =
            vec![RawSweep::new(grid(3), vec![-1.0, -2.0, -3.0], Route::O3I1, Some(0.5)).unwrap()];
        let mut text = Vec::new();
        write_sweeps(&mut text, &single).unwrap();
        let back: Vec<RawSweep<f64>> = read_sweeps(&text[..]).unwrap();
        assert_eq!(back, single);
    }

    #[test]
    fn csv_errors() {
        let no_route = "frequency_hz,s_db\n1,2\n";
        assert!(matches!(
            read_sweeps::<f64, _>(no_route.as_bytes()),
            Err(Error::MissingKey(_))
        ));
        let bad_header = "# route = O3I1\nfreq,s\n1,2\n";
        assert!(matches!(
            read_sweeps::<f64, _>(bad_header.as_bytes()),
            Err(Error::Syntax { line: 2, .. })
        ));
        let bad_cell = "# route = O3I1\nfrequency_hz,s_db\n1,x\n";
        assert!(matches!(
            read_sweeps::<f64, _>(bad_cell.as_bytes()),
            Err(Error::Syntax { line: 3, .. })
        ));
        let bad_route = "# route = O5I1\nfrequency_hz,s_db\n1,2\n";
        assert!(read_sweeps::<f64, _>(bad_route.as_bytes()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn calibration_is_linear_in_db(
            raw in proptest::collection::vec(-120.0_f64..0.0, 50),
            level in -90.0_f64..-30.0,
            c in proptest::sample::select(vec![-30.0, 0.0, 15.0]),
        ) {
            let r = RawSweep::new(grid(50), raw.clone(), Route::O3I1, None).unwrap();
            let shifted = RawSweep::new(grid(50), raw.iter().map(|v| v + c).collect(), Route::O3I1, None).unwrap();
            let a = calibrate(&r, &background(level, level)).unwrap();
            let b = calibrate(&shifted, &background(level + c, level + c)).unwrap();
            for (x, y) in a.db.iter().zip(&b.db) {
                proptest::prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn db_round_trip(x in 1e-12_f64..1e3) {
            let back = db_to_linear(linear_to_db(x).unwrap());
            proptest::prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
