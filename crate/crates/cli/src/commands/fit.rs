//! `fit`: parameter estimation from CSV data, `key=value` report.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qdiode::fit::{
    fit_avoided_crossing, fit_duffing_map, fit_linear_lineshape, fit_qubit_band, BandPoint,
    CrossingPoint, DuffingFitOptions, LineshapeData, PowerMap,
};
use qdiode::map::{read_grid_csv, SecondAxis};
use qdiode::{Direction, FitResult64};

use crate::error::{in_file, CliError, Result};
use crate::model::load;
use crate::output::{check_writable, render, Artifact};
use crate::table::read_columns;

const MHZ: f64 = 1e6;
const GHZ: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    /// Linear notch lineshape: input `frequency_hz,s41,s32` (linear |S|²);
    /// f1, f2 from --params.
    Lineshape,
    /// Avoided crossing: input `f01_hz,frequency_hz`.
    Crossing,
    /// Qubit band: input `flux,f01` (Hz); E_C from --params or --ec1-ghz/--ec2-ghz.
    Qubit,
    /// Kerr map: power-axis grid CSV of one direction, as written by `map`.
    Duffing,
}

impl FitKind {
    fn label(self) -> &'static str {
        match self {
            FitKind::Lineshape => "lineshape",
            FitKind::Crossing => "crossing",
            FitKind::Qubit => "qubit",
            FitKind::Duffing => "duffing",
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// What to fit.
    #[arg(long, value_enum)]
    pub kind: FitKind,

    /// Data file.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Parameter file (lineshape: f1, f2; qubit: ec1, ec2).
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Direction of a Duffing map: 13 or 24.
    #[arg(long, default_value = "13")]
    pub direction: Direction,

    /// Duffing start: threshold power in dBm.
    #[arg(long, value_name = "DBM", allow_hyphen_values = true)]
    pub p_star: Option<f64>,

    /// Duffing start: Kerr coefficient K/2π in MHz (its sign is kept).
    #[arg(long, value_name = "MHZ", allow_hyphen_values = true)]
    pub kerr_mhz: Option<f64>,

    /// Duffing start: linewidth κ_h/2π in MHz.
    #[arg(long, value_name = "MHZ")]
    pub kappa_h_mhz: Option<f64>,

    /// Crossing start: coupling g/2π in MHz (with --mode-ghz).
    #[arg(long, value_name = "MHZ", requires = "mode_ghz")]
    pub coupling_mhz: Option<f64>,

    /// Crossing start: uncoupled mode frequency in GHz (with --coupling-mhz).
    #[arg(long, value_name = "GHZ", requires = "coupling_mhz")]
    pub mode_ghz: Option<f64>,

    /// Qubit start: junction ratio α (with --ej-ghz).
    #[arg(long, requires = "ej_ghz")]
    pub alpha: Option<f64>,

    /// Qubit start: Josephson energy E_J/h in GHz (with --alpha).
    #[arg(long, value_name = "GHZ", requires = "alpha")]
    pub ej_ghz: Option<f64>,

    /// Charging energy E_C1/h in GHz [default: ec1 from --params].
    #[arg(long, value_name = "GHZ")]
    pub ec1_ghz: Option<f64>,

    /// Charging energy E_C2/h in GHz [default: ec2 from --params].
    #[arg(long, value_name = "GHZ")]
    pub ec2_ghz: Option<f64>,

    /// Write the report here instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn params_for(args: &FitArgs, what: &str) -> Result<qdiode::params::ParamFile<f64>> {
    let path = args.params.as_deref().ok_or_else(|| {
        CliError::usage(format!(
            "--kind {} needs --params for {what}",
            args.kind.label()
        ))
    })?;
    load(path)
}

fn lineshape(args: &FitArgs) -> Result<FitResult64> {
    let p = params_for(args, "f1 and f2")?.circuit;
    let mut cols = read_columns(&args.input, &["frequency_hz", "s41", "s32"])?;
    let (s32, s41, f) = (
        cols.pop().unwrap(),
        cols.pop().unwrap(),
        cols.pop().unwrap(),
    );
    let data = LineshapeData::new(f, s41, s32, p.f1, p.f2).map_err(in_file(&args.input))?;
    Ok(fit_linear_lineshape(&data)?)
}

fn crossing(args: &FitArgs) -> Result<FitResult64> {
    let cols = read_columns(&args.input, &["f01_hz", "frequency_hz"])?;
    let points: Vec<_> = cols[0]
        .iter()
        .zip(&cols[1])
        .map(|(&f01, &frequency)| CrossingPoint { f01, frequency })
        .collect();
    let init = args
        .coupling_mhz
        .zip(args.mode_ghz)
        .map(|(g, f)| (g * MHZ, f * GHZ));
    Ok(fit_avoided_crossing(&points, init)?)
}

fn qubit(args: &FitArgs) -> Result<FitResult64> {
    let (ec1, ec2) = match (args.ec1_ghz, args.ec2_ghz) {
        (Some(a), Some(b)) => (a * GHZ, b * GHZ),
        (a, b) => {
            let path = args.params.as_deref();
            let q = params_for(args, "ec1 and ec2")?.qubit.ok_or_else(|| {
                in_file(path.unwrap_or(Path::new("")))(qdiode::Error::MissingKey("ec1".into()))
            })?;
            (a.map_or(q.ec1, |v| v * GHZ), b.map_or(q.ec2, |v| v * GHZ))
        }
    };
    let cols = read_columns(&args.input, &["flux", "f01"])?;
    let points: Vec<_> = cols[0]
        .iter()
        .zip(&cols[1])
        .map(|(&flux, &f01)| BandPoint { flux, f01 })
        .collect();
    let init = args.alpha.zip(args.ej_ghz).map(|(a, ej)| (a, ej * GHZ));
    Ok(fit_qubit_band(&points, ec1, ec2, init)?)
}

fn read_power_map(path: &Path) -> Result<PowerMap<f64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let grid = read_grid_csv::<f64, _>(BufReader::new(file)).map_err(in_file(path))?;
    let table_err = |message: &str| CliError::Table {
        path: path.to_path_buf(),
        message: message.into(),
    };
    if grid.kind != SecondAxis::PowerDbm {
        return Err(table_err("a Duffing fit needs a power axis, found flux"));
    }
    let values = grid
        .values
        .into_iter()
        .map(|row| row.into_iter().collect::<Option<Vec<f64>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| table_err("map has empty cells"))?;
    PowerMap::new(grid.frequencies, grid.axis2, values).map_err(in_file(path))
}

fn duffing(args: &FitArgs) -> Result<FitResult64> {
    let map = read_power_map(&args.input)?;
    let mut opts = DuffingFitOptions::new(args.direction);
    opts.p_star_dbm = args.p_star;
    opts.kerr = args.kerr_mhz.map(|v| v * MHZ);
    opts.kappa_h = args.kappa_h_mhz.map(|v| v * MHZ);
    Ok(fit_duffing_map(&map, opts)?)
}

pub fn run(args: &FitArgs) -> Result<Vec<Artifact>> {
    if let Some(path) = &args.output {
        check_writable(path)?;
    }
    let result = match args.kind {
        FitKind::Lineshape => lineshape(args)?,
        FitKind::Crossing => crossing(args)?,
        FitKind::Qubit => qubit(args)?,
        FitKind::Duffing => duffing(args)?,
    };
    let bytes = render(|out| result.write_report(out, args.kind.label()));
    Ok(vec![Artifact::new(args.output.as_deref(), bytes)])
}
