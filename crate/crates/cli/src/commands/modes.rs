//! `modes`: hybrid-mode record of a parameter file.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use qdiode::hybrid::{threshold_ratio, HybridMode};

use crate::error::Result;
use crate::model;
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct ModesArgs {
    /// Device parameter file.
    #[arg(long, value_name = "FILE")]
    pub params: PathBuf,

    /// Also write the record as CSV (`key,value,unit`, SI units, full precision).
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Write the text report here instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// One record entry: SI value and how it is shown in the text report.
struct Entry {
    key: &'static str,
    value: f64,
    unit: &'static str,
    shown: String,
}

fn entry(key: &'static str, value: f64, unit: &'static str, shown: String) -> Entry {
    Entry {
        key,
        value,
        unit,
        shown,
    }
}

fn ghz(key: &'static str, hz: f64) -> Entry {
    entry(key, hz, "Hz", format!("{:.3} GHz", hz / 1e9))
}

fn khz(key: &'static str, hz: f64) -> Entry {
    entry(key, hz, "Hz", format!("{:.1} kHz", hz / 1e3))
}

fn record(params: &Path) -> Result<Vec<Entry>> {
    let file = model::load(params)?;
    let p = &file.circuit;
    let m = HybridMode::from_params(p)?;
    let ratio = threshold_ratio(p, m.kappa_h1, m.kappa_h2)?;
    let cot_sq = 1.0 / m.theta.tan().powi(2);
    let dbm = |key, level: qdiode::PowerLevel<f64>| {
        let v = level.as_dbm();
        entry(key, v, "dBm", format!("{v:.2} dBm"))
    };
    Ok(vec![
        ghz("fH", m.f_h),
        ghz("fL", m.f_l),
        entry("theta", m.theta, "rad", format!("{:.2}", m.theta)),
        entry("cot_squared_theta", cot_sq, "", format!("{cot_sq:.2}")),
        khz("kappa_c1", m.kappa_c1),
        khz("kappa_c2", m.kappa_c2),
        khz("kappa_h1", m.kappa_h1),
        khz("kappa_h2", m.kappa_h2),
        khz("kappa_hi", p.kappa_hi),
        khz("kappa_h", m.kappa_h),
        dbm("p_star1", m.p_star1),
        dbm("p_star2", m.p_star2),
        entry("threshold_ratio", ratio, "", format!("{ratio:.3}")),
        ghz("f_r", m.f_h + p.chi),
        entry("kerr", p.kerr, "Hz", format!("{:.2} MHz", p.kerr / 1e6)),
    ])
}

pub fn run(args: &ModesArgs) -> Result<Vec<Artifact>> {
    for path in args.output.iter().chain(&args.csv) {
        check_writable(path)?;
    }
    let entries = record(&args.params)?;
    let text = render(|out| {
        for e in &entries {
            writeln!(out, "{}={}", e.key, e.shown)?;
        }
        Ok(())
    });
    let mut outputs = vec![Artifact::new(args.output.as_deref(), text)];
    if let Some(csv) = &args.csv {
        let table = render(|out| {
            writeln!(out, "key,value,unit")?;
            for e in &entries {
                writeln!(out, "{},{},{}", e.key, e.value, e.unit)?;
            }
            Ok(())
        });
        outputs.push(Artifact::new(Some(csv), table));
    }
    Ok(outputs)
}
