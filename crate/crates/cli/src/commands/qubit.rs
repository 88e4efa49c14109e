//! `qubit`: f01 and f12 of the flux qubit along a flux sweep.

use std::path::PathBuf;

use clap::Args;
use qdiode::qubit::{qubit_spectrum, DEFAULT_BASIS};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::model::{load, qubit_block};
use crate::output::{check_writable, render, Artifact};

#[derive(Debug, Args)]
pub struct QubitArgs {
    /// Parameter file with a qubit block (ej, alpha, ec1, ec2).
    #[arg(long, value_name = "FILE")]
    pub params: PathBuf,

    /// Flux grid in Φ/Φ0, `start:stop:count`.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub flux: GridSpec,

    /// Starting charge-basis half-width; doubled until f01 converges.
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub basis: usize,

    /// Output CSV `flux,f01,f12,converged` [default: standard output].
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn run(args: &QubitArgs) -> Result<Vec<Artifact>> {
    if let Some(path) = &args.output {
        check_writable(path)?;
    }
    let file = load(&args.params)?;
    let q = qubit_block(&file, &args.params)?;
    let spectrum = qubit_spectrum(&q, &args.flux.values(1.0), args.basis)?;
    let bytes = render(|out| spectrum.write_csv(out));
    Ok(vec![Artifact::new(args.output.as_deref(), bytes)])
}
