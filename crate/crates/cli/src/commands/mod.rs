//! One module per subcommand. Each `run` computes its outputs in memory and
//! returns them for an all-or-nothing commit.

pub mod calibrate;
pub mod fit;
pub mod map;
pub mod modes;
pub mod qubit;
pub mod rmap;
pub mod spectrum;
pub mod synth;
