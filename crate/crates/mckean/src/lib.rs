//! Monte Carlo verification and command-line tooling for the McKean game
//! solver in `mckean-core`.

pub mod mc;
pub mod cli;
pub mod format;
pub mod verify;
