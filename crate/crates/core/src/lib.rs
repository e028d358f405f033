//! Simulation toolkit for transmon–coupler–transmon devices: static ZZ and
//! XY coupling from exact diagonalization and perturbation theory, zero-ZZ
//! landscapes and branch tracing, and time-domain gate simulation.

pub mod dynamics;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod spectrum;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use model::{CouplingScaling, CouplingSpec, DeviceSpec, DriveSpec, HermitianOperator, ModeSpec};
pub use units::Frequency;
