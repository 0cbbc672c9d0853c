//! Structural and strong structural synchronization of oscillator arrays
//! coupled through dissipative and restorative laplacians.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod graphs;
pub mod laplacians;
pub mod linalg;
pub mod lp;
pub mod report;
pub mod spectral;
pub mod structural;
pub mod topology;

pub use error::{Error, Result};
