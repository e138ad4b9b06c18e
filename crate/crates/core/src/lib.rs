//! Exchange coupling of two-electron double quantum dots and the gate-error
//! susceptibility of barrier-gated versus channel ("flat-top") layouts.

pub mod analysis;
pub mod device;
pub mod eigen;
mod error;
pub mod io;
pub mod optimize;
pub mod twoelectron;
pub mod units;

pub use error::{Error, Result};
