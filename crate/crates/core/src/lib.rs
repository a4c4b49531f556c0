//! Frequency-resolved Laguerre-Gauss decomposition of the collinear
//! two-photon state emitted by a periodically poled crystal under a
//! monochromatic Gaussian pump, plus the figures of merit built on it.

pub mod biphoton;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod lgmodes;
pub mod optimize;
pub mod state;
pub mod tomography;
pub mod units;

pub use error::{Error, Result};
