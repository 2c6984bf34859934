//! Matching-network synthesis for miniature dielectric-filled open-ended
//! waveguide antennas.
//!
//! - [`waveguide`]: TE_m0 modal parameters, wave-amplitude transmission matrices,
//!   and the five-section matching network.
//! - [`aperture`]: spectral-domain aperture admittance and reflection.
//! - [`ga`]: binary-coded genetic search over section lengths and heights.
//! - [`io`]: run configuration, frequency sweeps, CSV and Touchstone export.

pub mod aperture;
pub mod error;
pub mod ga;
pub mod io;
pub mod quadrature;
pub mod waveguide;

pub use error::{Error, Result};
