//! Classical electrodynamics of relativistic point charges under standard
//! and measurement-color coupling, with radiation reaction, discrete
//! symmetry checks and an exact photon operator algebra.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod lienard_wiechert;
pub mod numeric;
pub mod photon;
pub mod spacetime;
pub mod symmetry;

pub use error::{Error, Result};
