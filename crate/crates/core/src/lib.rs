//! Dressed-state spectra and two-tone STIRAP dynamics of an artificial atom
//! coupled to a single cavity mode, from the Jaynes-Cummings regime into
//! ultrastrong coupling.
//!
//! Units: ħ = 1 and ω_c = 1 unless a model explicitly rescales `omega_c`.

pub mod error;
pub mod hilbert;
pub mod models;
pub mod spectra;
pub mod drive;
pub mod dynamics;
pub mod protocols;

pub use error::{Error, Result};
