//! Characteristic structure of linearized ideal MHD: wave speeds, symbol
//! calculus, regime classification, bicharacteristics and polarization
//! transport, with brute-force oracles for every closed-form identity.

pub mod background;
pub mod classify;
pub mod error;
pub mod geometry;
pub mod spectra;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
