//! Core-hole Green's functions from real-time coupled-cluster dynamics.

pub mod cc;
pub mod config;
pub mod error;
pub mod expansion;
pub mod fcidump;
pub mod fock;
pub mod greens;
pub mod hamiltonian;
pub mod oracle;
pub mod overlap;
pub mod qsp;
pub mod rteom;
pub mod runner;
pub mod spectra;
#[cfg(test)]
mod testing;

pub use error::{Error, Result};
