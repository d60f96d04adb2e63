//! Eigenmodes, intermode couplings and effective Hamiltonians for a
//! one-dimensional cavity containing a movable dielectric membrane, plus a
//! classical field–membrane integrator and a truncated Fock-space evolver.
//!
//! Internally lengths are in metres and c = 1, so angular frequencies are in
//! rad per metre; see [`units`] for conversions.

pub mod classical;
pub mod couplings;
pub mod effective;
pub mod error;
pub mod fock;
pub mod numerics;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
