//! Effective Hamiltonian coefficients: the single-mode shift Δ_k, the
//! quadratic coupling about an extremum, the linearised multimode force
//! matrix, the resonant two-mode coupling η and the renormalised mass.
//!
//! Everything here is reported in SI: rad/s, rad/s per m (per m²), kg.

mod linear;
mod mass;
mod quadratic;
mod shift;

pub use linear::{linearized_hamiltonian_coeffs, two_mode_eta, LinearizedCoeffs, TwoModeModel, SLOPE_TOLERANCE};
pub use mass::{gradient_weight, photon_threshold, renormalized_mass_correction, MassCorrection, Occupancy, NON_DISPERSIVE_LIMIT};
pub use quadratic::{quadratic_coupling, ContributingMode, EffectiveModelReport, QuadraticOptions, WindowSampling};
pub use shift::{
    heisenberg_adiabatic_check, shift_from_xi, single_mode_shift, AdiabaticReport, AdiabaticVerdict, ShiftOptions,
    ShiftReport, ShiftTerm,
};

/// rad/s per m² to rad/s per nm².
pub fn per_nm2(v: f64) -> f64 {
    v * crate::units::NM * crate::units::NM
}
