//! Truncated number-state models of the membrane coupled to cavity modes,
//! with ħ = 1 and energies in rad/s.

mod basis;
mod evolve;
mod hamiltonian;
mod study;

pub use basis::{FockBasis, DEFAULT_MAX_DIM};
pub use evolve::{
    dense_spectrum, evolve_state, fidelity, number_state, photon_number, position_expectation, site_number,
    top_layer_population, DenseSpectrum, EvolveOptions, Evolution, Propagator, DENSE_LIMIT,
};
pub use hamiltonian::{build_hamiltonian, FockHamiltonian, FockModel, HamiltonianOptions, ModelTag, Rwa};
pub use study::{
    block_mode_sum, compare_models, detuned_rabi, fit_rabi, rwa_toggle_study, ComparisonSetup, ModelComparison, RabiFit,
    RwaToggleReport,
};
