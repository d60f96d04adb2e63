//! Direct integration of the classical field equation together with the
//! membrane's equation of motion on a uniform grid.
//!
//! Units are natural (c = 1): time is measured in metres, A in arbitrary
//! units with field energy ∫½(εȦ² + (∂ₓA)²)dx, and the membrane mass and
//! potential in the same energy units.

mod analysis;
mod grid;
mod integrator;
mod motion;

pub use analysis::{
    adiabatic_invariant_probe, first_transfer_maximum, read_snapshot, spectral_peak, transfer_fraction, transfer_prediction,
    write_snapshot, AdiabaticProbeReport, SpectralPeak, SweepSpec, TransferPrediction,
};
pub use grid::{grid_config, permittivity, thin_slab_surrogate, Grid, MIN_CELLS_ACROSS_SLAB};
pub use integrator::{
    evolve_classical, radiation_force, ClassicalOptions, ClassicalState, ModeExcitation, Sample, Trajectory,
};
pub use motion::{MembraneMotion, PotentialSpec, PrescribedMotion};
