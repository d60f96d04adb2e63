//! Instantaneous eigenmodes of a cavity with a dielectric slab.

mod config;
mod derivative;
mod dispersion;
mod mode;

pub use config::{CavityConfig, DielectricProfile, Geometry, Phases};
pub use derivative::{frequency_derivative, mode_q_derivative, FrequencyDerivative, ModeDerivative};
pub use dispersion::{dispersion_roots, roots_in, scan_step, Band, Root};
pub use mode::{mode_function, mode_overlap, modes, overlap, slab_slope_overlap, CavityMode, Piece};

/// Contributing-mode spacing helpers and other small spectral utilities.
pub mod util {
    use super::*;
    use crate::error::Result;

    /// Frequencies of modes around `center`, with their indices and
    /// parities about the cavity centre.
    pub fn spectrum_table(config: &CavityConfig, q: f64, band: Band) -> Result<Vec<(usize, f64, i32)>> {
        Ok(modes(config, q, band)?
            .iter()
            .map(|m| (m.index, m.frequency(), m.parity()))
            .collect())
    }
}
