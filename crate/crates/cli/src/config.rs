use std::path::Path;

use mimcav::spectral::CavityConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Frozen membrane, one mode excited (classical) or the uncoupled
    /// reference run (quantum).
    Static,
    TwoModeResonance,
    AdiabaticSweep,
    /// Reduced single-mode models against the linearised block.
    ModelComparison,
    /// Pair-creation terms toggled on and off.
    PairTerms,
}

/// Everything a run needs. Keys carry their units; natural-unit keys for
/// the classical integrator (c = 1, times in metres) say so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub length_m: f64,
    pub slab_width_m: f64,
    pub refractive_index: f64,
    /// Membrane position where spectra and couplings are evaluated.
    pub position_m: f64,
    /// Start of the coupling path integral.
    pub reference_position_m: f64,
    /// Band centre; zero selects the lowest modes.
    pub band_center_rad_s: f64,
    pub mode_count: usize,
    /// Mode of interest; zero picks the mode nearest the band centre.
    pub mode_index: usize,
    /// Partner for two-mode quantities; zero means mode_index + 1.
    pub partner_index: usize,

    pub mass_kg: f64,
    pub omega_mech_rad_s: f64,

    pub window_lo_rad_s: f64,
    pub window_hi_rad_s: f64,
    /// Sampled j-modes in the window; zero evaluates every mode.
    pub window_samples: usize,
    /// Spacing used to count contributing modes; zero uses the measured one.
    pub spacing_rad_s: f64,

    pub mass_length_m: f64,
    pub mass_cutoff_rad_s: f64,
    pub threshold_mass_kg: f64,

    pub scenario: Scenario,

    pub classical_length_m: f64,
    pub classical_slab_width_m: f64,
    pub classical_susceptibility: f64,
    pub classical_position_m: f64,
    pub classical_cells: usize,
    pub classical_dt_natural_m: f64,
    pub classical_t_end_natural_m: f64,
    pub classical_mode: usize,
    pub classical_amplitude_m: f64,
    pub classical_sweep_to_m: f64,
    pub classical_sample_every: usize,

    pub quantum_mech_cutoff: usize,
    /// Zero chooses a scenario-specific span.
    pub quantum_t_end_s: f64,
    pub quantum_samples: usize,
    pub quantum_detuning_rad_s: f64,

    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            length_m: 0.06,
            slab_width_m: 50e-9,
            refractive_index: 2.2,
            position_m: 0.03,
            reference_position_m: 0.03,
            band_center_rad_s: 1.77e15,
            mode_count: 6,
            mode_index: 0,
            partner_index: 0,
            mass_kg: 1e-15,
            omega_mech_rad_s: 2.0 * std::f64::consts::PI * 1e6,
            window_lo_rad_s: 1e15,
            window_hi_rad_s: 1e16,
            window_samples: 4000,
            spacing_rad_s: 3e10,
            mass_length_m: 0.01,
            mass_cutoff_rad_s: 1e17,
            threshold_mass_kg: 1e-15,
            scenario: Scenario::Static,
            classical_length_m: 1.0,
            classical_slab_width_m: 5e-4,
            classical_susceptibility: 60.0,
            classical_position_m: 0.5,
            classical_cells: 1000,
            classical_dt_natural_m: 5e-4,
            classical_t_end_natural_m: 100.0,
            classical_mode: 9,
            classical_amplitude_m: 2e-3,
            classical_sweep_to_m: 0.47,
            classical_sample_every: 100,
            quantum_mech_cutoff: 4,
            quantum_t_end_s: 0.0,
            quantum_samples: 200,
            quantum_detuning_rad_s: 0.0,
            seed: 0,
        }
    }
}

fn chi(n: f64) -> f64 {
    n * n - 1.0
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(p) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if !(self.refractive_index >= 1.0 && self.classical_susceptibility >= 0.0) {
            return bad("refractive_index must be at least 1 and classical_susceptibility non-negative");
        }
        if self.mode_count == 0 {
            return bad("mode_count must be positive");
        }
        if !(self.mass_kg > 0.0 && self.omega_mech_rad_s > 0.0) {
            return bad("mass_kg and omega_mech_rad_s must be positive");
        }
        if !(self.band_center_rad_s >= 0.0 && self.spacing_rad_s >= 0.0 && self.quantum_t_end_s >= 0.0) {
            return bad("band_center_rad_s, spacing_rad_s and quantum_t_end_s must be non-negative");
        }
        if self.quantum_samples < 2 || self.classical_sample_every == 0 {
            return bad("quantum_samples must be at least 2 and classical_sample_every positive");
        }
        self.cavity()?;
        self.classical_cavity()?;
        Ok(())
    }

    pub fn cavity(&self) -> Result<CavityConfig, CliError> {
        let c = CavityConfig::new(self.length_m, self.slab_width_m, chi(self.refractive_index), self.reference_position_m)?;
        c.check_position(self.position_m)
            .map_err(|e| CliError::Config(format!("position_m: {e}")))?;
        Ok(c)
    }

    /// The l = 1 cm cavity used for the mass estimate, membrane centred.
    pub fn mass_cavity(&self) -> Result<CavityConfig, CliError> {
        Ok(CavityConfig::new(self.mass_length_m, self.slab_width_m, chi(self.refractive_index), 0.5 * self.mass_length_m)?)
    }

    pub fn classical_cavity(&self) -> Result<CavityConfig, CliError> {
        Ok(CavityConfig::new(
            self.classical_length_m,
            self.classical_slab_width_m,
            self.classical_susceptibility,
            self.classical_position_m,
        )?)
    }
}
