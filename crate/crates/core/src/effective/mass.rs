use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::spectral::{mode_function, roots_in, Band, CavityConfig, CavityMode};
use crate::units;

/// Photon content assumed when evaluating the field-gradient integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupancy {
    /// Zero-point fluctuations of every mode below the cutoff.
    Vacuum,
    /// N photons in mode k, on top of the vacuum.
    SingleMode { k: usize, photons: f64 },
}

/// Above this cutoff (rad/s) a frequency-independent susceptibility is
/// hard to defend.
pub const NON_DISPERSIVE_LIMIT: f64 = 1e16;

#[derive(Debug, Clone, Serialize)]
pub struct MassCorrection {
    /// I = ∫ (ε−1)²/ε ⟨(∂ₓA)²⟩ dx / c², kg
    pub mass_equivalent: f64,
    /// m′ − m ≈ −2I to first order in I/m, kg
    pub delta_m: f64,
    pub modes_counted: usize,
    /// rad/s
    pub cutoff: f64,
    pub warnings: Vec<String>,
}

/// s_k = χ²/(1+χ) ∫_slab φ_k′² dx / ω_k², so that one quantum of mode k
/// contributes ħω_k s_k / c² to I.
pub fn gradient_weight(config: &CavityConfig, m: &CavityMode) -> f64 {
    let chi = config.effective_susceptibility();
    let d = m.pieces[1].derivative();
    let w = m.frequency();
    chi * chi / (1.0 + chi) * d.product_integral(&d) / (w * w)
}

/// Mass-equivalent of one quantum of mode k, ħω_k s_k / c² in kg.
fn quantum_mass(config: &CavityConfig, m: &CavityMode) -> f64 {
    units::HBAR * units::omega_to_si(m.frequency()) * gradient_weight(config, m) / (units::C * units::C)
}

/// Renormalised-mass correction with a sharp cutoff at `cutoff` (rad/s).
pub fn renormalized_mass_correction(config: &CavityConfig, q0: f64, cutoff: f64, occupancy: Occupancy) -> Result<MassCorrection> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::Domain("cutoff must be finite and positive".into()));
    }
    let geom = config.geometry(q0)?;
    let total = geom.count_below(units::omega_from_si(cutoff));
    let mut warnings = Vec::new();
    if cutoff > NON_DISPERSIVE_LIMIT {
        warnings.push(format!(
            "cutoff {cutoff:e} rad/s exceeds {NON_DISPERSIVE_LIMIT:e} rad/s; a non-dispersive slab is an idealisation there"
        ));
    }
    const CHUNK: usize = 4096;
    let starts: Vec<usize> = (1..=total).step_by(CHUNK).collect();
    let parts: Vec<Result<f64>> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + CHUNK - 1).min(total);
            let roots = roots_in(&geom, Band::Indices { first: s, last: e })?;
            let v: Vec<f64> = roots
                .iter()
                .map(|r| 0.5 * quantum_mass(config, &CavityMode::build(&geom, q0, r)))
                .collect();
            Ok(pairwise_sum(&v))
        })
        .collect();
    let sums = parts.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut i = pairwise_sum(&sums);
    if let Occupancy::SingleMode { k, photons } = occupancy {
        if !(photons >= 0.0) {
            return Err(Error::Domain("photon number must be non-negative".into()));
        }
        let m = mode_function(config, q0, k)?;
        if k > total {
            warnings.push(format!("mode {k} lies above the cutoff; its photons are counted anyway"));
        }
        i += photons * quantum_mass(config, &m);
    }
    Ok(MassCorrection {
        mass_equivalent: i,
        delta_m: -2.0 * i,
        modes_counted: total,
        cutoff,
        warnings,
    })
}

/// Photon number in mode k at which the field term I equals `mass`.
pub fn photon_threshold(config: &CavityConfig, q0: f64, k: usize, mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::Domain("mass must be positive".into()));
    }
    let m = mode_function(config, q0, k)?;
    let per = quantum_mass(config, &m);
    if per == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(mass / per)
}
