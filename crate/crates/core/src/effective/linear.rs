use nalgebra::DMatrix;
use serde::Serialize;

use crate::couplings::{g_matrix, mode_block, zeta_interface, GMethod};
use crate::error::{Error, Result};
use crate::spectral::{frequency_derivative, CavityConfig};
use crate::units;

/// Coefficients of the linearised multimode Hamiltonian about q0.
#[derive(Debug, Clone, Serialize)]
pub struct LinearizedCoeffs {
    pub q0: f64,
    pub indices: Vec<usize>,
    /// ω_k0 in rad/s
    pub omega: Vec<f64>,
    /// ∂ω_k/∂q in rad/s per m
    pub slope: Vec<f64>,
    /// g⁽⁰⁾ in 1/m
    pub g: DMatrix<f64>,
    /// F_kj/ħ = ½[ω′_k δ_kj + ω_k √(ω_k/ω_j) g_kj] in rad/s per m
    pub force: DMatrix<f64>,
    /// ω″_k in rad/s per m², when requested
    pub curvature: Option<Vec<f64>>,
    /// Coefficient of x² in 2ξ⁺_kk within this block,
    /// Σ_l g_lk² (ω_l² − ω_k²)/(2ω_k), in rad/s per m²
    pub second_order_diagonal: Vec<f64>,
}

impl LinearizedCoeffs {
    /// F + Fᵀ, the combination that enters the Hamiltonian.
    pub fn symmetrized_force(&self) -> DMatrix<f64> {
        &self.force + self.force.transpose()
    }
}

pub fn linearized_hamiltonian_coeffs(
    config: &CavityConfig,
    q0: f64,
    first: usize,
    count: usize,
    with_curvature: bool,
) -> Result<LinearizedCoeffs> {
    let block = mode_block(config, q0, first, count)?;
    let g = g_matrix(config, &block, GMethod::Interface)?;
    // dω/dq = ω ζ_kk
    let slope_nat: Vec<f64> = block
        .iter()
        .map(|m| m.frequency() * zeta_interface(config, m, m))
        .collect();
    let w: Vec<f64> = block.iter().map(|m| m.frequency()).collect();
    let n = block.len();
    let force = DMatrix::from_fn(n, n, |k, j| {
        let diag = if k == j { slope_nat[k] } else { 0.0 };
        0.5 * units::slope_to_si(diag + w[k] * (w[k] / w[j]).sqrt() * g[(k, j)])
    });
    let second: Vec<f64> = (0..n)
        .map(|k| {
            let terms: Vec<f64> = (0..n)
                .map(|l| g[(l, k)].powi(2) * (w[l] - w[k]) * (w[l] + w[k]) / (2.0 * w[k]))
                .collect();
            units::omega_to_si(crate::numerics::pairwise_sum(&terms))
        })
        .collect();
    let curvature = if with_curvature {
        Some(
            block
                .iter()
                .map(|m| frequency_derivative(config, q0, m.index, 2).map(|d| d.value * units::C))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(LinearizedCoeffs {
        q0,
        indices: block.iter().map(|m| m.index).collect(),
        omega: w.iter().map(|&x| units::omega_to_si(x)).collect(),
        slope: slope_nat.iter().map(|&x| units::slope_to_si(x)).collect(),
        g,
        force,
        curvature,
        second_order_diagonal: second,
    })
}

/// Two cavity modes resonantly coupled through the membrane motion.
#[derive(Debug, Clone, Serialize)]
pub struct TwoModeModel {
    pub k1: usize,
    pub k2: usize,
    /// rad/s
    pub omega1: f64,
    pub omega2: f64,
    pub omega_mech: f64,
    /// kg
    pub mass: f64,
    /// g⁽⁰⁾_12 in 1/m
    pub g12: f64,
    /// rad/s
    pub eta: f64,
    /// Ω − (ω2 − ω1), rad/s
    pub detuning: f64,
    /// √(ħ/2mΩ) in m
    pub zero_point: f64,
}

/// Relative tolerance on ∂ω/∂q (against ω/l) for the symmetry precondition.
pub const SLOPE_TOLERANCE: f64 = 1e-7;

/// η = g⁽⁰⁾_12 √(ħ/8mΩ) (ω1² − ω2²)/√(ω1ω2).
pub fn two_mode_eta(config: &CavityConfig, q0: f64, k1: usize, k2: usize, mass: f64, omega_mech: f64) -> Result<TwoModeModel> {
    if !(mass > 0.0 && omega_mech > 0.0) {
        return Err(Error::Domain("mass and mechanical frequency must be positive".into()));
    }
    if k1 == k2 || k1 == 0 || k2 == 0 {
        return Err(Error::Domain("need two distinct modes".into()));
    }
    let lo = k1.min(k2);
    let block = mode_block(config, q0, lo, k1.max(k2) - lo + 1)?;
    let m1 = &block[k1 - lo];
    let m2 = &block[k2 - lo];
    let mut residual = Vec::new();
    for m in [m1, m2] {
        let d = frequency_derivative(config, q0, m.index, 1)?;
        let scale = m.frequency() / config.length;
        if d.value.abs() > SLOPE_TOLERANCE * scale {
            residual.push(format!("dω_{}/dq = {:e} rad/s/m", m.index, units::slope_to_si(d.value)));
        }
    }
    if !residual.is_empty() {
        return Err(Error::Precondition(format!(
            "q0 is not a symmetry point for both modes: {}",
            residual.join(", ")
        )));
    }
    let g12 = crate::couplings::g_interface(config, m1, m2);
    let (w1, w2) = (units::omega_to_si(m1.frequency()), units::omega_to_si(m2.frequency()));
    let w_diff = units::omega_to_si(m1.omega.diff(m2.omega));
    let zp = units::zero_point_amplitude(mass, omega_mech);
    // √(ħ/8mΩ) = √(ħ/2mΩ)/2
    let eta = g12 * 0.5 * zp * w_diff * (w1 + w2) / (w1 * w2).sqrt();
    Ok(TwoModeModel {
        k1,
        k2,
        omega1: w1,
        omega2: w2,
        omega_mech,
        mass,
        g12,
        eta,
        detuning: omega_mech + w_diff,
        zero_point: zp,
    })
}
