use nalgebra::DMatrix;
use serde::Serialize;

use crate::couplings::{coupling_set, mode_block, CouplingOptions};
use crate::error::{Error, Result};
use crate::spectral::CavityConfig;
use crate::units;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftTerm {
    pub j: usize,
    /// (ξ⁺_kj + ξ⁺_jk)², (rad/s)²
    pub numerator: f64,
    /// (ω_k + 2ξ⁺_kk) − (ω_j + 2ξ⁺_jj), rad/s
    pub denominator: f64,
    pub term: f64,
}

/// Δ_k and its breakdown, all in rad/s.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    pub k: usize,
    pub q: f64,
    pub omega_k: f64,
    pub two_xi_kk: f64,
    pub delta: f64,
    pub terms: Vec<ShiftTerm>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ShiftOptions {
    /// Smallest admissible |denominator| in rad/s.
    pub degeneracy_floor: f64,
}

impl ShiftOptions {
    /// Floor of 10³ Ω for a membrane of mechanical frequency Ω (rad/s).
    pub fn for_mechanical_frequency(omega_mech: f64) -> Self {
        ShiftOptions {
            degeneracy_floor: 1e3 * omega_mech,
        }
    }
}

/// Δ_k = 2ξ⁺_kk + Σ_{j≠k} (ξ⁺_kj + ξ⁺_jk)² / [(ω_k + 2ξ⁺_kk) − (ω_j + 2ξ⁺_jj)]
/// for the mode at position `pos` of `omega`; `indices` labels the modes.
pub fn shift_from_xi(
    omega: &[f64],
    xi_plus: &DMatrix<f64>,
    indices: &[usize],
    pos: usize,
    floor: f64,
) -> Result<ShiftReport> {
    let n = omega.len();
    if n < 2 {
        return Err(Error::Domain("the shift needs at least two modes".into()));
    }
    if xi_plus.nrows() != n || xi_plus.ncols() != n || indices.len() != n || pos >= n {
        return Err(Error::Precondition("ξ⁺, frequencies and labels disagree in size".into()));
    }
    let dressed: Vec<f64> = (0..n).map(|i| omega[i] + 2.0 * xi_plus[(i, i)]).collect();
    let mut terms = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|&j| j != pos) {
        let den = dressed[pos] - dressed[j];
        if den.abs() < floor || den == 0.0 {
            return Err(Error::NearDegenerate {
                k: indices[pos],
                j: indices[j],
                gap: den.abs(),
                floor,
            });
        }
        let s = xi_plus[(pos, j)] + xi_plus[(j, pos)];
        terms.push(ShiftTerm {
            j: indices[j],
            numerator: s * s,
            denominator: den,
            term: s * s / den,
        });
    }
    let sum: Vec<f64> = terms.iter().map(|t| t.term).collect();
    let two_xi = 2.0 * xi_plus[(pos, pos)];
    Ok(ShiftReport {
        k: indices[pos],
        q: f64::NAN,
        omega_k: omega[pos],
        two_xi_kk: two_xi,
        delta: two_xi + crate::numerics::pairwise_sum(&sum),
        terms,
    })
}

/// Window of `count` consecutive modes roughly centred on k.
pub(crate) fn window(k: usize, count: usize) -> usize {
    k.saturating_sub(count / 2).max(1)
}

/// Δ_k at position q for a window of `count` modes around k, with the
/// rotation integrated from the configuration's reference position.
pub fn single_mode_shift(config: &CavityConfig, q: f64, k: usize, count: usize, opts: ShiftOptions) -> Result<ShiftReport> {
    if count < 2 {
        return Err(Error::Domain("the shift needs at least two modes".into()));
    }
    if k == 0 {
        return Err(Error::Domain("mode indices start at 1".into()));
    }
    let first = window(k, count);
    let set = coupling_set(config, config.reference_position, q, first, count, CouplingOptions::default())?;
    let mut r = shift_from_xi(&set.omega, &set.xi_plus, &set.indices, k - first, opts.degeneracy_floor)?;
    r.q = q;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdiabaticVerdict {
    /// Every neighbour is at least 10³ Ω away.
    AdiabaticEliminationValid,
    /// Ω lies within 10 % of a neighbour spacing.
    ResonantUseTwoModeModel,
    /// Neither regime applies cleanly.
    Marginal,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticReport {
    pub k: usize,
    /// rad/s
    pub omega_mech: f64,
    pub nearest: usize,
    /// min_j |ω_k − ω_j| in rad/s
    pub min_gap: f64,
    pub ratio: f64,
    pub verdict: AdiabaticVerdict,
}

/// Compares Ω with the spacings from mode k to its neighbours.
pub fn heisenberg_adiabatic_check(
    config: &CavityConfig,
    q0: f64,
    k: usize,
    count: usize,
    omega_mech: f64,
) -> Result<AdiabaticReport> {
    if !(omega_mech > 0.0) {
        return Err(Error::Domain("mechanical frequency must be positive".into()));
    }
    if count < 2 || k == 0 {
        return Err(Error::Domain("need k ≥ 1 and at least two modes".into()));
    }
    let first = window(k, count);
    let block = mode_block(config, q0, first, count)?;
    let mk = &block[k - first];
    let mut nearest = 0;
    let mut min_gap = f64::INFINITY;
    let mut resonant = false;
    for m in block.iter().filter(|m| m.index != k) {
        let gap = units::omega_to_si(mk.omega.diff(m.omega).abs());
        if gap < min_gap {
            min_gap = gap;
            nearest = m.index;
        }
        if (omega_mech - gap).abs() <= 0.1 * gap {
            resonant = true;
        }
    }
    let ratio = min_gap / omega_mech;
    let verdict = if resonant {
        AdiabaticVerdict::ResonantUseTwoModeModel
    } else if ratio >= 1e3 {
        AdiabaticVerdict::AdiabaticEliminationValid
    } else {
        AdiabaticVerdict::Marginal
    };
    Ok(AdiabaticReport {
        k,
        omega_mech,
        nearest,
        min_gap,
        ratio,
        verdict,
    })
}
