use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{FockBasis, DEFAULT_MAX_DIM};
use crate::error::{Error, Result};
use crate::numerics::sparse::CsrMatrix;
use crate::units;

/// Rotating-wave policy. Every monomial carries a bare detuning
/// ν = Σ ω(created) − Σ ω(annihilated); with `Window(w)` monomials with
/// |ν| > w are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rwa {
    Off,
    Window(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianOptions {
    pub rwa: Rwa,
    /// Keep a†a† and aa terms (pair creation and annihilation).
    pub pair_terms: bool,
    /// Subtract frame·N̂_photon; only allowed when photon number is
    /// conserved.
    pub frame: Option<f64>,
    pub max_dim: usize,
}

impl Default for HamiltonianOptions {
    fn default() -> Self {
        HamiltonianOptions {
            rwa: Rwa::Off,
            pair_terms: true,
            frame: None,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Hamiltonians in rad/s (ħ = 1). Masses in kg, forces F/ħ in rad/s per m,
/// x̂ = √(ħ/2mΩ)(b + b†).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FockModel {
    /// Ω(b†b+½) + Σω_k a_k†a_k + x̂ Σ_kj F_kj(a_k†a_j† + a_k a_j + a_k†a_j + a_j†a_k)
    /// + x̂² Σ_k c_k a_k†a_k
    LinearizedMultimode {
        omega_mech: f64,
        mass: f64,
        omega: Vec<f64>,
        force: DMatrix<f64>,
        quadratic: Option<Vec<f64>>,
    },
    /// Ω(b†b+½) + ω a†a + x̂ ω′ a†a + x̂² B a†a
    QuadraticSingleMode {
        omega_mech: f64,
        mass: f64,
        omega_k: f64,
        slope: f64,
        bracket: f64,
    },
    /// Ω(b†b+½) + ω1 a1†a1 + ω2 a2†a2 + η(b+b†)(a1†a2 + a2†a1)
    TwoModeResonant {
        omega_mech: f64,
        omega1: f64,
        omega2: f64,
        eta: f64,
    },
    /// Ω(b†b+½) + Σω_k a_k†a_k + Σ_kj [ξ⁺_kj(a_k†a_j + a_j†a_k) + ξ⁻_kj(a_k†a_j† + a_k a_j)]
    /// with the coupling strengths frozen at one membrane position.
    TransformedStatic {
        omega_mech: f64,
        omega: Vec<f64>,
        xi_plus: DMatrix<f64>,
        xi_minus: DMatrix<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    LinearizedMultimode,
    QuadraticSingleMode,
    TwoModeResonant,
    TransformedStatic,
}

impl FockModel {
    pub fn tag(&self) -> ModelTag {
        match self {
            FockModel::LinearizedMultimode { .. } => ModelTag::LinearizedMultimode,
            FockModel::QuadraticSingleMode { .. } => ModelTag::QuadraticSingleMode,
            FockModel::TwoModeResonant { .. } => ModelTag::TwoModeResonant,
            FockModel::TransformedStatic { .. } => ModelTag::TransformedStatic,
        }
    }

    pub fn optical_modes(&self) -> usize {
        match self {
            FockModel::LinearizedMultimode { omega, .. } | FockModel::TransformedStatic { omega, .. } => omega.len(),
            FockModel::QuadraticSingleMode { .. } => 1,
            FockModel::TwoModeResonant { .. } => 2,
        }
    }

    /// Frequencies of the sites: Ω, then the optical modes.
    pub fn site_frequencies(&self) -> Vec<f64> {
        match self {
            FockModel::LinearizedMultimode { omega_mech, omega, .. } | FockModel::TransformedStatic { omega_mech, omega, .. } => std::iter::once(*omega_mech).chain(omega.iter().copied()).collect(),
            FockModel::QuadraticSingleMode { omega_mech, omega_k, .. } => vec![*omega_mech, *omega_k],
            FockModel::TwoModeResonant { omega_mech, omega1, omega2, .. } => vec![*omega_mech, *omega1, *omega2],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            FockModel::LinearizedMultimode { omega_mech, mass, omega, force, quadratic } => {
                if !(*omega_mech > 0.0 && *mass > 0.0) {
                    return bad("mechanical frequency and mass must be positive");
                }
                if omega.is_empty() || force.nrows() != omega.len() || force.ncols() != omega.len() {
                    return bad("force matrix must be K×K with K the number of frequencies");
                }
                if quadratic.as_ref().is_some_and(|q| q.len() != omega.len()) {
                    return bad("quadratic coefficients must have one entry per mode");
                }
                if !finite(omega) || !finite(force.as_slice()) || !quadratic.as_ref().is_none_or(|q| finite(q)) {
                    return bad("non-finite coefficient");
                }
            }
            FockModel::QuadraticSingleMode { omega_mech, mass, omega_k, slope, bracket } => {
                if !(*omega_mech > 0.0 && *mass > 0.0) {
                    return bad("mechanical frequency and mass must be positive");
                }
                if !finite(&[*omega_k, *slope, *bracket]) {
                    return bad("non-finite coefficient");
                }
            }
            FockModel::TwoModeResonant { omega_mech, omega1, omega2, eta } => {
                if !(*omega_mech > 0.0) {
                    return bad("mechanical frequency must be positive");
                }
                if !finite(&[*omega1, *omega2, *eta]) {
                    return bad("non-finite coefficient");
                }
            }
            FockModel::TransformedStatic { omega_mech, omega, xi_plus, xi_minus } => {
                if !(*omega_mech > 0.0) {
                    return bad("mechanical frequency must be positive");
                }
                let n = omega.len();
                if n == 0 || [xi_plus, xi_minus].iter().any(|m| m.nrows() != n || m.ncols() != n) {
                    return bad("ξ matrices must be K×K with K the number of frequencies");
                }
                if !finite(omega) || !finite(xi_plus.as_slice()) || !finite(xi_minus.as_slice()) {
                    return bad("non-finite coefficient");
                }
            }
        }
        Ok(())
    }
}

/// Product of ladder operators, written left to right as (site, creates).
#[derive(Debug, Clone)]
pub(crate) struct Monomial {
    pub coeff: f64,
    pub ops: Vec<(usize, bool)>,
    pub pair: bool,
}

impl Monomial {
    fn new(coeff: f64, ops: &[(usize, bool)]) -> Self {
        let photons: i32 = ops.iter().filter(|(s, _)| *s > 0).map(|(_, c)| if *c { 1 } else { -1 }).sum();
        Monomial {
            coeff,
            ops: ops.to_vec(),
            pair: photons.abs() == 2,
        }
    }

    fn detuning(&self, freq: &[f64]) -> f64 {
        self.ops.iter().map(|&(s, c)| if c { freq[s] } else { -freq[s] }).sum()
    }
}

const B: (usize, bool) = (0, false);
const BD: (usize, bool) = (0, true);

fn a(k: usize) -> (usize, bool) {
    (k + 1, false)
}

fn ad(k: usize) -> (usize, bool) {
    (k + 1, true)
}

fn monomials(model: &FockModel) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut push = |c: f64, ops: &[(usize, bool)]| {
        if c != 0.0 {
            out.push(Monomial::new(c, ops));
        }
    };
    let om = match model {
        FockModel::LinearizedMultimode { omega_mech, .. }
        | FockModel::QuadraticSingleMode { omega_mech, .. }
        | FockModel::TwoModeResonant { omega_mech, .. }
        | FockModel::TransformedStatic { omega_mech, .. } => *omega_mech,
    };
    push(om, &[BD, B]);
    push(0.5 * om, &[]);
    // x̂ and x̂² in units of the zero-point amplitude
    let x = [[B].to_vec(), [BD].to_vec()];
    let x2 = [([B, B].to_vec(), 1.0), ([BD, BD].to_vec(), 1.0), ([BD, B].to_vec(), 2.0), (Vec::new(), 1.0)];
    let cat = |l: &[(usize, bool)], r: &[(usize, bool)]| -> Vec<(usize, bool)> { l.iter().chain(r).copied().collect() };
    match model {
        FockModel::LinearizedMultimode { omega_mech, mass, omega, force, quadratic } => {
            let zp = units::zero_point_amplitude(*mass, *omega_mech);
            let n = omega.len();
            for k in 0..n {
                push(omega[k], &[ad(k), a(k)]);
            }
            for k in 0..n {
                for j in 0..n {
                    let hop = zp * (force[(k, j)] + force[(j, k)]);
                    for xo in &x {
                        push(hop, &cat(xo, &[ad(k), a(j)]));
                    }
                    if j >= k {
                        let p = if j == k { zp * force[(k, k)] } else { hop };
                        for xo in &x {
                            push(p, &cat(xo, &[ad(k), ad(j)]));
                            push(p, &cat(xo, &[a(k), a(j)]));
                        }
                    }
                }
            }
            if let Some(q) = quadratic {
                for k in 0..n {
                    for (xo, m) in &x2 {
                        push(q[k] * zp * zp * m, &cat(xo, &[ad(k), a(k)]));
                    }
                }
            }
        }
        FockModel::QuadraticSingleMode { omega_mech, mass, omega_k, slope, bracket } => {
            let zp = units::zero_point_amplitude(*mass, *omega_mech);
            push(*omega_k, &[ad(0), a(0)]);
            for xo in &x {
                push(slope * zp, &cat(xo, &[ad(0), a(0)]));
            }
            for (xo, m) in &x2 {
                push(bracket * zp * zp * m, &cat(xo, &[ad(0), a(0)]));
            }
        }
        FockModel::TwoModeResonant { omega1, omega2, eta, .. } => {
            push(*omega1, &[ad(0), a(0)]);
            push(*omega2, &[ad(1), a(1)]);
            for xo in &x {
                push(*eta, &cat(xo, &[ad(0), a(1)]));
                push(*eta, &cat(xo, &[ad(1), a(0)]));
            }
        }
        FockModel::TransformedStatic { omega, xi_plus, xi_minus, .. } => {
            let n = omega.len();
            for k in 0..n {
                push(omega[k], &[ad(k), a(k)]);
            }
            for k in 0..n {
                for j in 0..n {
                    push(xi_plus[(k, j)], &[ad(k), a(j)]);
                    push(xi_plus[(k, j)], &[ad(j), a(k)]);
                    push(xi_minus[(k, j)], &[ad(k), ad(j)]);
                    push(xi_minus[(k, j)], &[a(k), a(j)]);
                }
            }
        }
    }
    out
}

/// Apply a monomial to basis state `col`: (row, amplitude), or None if the
/// result leaves the truncated space.
fn apply(basis: &FockBasis, m: &Monomial, col: usize, occ: &mut Vec<usize>) -> Option<(usize, f64)> {
    occ.clear();
    occ.extend(basis.occupations(col));
    let mut amp = 1.0;
    for &(s, create) in m.ops.iter().rev() {
        if create {
            occ[s] += 1;
            if occ[s] > basis.cutoff(s) {
                return None;
            }
            amp *= (occ[s] as f64).sqrt();
        } else {
            if occ[s] == 0 {
                return None;
            }
            amp *= (occ[s] as f64).sqrt();
            occ[s] -= 1;
        }
    }
    Some((basis.index(occ)?, amp))
}

#[derive(Debug, Clone, Serialize)]
pub struct FockHamiltonian {
    pub basis: FockBasis,
    #[serde(skip)]
    pub matrix: CsrMatrix,
    pub model: ModelTag,
    pub options: HamiltonianOptions,
    pub site_frequencies: Vec<f64>,
    pub terms_kept: usize,
    pub terms_dropped: usize,
}

impl FockHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// max |H_ij − H_ji|.
    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.symmetry_defect()
    }
}

pub fn build_hamiltonian(model: &FockModel, basis: &FockBasis, opts: &HamiltonianOptions) -> Result<FockHamiltonian> {
    model.validate()?;
    if basis.modes() != model.optical_modes() {
        return Err(Error::Config(format!(
            "basis has {} optical modes, model needs {}",
            basis.modes(),
            model.optical_modes()
        )));
    }
    if basis.dim() > opts.max_dim {
        return Err(Error::Dimension {
            dim: basis.dim(),
            limit: opts.max_dim,
        });
    }
    if let Rwa::Window(w) = opts.rwa {
        if !(w >= 0.0) {
            return Err(Error::Config("RWA window must be non-negative".into()));
        }
    }
    let freq = model.site_frequencies();
    let all = monomials(model);
    let total = all.len();
    let kept: Vec<Monomial> = all
        .into_iter()
        .filter(|m| opts.pair_terms || !m.pair)
        .filter(|m| match opts.rwa {
            Rwa::Off => true,
            Rwa::Window(w) => m.ops.is_empty() || m.detuning(&freq).abs() <= w,
        })
        .collect();
    if let Some(f) = opts.frame {
        if kept.iter().any(|m| m.pair) {
            return Err(Error::Precondition("a rotating frame needs photon-number conservation; drop the pair terms".into()));
        }
        if !f.is_finite() {
            return Err(Error::Config("frame frequency must be finite".into()));
        }
    }
    let dim = basis.dim();
    const CHUNK: usize = 4096;
    let trip: Vec<Vec<(usize, usize, f64)>> = (0..dim.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut occ = Vec::new();
            let mut t = Vec::new();
            for col in c * CHUNK..((c + 1) * CHUNK).min(dim) {
                for m in &kept {
                    if let Some((row, amp)) = apply(basis, m, col, &mut occ) {
                        t.push((row, col, m.coeff * amp));
                    }
                }
                if let Some(f) = opts.frame {
                    let n: usize = (1..basis.sites()).map(|s| basis.occupation(col, s)).sum();
                    if n > 0 {
                        t.push((col, col, -f * n as f64));
                    }
                }
            }
            t
        })
        .collect();
    let matrix = CsrMatrix::from_triplets(dim, trip.into_iter().flatten().collect());
    Ok(FockHamiltonian {
        basis: basis.clone(),
        matrix,
        model: model.tag(),
        options: *opts,
        site_frequencies: freq,
        terms_kept: kept.len(),
        terms_dropped: total - kept.len(),
    })
}
