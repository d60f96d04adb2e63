use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_panels, GaussLegendre, Segment};
use crate::spectral::{mode_q_derivative, modes, slab_slope_overlap, Band, CavityConfig, CavityMode, ModeDerivative};

/// How g and ζ are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GMethod {
    /// Closed form in terms of mode values at the slab faces.
    #[default]
    Interface,
    /// Gauss–Legendre quadrature of the defining integrals with
    /// finite-difference ∂φ/∂q.
    Quadrature,
}

/// Consecutive modes `first..first + count` at one membrane position.
pub fn mode_block(config: &CavityConfig, q: f64, first: usize, count: usize) -> Result<Vec<CavityMode>> {
    if first == 0 || count == 0 {
        return Err(Error::Domain("mode block needs first ≥ 1 and count ≥ 1".into()));
    }
    modes(config, q, Band::Indices { first, last: first + count - 1 })
}

/// [φ_k φ_j] evaluated between the slab faces, b minus a.
fn face_jump(mk: &CavityMode, mj: &CavityMode) -> f64 {
    let s_k = &mk.pieces[1];
    let s_j = &mj.pieces[1];
    let (a, b) = (s_k.x0, s_k.x1);
    s_k.value(b) * s_j.value(b) - s_k.value(a) * s_j.value(a)
}

/// ζ_kj = ∫ ε (∂φ_j/∂q) φ_k dx from the slab-face values.
pub fn zeta_interface(config: &CavityConfig, mk: &CavityMode, mj: &CavityMode) -> f64 {
    let chi = config.effective_susceptibility();
    let jump = face_jump(mk, mj);
    if mk.index == mj.index {
        return -0.5 * chi * jump;
    }
    let (wk, wj) = (mk.frequency(), mj.frequency());
    let wj2 = wj * wj;
    // ω_k² − ω_j² without cancellation
    let den = mk.omega.diff(mj.omega) * (wk + wj);
    wj2 * chi * jump / den
}

/// g_kj = −ζ_kj − χ ∫_slab (∂ₓφ_j) φ_k dx.
pub fn g_interface(config: &CavityConfig, mk: &CavityMode, mj: &CavityMode) -> f64 {
    if mk.index == mj.index {
        return 0.0;
    }
    let chi = config.effective_susceptibility();
    -zeta_interface(config, mk, mj) - chi * slab_slope_overlap(mj, mk)
}

/// Interface-form g and ζ over a mode block (both K×K, 1/m).
pub fn interface_matrices(config: &CavityConfig, block: &[CavityMode]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = block.len();
    let mut g = DMatrix::zeros(n, n);
    let mut z = DMatrix::zeros(n, n);
    for (k, mk) in block.iter().enumerate() {
        for (j, mj) in block.iter().enumerate() {
            z[(k, j)] = zeta_interface(config, mk, mj);
            if k != j {
                g[(k, j)] = g_interface(config, mk, mj);
            }
        }
    }
    (g, z)
}

/// g and ζ from quadrature, before any symmetrisation.
#[derive(Debug, Clone)]
pub struct RawCouplings {
    pub g: DMatrix<f64>,
    pub zeta: DMatrix<f64>,
    /// Panel-doubling difference, max-norm.
    pub quadrature_error: f64,
    /// Largest finite-difference error among the ∂φ/∂q coefficients.
    pub derivative_error: f64,
    pub nodes: usize,
}

impl RawCouplings {
    /// max|g + gᵀ| / max|g|.
    pub fn antisymmetry_defect(&self) -> f64 {
        antisymmetry_defect(&self.g)
    }
}

pub fn antisymmetry_defect(m: &DMatrix<f64>) -> f64 {
    let norm = m.amax();
    if norm == 0.0 {
        return 0.0;
    }
    (m + m.transpose()).amax() / norm
}

/// (m − mᵀ)/2.
pub fn antisymmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Quadrature of
///   g_kj = −∫ [ε ∂_qφ_j + (ε − 1) ∂ₓφ_j] φ_k dx,   ζ_kj = ∫ ε ∂_qφ_j φ_k dx
/// split at the slab faces.
pub fn quadrature_matrices(config: &CavityConfig, block: &[CavityMode], rtol: f64) -> Result<RawCouplings> {
    let n = block.len();
    if n == 0 {
        return Err(Error::Domain("empty mode block".into()));
    }
    let derivs: Vec<ModeDerivative> = block
        .iter()
        .map(|m| mode_q_derivative(config, m))
        .collect::<Result<_>>()?;
    let derivative_error = derivs.iter().map(|d| d.max_error).fold(0.0, f64::max);

    let m0 = &block[0];
    let chi = config.effective_susceptibility();
    let w_max = block.iter().map(|m| m.frequency()).fold(0.0, f64::max);
    let rule = GaussLegendre::new(16);
    let segments: Vec<Segment> = (0..3)
        .map(|r| {
            let pc = &m0.pieces[r];
            let kmax = w_max * if r == 1 { config.refractive_index() } else { 1.0 };
            let width = pc.x1 - pc.x0;
            let panels = ((2.0 * kmax * width / 8.0).ceil() as usize).max(2);
            Segment { a: pc.x0, b: pc.x1, panels }
        })
        .collect();

    let nn = n * n;
    let res = integrate_panels(&segments, 2 * nn, &rule, rtol, 0.0, 4, |r, x, w, acc, scratch| {
        let eps = if r == 1 { 1.0 + chi } else { 1.0 };
        scratch.clear();
        scratch.resize(3 * n, 0.0);
        let (phi, rest) = scratch.split_at_mut(n);
        let (dq, dx) = rest.split_at_mut(n);
        for (i, d) in derivs.iter().enumerate() {
            let pc = &d.mode.pieces[r];
            let u = x - pc.anchor;
            let (sn, cs) = pc.k.phase(u).sin_cos();
            let k = pc.k.value();
            let rot = pc.s * cs - pc.p * sn;
            phi[i] = pc.p * cs + pc.s * sn;
            dx[i] = k * rot;
            dq[i] = d.d_p[r] * cs + d.d_s[r] * sn + d.d_k[r] * u * rot;
        }
        for k in 0..n {
            let wk = w * phi[k];
            let row = &mut acc[k * n..(k + 1) * n];
            for j in 0..n {
                row[j] -= wk * (eps * dq[j] + (eps - 1.0) * dx[j]);
            }
            let row = &mut acc[nn + k * n..nn + (k + 1) * n];
            for j in 0..n {
                row[j] += wk * eps * dq[j];
            }
        }
    })?;
    let g = DMatrix::from_row_slice(n, n, &res.values[..nn]);
    let zeta = DMatrix::from_row_slice(n, n, &res.values[nn..]);
    Ok(RawCouplings {
        g,
        zeta,
        quadrature_error: res.abs_error,
        derivative_error,
        nodes: res.nodes_used,
    })
}

/// Modes k and j (the same mode twice when k = j).
fn pair(config: &CavityConfig, q: f64, k: usize, j: usize) -> Result<Vec<CavityMode>> {
    if k == 0 || j == 0 {
        return Err(Error::Domain("mode indices start at 1".into()));
    }
    let lo = k.min(j);
    let hi = k.max(j);
    let all = mode_block(config, q, lo, hi - lo + 1)?;
    let mk = all[k - lo].clone();
    let mj = all[j - lo].clone();
    Ok(vec![mk, mj])
}

/// g_kj at position q by quadrature (1/m).
pub fn coupling_g(config: &CavityConfig, q: f64, k: usize, j: usize) -> Result<f64> {
    let p = pair(config, q, k, j)?;
    let raw = quadrature_matrices(config, &p, 1e-9)?;
    Ok(raw.g[(0, 1)])
}

/// ζ_kj at position q by quadrature (1/m).
pub fn coupling_zeta(config: &CavityConfig, q: f64, k: usize, j: usize) -> Result<f64> {
    let p = pair(config, q, k, j)?;
    let raw = quadrature_matrices(config, &p, 1e-9)?;
    Ok(raw.zeta[(0, 1)])
}

/// g over a block by the chosen method, antisymmetrised.
pub fn g_matrix(config: &CavityConfig, block: &[CavityMode], method: GMethod) -> Result<DMatrix<f64>> {
    let g = match method {
        GMethod::Interface => interface_matrices(config, block).0,
        GMethod::Quadrature => quadrature_matrices(config, block, 1e-9)?.g,
    };
    Ok(antisymmetrize(&g))
}
