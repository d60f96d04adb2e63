use nalgebra::DMatrix;
use serde::Serialize;

use super::tensors::{antisymmetrize, g_matrix, interface_matrices, mode_block, GMethod};
use crate::error::{Error, Result};
use crate::numerics::quadrature::adaptive_vector;
use crate::spectral::{overlap, CavityConfig, CavityMode};
use crate::units;

/// Options for integrating g along the membrane path.
#[derive(Debug, Clone, Copy)]
pub struct PathOptions {
    pub method: GMethod,
    pub rtol: f64,
    pub max_depth: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            method: GMethod::Interface,
            rtol: 1e-11,
            max_depth: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathIntegral {
    pub f: DMatrix<f64>,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// f_kj(q) = ∫_{q0}^{q} g_kj(q′) dq′ for modes `first..first+count`.
pub fn coupling_f(
    config: &CavityConfig,
    q0: f64,
    q: f64,
    first: usize,
    count: usize,
    opts: PathOptions,
) -> Result<PathIntegral> {
    config.check_position(q0)?;
    config.check_position(q)?;
    let mut integrand = |qp: f64| -> Result<Vec<f64>> {
        let block = mode_block(config, qp, first, count)?;
        Ok(g_matrix(config, &block, opts.method)?.as_slice().to_vec())
    };
    if q == q0 {
        return Ok(PathIntegral {
            f: DMatrix::zeros(count, count),
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let r = adaptive_vector(&mut integrand, q0, q, opts.rtol, 0.0, opts.max_depth)?;
    let f = DMatrix::from_column_slice(count, count, &r.values);
    Ok(PathIntegral {
        f: antisymmetrize(&f),
        abs_error: r.abs_error,
        evaluations: r.evaluations,
    })
}

/// λ = exp(f) − I for antisymmetric f, so that I + λ is orthogonal.
pub fn lambda_matrix(f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !f.is_square() {
        return Err(Error::Precondition("f must be square".into()));
    }
    let scale = f.amax();
    let defect = (f + f.transpose()).amax();
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(Error::Precondition(format!(
            "f is not antisymmetric (max |f + fᵀ| = {defect:e})"
        )));
    }
    let n = f.nrows();
    Ok(f.clone().exp() - DMatrix::identity(n, n))
}

/// max |(I+λ)(I+λ)ᵀ − I|.
pub fn orthogonality_defect(lambda: &DMatrix<f64>) -> f64 {
    let n = lambda.nrows();
    let r = lambda + DMatrix::identity(n, n);
    (&r * r.transpose() - DMatrix::identity(n, n)).amax()
}

/// ξ⁺ and ξ⁻ in the same units as ω:
///   ξ±_kj = ¼√(ω_kω_j)[2λ_kj ω_k/ω_j + Σ_l λ_lk λ_lj ω_l²/(ω_kω_j) ± (λ_kj − λ_jk)].
pub fn xi_coefficients(omega: &[f64], lambda: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = omega.len();
    if lambda.nrows() != n || lambda.ncols() != n {
        return Err(Error::Precondition(format!(
            "λ is {}×{} but there are {n} frequencies",
            lambda.nrows(),
            lambda.ncols()
        )));
    }
    if let Some(w) = omega.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Domain(format!("frequencies must be positive, got {w}")));
    }
    let mut xp = DMatrix::zeros(n, n);
    let mut xm = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let (wk, wj) = (omega[k], omega[j]);
            let mut s = 0.0;
            for l in 0..n {
                s += lambda[(l, k)] * lambda[(l, j)] * omega[l] * omega[l];
            }
            let common = 2.0 * lambda[(k, j)] * wk / wj + s / (wk * wj);
            let anti = lambda[(k, j)] - lambda[(j, k)];
            let pre = 0.25 * (wk * wj).sqrt();
            xp[(k, j)] = pre * (common + anti);
            xm[(k, j)] = pre * (common - anti);
        }
    }
    Ok((xp, xm))
}

/// Coefficients c_kj/ħ = ½ g_kj √(ω_k/ω_j) of the Γ operator.
pub fn gamma_coefficients(omega: &[f64], g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = omega.len();
    DMatrix::from_fn(n, n, |k, j| 0.5 * g[(k, j)] * (omega[k] / omega[j]).sqrt())
}

/// φ̃_k = φ_k + Σ_j λ_jk φ_j, i.e. column k of (I + λ) in the mode basis.
#[derive(Debug, Clone)]
pub struct TransformedModes {
    pub modes: Vec<CavityMode>,
    pub rotation: DMatrix<f64>,
}

impl TransformedModes {
    pub fn value(&self, k: usize, x: f64) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(j, m)| self.rotation[(j, k)] * m.value(x))
            .sum()
    }

    /// ∫ ε φ̃_k φ̃_j dx for all pairs.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.modes.len();
        let g = DMatrix::from_fn(n, n, |i, j| overlap(&self.modes[i], &self.modes[j]));
        self.rotation.transpose() * g * &self.rotation
    }
}

pub fn transformed_modes(modes: &[CavityMode], lambda: &DMatrix<f64>) -> Result<TransformedModes> {
    let n = modes.len();
    if lambda.nrows() != n || lambda.ncols() != n {
        return Err(Error::Precondition("λ does not match the mode count".into()));
    }
    if modes.windows(2).any(|w| w[0].q != w[1].q) {
        return Err(Error::Precondition("modes belong to different positions".into()));
    }
    Ok(TransformedModes {
        modes: modes.to_vec(),
        rotation: lambda + DMatrix::identity(n, n),
    })
}

/// All coupling tensors for modes `first..first+count`, evaluated at q with
/// the path integral started at q0.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingSet {
    pub q: f64,
    pub q0: f64,
    pub indices: Vec<usize>,
    /// rad/s
    pub omega: Vec<f64>,
    /// 1/m
    pub g: DMatrix<f64>,
    /// 1/m
    pub zeta: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    /// rad/s
    pub xi_plus: DMatrix<f64>,
    /// rad/s
    pub xi_minus: DMatrix<f64>,
    /// Raw antisymmetry defect of quadrature g, when it was computed.
    pub raw_antisymmetry_defect: Option<f64>,
    pub orthogonality_defect: f64,
    pub path_error: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CouplingOptions {
    pub path: PathOptions,
    /// Also evaluate g and ζ at q by quadrature and log the raw defect.
    pub quadrature_check: bool,
}

pub fn coupling_set(
    config: &CavityConfig,
    q0: f64,
    q: f64,
    first: usize,
    count: usize,
    opts: CouplingOptions,
) -> Result<CouplingSet> {
    let block = mode_block(config, q, first, count)?;
    let (g_if, zeta) = interface_matrices(config, &block);
    let (g, zeta, raw_defect) = if opts.quadrature_check || opts.path.method == GMethod::Quadrature {
        let raw = super::tensors::quadrature_matrices(config, &block, 1e-9)?;
        let defect = raw.antisymmetry_defect();
        (antisymmetrize(&raw.g), raw.zeta, Some(defect))
    } else {
        (antisymmetrize(&g_if), zeta, None)
    };
    let path = coupling_f(config, q0, q, first, count, opts.path)?;
    let lambda = lambda_matrix(&path.f)?;
    let omega: Vec<f64> = block.iter().map(|m| units::omega_to_si(m.frequency())).collect();
    let (xi_plus, xi_minus) = xi_coefficients(&omega, &lambda)?;
    Ok(CouplingSet {
        q,
        q0,
        indices: block.iter().map(|m| m.index).collect(),
        omega,
        g,
        zeta,
        orthogonality_defect: orthogonality_defect(&lambda),
        f: path.f,
        lambda,
        xi_plus,
        xi_minus,
        raw_antisymmetry_defect: raw_defect,
        path_error: path.abs_error,
    })
}

/// ξ⁺_kk of one mode as the truncation K grows (window centred on k).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XiConvergence {
    pub count: usize,
    pub first: usize,
    /// rad/s
    pub xi_plus_kk: f64,
}

pub fn xi_convergence(config: &CavityConfig, q0: f64, q: f64, k: usize, counts: &[usize]) -> Result<Vec<XiConvergence>> {
    counts
        .iter()
        .map(|&count| {
            if count == 0 {
                return Err(Error::Domain("truncation must keep at least one mode".into()));
            }
            let first = k.saturating_sub(count / 2).max(1);
            let set = coupling_set(config, q0, q, first, count, CouplingOptions::default())?;
            let i = k - first;
            if i >= count {
                return Err(Error::Domain(format!("mode {k} not in window of {count}")));
            }
            Ok(XiConvergence {
                count,
                first,
                xi_plus_kk: set.xi_plus[(i, i)],
            })
        })
        .collect()
}
