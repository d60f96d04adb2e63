use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::basis::FockBasis;
use super::hamiltonian::FockHamiltonian;
use crate::error::{Error, Result};
use crate::numerics::krylov::{propagate, KrylovOptions, KrylovStats};

/// Largest dimension handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub enum Propagator {
    Krylov(KrylovOptions),
    /// Full diagonalisation, then exact phases.
    Dense,
}

impl Default for Propagator {
    fn default() -> Self {
        Propagator::Krylov(KrylovOptions::default())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub propagator: Propagator,
    /// Population allowed in the top layer of any truncated mode.
    pub leakage_limit: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            propagator: Propagator::default(),
            leakage_limit: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vec<Complex64>>,
    /// max |‖ψ(t)‖ − 1|
    pub norm_drift: f64,
    /// Largest population seen in any mode's top Fock layer.
    pub max_leakage: f64,
    pub leakage_flagged: bool,
    pub krylov_steps: usize,
    pub matvecs: usize,
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Population in the top layer n = cutoff, maximised over modes.
pub fn top_layer_population(basis: &FockBasis, psi: &[Complex64]) -> f64 {
    (0..basis.sites())
        .filter(|&s| basis.cutoff(s) > 0)
        .map(|s| {
            psi.iter()
                .enumerate()
                .filter(|(i, _)| basis.occupation(*i, s) == basis.cutoff(s))
                .map(|(_, x)| x.norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn number_state(basis: &FockBasis, occ: &[usize]) -> Result<Vec<Complex64>> {
    let i = basis
        .index(occ)
        .ok_or_else(|| Error::Config(format!("occupations {occ:?} do not fit the basis")))?;
    let mut v = vec![Complex64::new(0.0, 0.0); basis.dim()];
    v[i] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// ⟨n_site⟩.
pub fn site_number(basis: &FockBasis, psi: &[Complex64], site: usize) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, x)| basis.occupation(i, site) as f64 * x.norm_sqr())
        .sum()
}

/// Total photon number ⟨Σ_k a_k†a_k⟩.
pub fn photon_number(basis: &FockBasis, psi: &[Complex64]) -> f64 {
    (1..basis.sites()).map(|s| site_number(basis, psi, s)).sum()
}

/// ⟨b + b†⟩, i.e. ⟨x̂⟩ in units of the zero-point amplitude.
pub fn position_expectation(basis: &FockBasis, psi: &[Complex64]) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    let stride = basis.stride(0);
    for (i, x) in psi.iter().enumerate() {
        let n = basis.occupation(i, 0);
        if n > 0 {
            // ⟨…n−1|b|…n⟩ = √n
            s += psi[i - stride].conj() * x * (n as f64).sqrt();
        }
    }
    2.0 * s.re
}

/// |⟨a|b⟩|²
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

pub fn dense_spectrum(h: &FockHamiltonian) -> Result<DenseSpectrum> {
    if h.dim() > DENSE_LIMIT {
        return Err(Error::Dimension {
            dim: h.dim(),
            limit: DENSE_LIMIT,
        });
    }
    let e = SymmetricEigen::new(h.matrix.to_dense());
    Ok(DenseSpectrum {
        eigenvalues: e.eigenvalues,
        eigenvectors: e.eigenvectors,
    })
}

fn dense_apply(s: &DenseSpectrum, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
    let n = psi0.len();
    let v = &s.eigenvectors;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let c: Complex64 = (0..n).map(|i| psi0[i] * v[(i, k)]).sum();
        let c = c * Complex64::from_polar(1.0, -s.eigenvalues[k] * t);
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * v[(i, k)];
        }
    }
    out
}

/// ψ(t) = exp(−iHt)ψ0 at each of `times` (ascending, from t = 0).
pub fn evolve_state(h: &FockHamiltonian, psi0: &[Complex64], times: &[f64], opts: &EvolveOptions) -> Result<Evolution> {
    if psi0.len() != h.dim() {
        return Err(Error::Config("state does not match the basis".into()));
    }
    let n0 = norm(psi0);
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("initial state has norm {n0}")));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("times must be finite, non-negative and ascending".into()));
    }
    let dense = match opts.propagator {
        Propagator::Dense => Some(dense_spectrum(h)?),
        Propagator::Krylov(_) => None,
    };
    let mut stats = KrylovStats::default();
    let mut states = Vec::with_capacity(times.len());
    let mut cur = psi0.to_vec();
    let mut t_cur = 0.0;
    let (mut drift, mut leak) = (0.0_f64, 0.0_f64);
    for &t in times {
        let next = match (&dense, opts.propagator) {
            (Some(s), _) => dense_apply(s, psi0, t),
            (None, Propagator::Krylov(k)) => propagate(&h.matrix, &cur, t - t_cur, &k, &mut stats)?,
            (None, Propagator::Dense) => unreachable!(),
        };
        drift = drift.max((norm(&next) - 1.0).abs());
        leak = leak.max(top_layer_population(&h.basis, &next));
        cur = next.clone();
        t_cur = t;
        states.push(next);
    }
    Ok(Evolution {
        times: times.to_vec(),
        states,
        norm_drift: drift,
        max_leakage: leak,
        leakage_flagged: leak >= opts.leakage_limit,
        krylov_steps: stats.steps,
        matvecs: stats.matvecs,
    })
}
