//! Lanczos approximation of exp(−iHt)ψ for real symmetric H.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Maximum Krylov subspace dimension.
    pub max_dim: usize,
    /// Local error tolerance per step, in state norm.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_dim: 40,
            tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KrylovStats {
    pub steps: usize,
    pub matvecs: usize,
    pub max_local_error: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

struct Lanczos {
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// β after the last vector; zero on breakdown.
    beta_next: f64,
}

fn lanczos(h: &CsrMatrix, psi: &[Complex64], m: usize, stats: &mut KrylovStats) -> Lanczos {
    let n = psi.len();
    let nrm = norm(psi);
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|x| x / nrm).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut beta_next = 0.0;
    for j in 0..m.min(n) {
        h.matvec(&basis[j], &mut w);
        stats.matvecs += 1;
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // Full reorthogonalisation, applied twice.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = norm(&w);
        beta_next = b;
        if j + 1 == m.min(n) || b < 1e-14 * (a.abs() + 1.0) {
            if b < 1e-14 * (a.abs() + 1.0) {
                beta_next = 0.0;
            }
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Lanczos {
        basis,
        alpha,
        beta,
        beta_next,
    }
}

/// exp(−iTt)e₁ for the Lanczos tridiagonal T.
fn small_exp(l: &Lanczos, t: f64) -> Vec<Complex64> {
    let m = l.alpha.len();
    let mut tm = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tm[(i, i)] = l.alpha[i];
        if i + 1 < m {
            tm[(i, i + 1)] = l.beta[i];
            tm[(i + 1, i)] = l.beta[i];
        }
    }
    let eig = SymmetricEigen::new(tm);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let c0 = eig.eigenvectors[(0, k)];
        let ph = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        for (i, o) in out.iter_mut().enumerate() {
            *o += eig.eigenvectors[(i, k)] * c0 * ph;
        }
    }
    out
}

/// Propagate `psi` by time `t` under `h`, subdividing as needed.
pub fn propagate(
    h: &CsrMatrix,
    psi: &[Complex64],
    t: f64,
    opts: &KrylovOptions,
    stats: &mut KrylovStats,
) -> Result<Vec<Complex64>> {
    let mut state = psi.to_vec();
    if t == 0.0 {
        return Ok(state);
    }
    let hn = h.norm_bound().max(1e-300);
    let mut remaining = t;
    let mut dt = (t.abs()).min(opts.max_dim as f64 * 0.5 / hn).copysign(t);
    while remaining.abs() > 0.0 {
        if dt.abs() > remaining.abs() {
            dt = remaining;
        }
        let nrm = norm(&state);
        let lz = lanczos(h, &state, opts.max_dim, stats);
        let mut tries = 0;
        loop {
            let c = small_exp(&lz, dt);
            let m = c.len();
            // residual bound β ∫|c_m| ≈ β|dt||c_m|
            let err = nrm * lz.beta_next * dt.abs() * c[m - 1].norm();
            if err <= opts.tol || lz.beta_next == 0.0 {
                let mut next = vec![Complex64::new(0.0, 0.0); state.len()];
                for (v, ci) in lz.basis.iter().zip(&c) {
                    for (o, x) in next.iter_mut().zip(v) {
                        *o += x * ci * nrm;
                    }
                }
                state = next;
                remaining -= dt;
                stats.steps += 1;
                stats.max_local_error = stats.max_local_error.max(err);
                if err < opts.tol * 1e-3 {
                    dt *= 1.5;
                }
                break;
            }
            dt *= 0.5;
            tries += 1;
            if tries > 60 {
                return Err(Error::Numerical("Krylov step size underflow".into()));
            }
        }
    }
    Ok(state)
}
