//! Numerical building blocks shared by the physics modules.

pub mod krylov;
pub mod phase;
pub mod quadrature;
pub mod ridders;
pub mod roots;
pub mod sparse;
pub mod tridiag;

/// Maximum absolute entry of a slice.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Sum in a fixed pairwise order so results do not depend on how the terms
/// were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (lo, hi) = v.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}
