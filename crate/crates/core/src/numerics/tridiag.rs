//! Thomas algorithm for tridiagonal systems.

/// Solve `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]` in place
/// (`rhs` becomes the solution). `lower[0]` and `upper[n−1]` are ignored.
/// Returns false if a zero pivot is met.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) -> bool {
    let n = diag.len();
    if n == 0 {
        return true;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut piv = diag[0];
    if piv == 0.0 {
        return false;
    }
    rhs[0] /= piv;
    for i in 1..n {
        scratch[i] = upper[i - 1] / piv;
        piv = diag[i] - lower[i] * scratch[i];
        if piv == 0.0 {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    true
}
