//! Central finite differences with Richardson extrapolation (Ridders'
//! tableau), applied component-wise to vector-valued functions.

use crate::error::Result;

const CON: f64 = 1.4;
const CON2: f64 = CON * CON;
const SAFE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct Derivative {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    /// Step size at which each component's best estimate was taken.
    pub step: Vec<f64>,
}

/// Differentiate `f(offset)` at offset 0 starting from step `h0` and
/// shrinking by 1.4 for up to `ntab` levels.
pub fn ridders<F>(mut f: F, h0: f64, stencil: Stencil, ntab: usize) -> Result<Derivative>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let centre = match stencil {
        Stencil::First => None,
        Stencil::Second => Some(f(0.0)?),
    };
    let mut estimate = |h: f64| -> Result<Vec<f64>> {
        let p = f(h)?;
        let m = f(-h)?;
        Ok(match &centre {
            None => p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
            Some(c) => p
                .iter()
                .zip(&m)
                .zip(c)
                .map(|((a, b), c0)| (a - 2.0 * c0 + b) / (h * h))
                .collect(),
        })
    };

    let first = estimate(h0)?;
    let dim = first.len();
    let mut tab: Vec<Vec<Vec<f64>>> = vec![vec![first]];
    let mut best = tab[0][0].clone();
    let mut err = vec![f64::INFINITY; dim];
    let mut step = vec![h0; dim];
    let mut done = vec![false; dim];
    let mut hh = h0;
    for i in 1..ntab {
        hh /= CON;
        let mut row = vec![estimate(hh)?];
        let mut fac = CON2;
        for j in 1..=i {
            let prev_same = &row[j - 1];
            let prev_coarse = &tab[i - 1][j - 1];
            let next: Vec<f64> = prev_same
                .iter()
                .zip(prev_coarse)
                .map(|(a, b)| (a * fac - b) / (fac - 1.0))
                .collect();
            for c in 0..dim {
                if done[c] {
                    continue;
                }
                let errt = (next[c] - prev_same[c])
                    .abs()
                    .max((next[c] - prev_coarse[c]).abs());
                if errt <= err[c] {
                    err[c] = errt;
                    best[c] = next[c];
                    step[c] = hh;
                }
            }
            row.push(next);
            fac *= CON2;
        }
        for c in 0..dim {
            if !done[c] && (row[i][c] - tab[i - 1][i - 1][c]).abs() >= SAFE * err[c] {
                done[c] = true;
            }
        }
        tab.push(row);
        if done.iter().all(|d| *d) {
            break;
        }
    }
    Ok(Derivative {
        value: best,
        error: err,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_exp() {
        let d = ridders(|h| Ok(vec![(1.0 + h).exp(), (2.0 * h).sin()]), 0.5, Stencil::First, 10).unwrap();
        assert!((d.value[0] - 1f64.exp()).abs() < 1e-12);
        assert!((d.value[1] - 2.0).abs() < 1e-12);
        assert!(d.error[0] < 1e-10);
    }

    #[test]
    fn second_derivative_of_cos() {
        let d = ridders(|h| Ok(vec![(0.3 + h).cos()]), 0.4, Stencil::Second, 10).unwrap();
        assert!((d.value[0] + 0.3f64.cos()).abs() < 1e-9, "{:?}", d);
    }
}
