use rayon::prelude::*;
use serde::Serialize;

use crate::couplings::g_interface;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::spectral::{frequency_derivative, mode_function, roots_in, Band, CavityConfig, CavityMode};
use crate::units;

use super::linear::SLOPE_TOLERANCE;

/// Which j-modes of the window enter the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSampling {
    /// Every mode in the window.
    Exhaustive,
    /// About this many evenly strided modes, extrapolated to the window.
    Sampled(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct QuadraticOptions {
    /// Window [lo, hi] in rad/s.
    pub window: (f64, f64),
    pub sampling: WindowSampling,
    /// Spacing (rad/s) used to count contributing modes in the window; the
    /// measured spacing of contributing modes near k when `None`.
    pub spacing: Option<f64>,
    /// Number of contributing modes on each side of k averaged into the
    /// representative per-mode value.
    pub near_count: usize,
}

impl Default for QuadraticOptions {
    fn default() -> Self {
        QuadraticOptions {
            window: (1e15, 1e16),
            sampling: WindowSampling::Exhaustive,
            spacing: None,
            near_count: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContributingMode {
    pub j: usize,
    /// rad/s
    pub omega_j: f64,
    /// g⁽⁰⁾_kj in 1/m
    pub g: f64,
    /// g² (ω_k − ω_j)² (ω_k + ω_j)/(4 ω_k ω_j) in rad/s per m²
    pub term: f64,
}

/// Quadratic optomechanical coefficient of mode k about an extremum q0.
/// Frequencies in rad/s, derivatives per m and per m².
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveModelReport {
    pub k: usize,
    pub q0: f64,
    pub omega_k0: f64,
    pub slope: f64,
    pub curvature: f64,
    /// ω″/2
    pub curvature_term: f64,
    /// Σ of `table` terms
    pub mode_sum: f64,
    /// Table rows with a non-negligible term, ordered by j.
    pub table: Vec<ContributingMode>,
    pub window: (f64, f64),
    pub sampling: WindowSampling,
    /// Modes evaluated (contributing or not).
    pub evaluated: usize,
    /// Modes in the window.
    pub window_modes: usize,
    /// Estimate of the full window sum: equal to `mode_sum` when exhaustive,
    /// otherwise the sampled mean times the estimated contributing count.
    pub window_sum: f64,
    /// Mean term of the contributing modes nearest k.
    pub per_mode_near_k: f64,
    /// max/min of the contributing terms in the table.
    pub spread: f64,
    /// Spacing of contributing modes (rad/s) used for `spacing_sum`.
    pub contributing_spacing: f64,
    /// `per_mode_near_k` × window width / `contributing_spacing`.
    pub spacing_sum: f64,
}

impl EffectiveModelReport {
    /// Total coefficient ω″/2 + Σ in rad/s per m².
    pub fn bracket(&self) -> f64 {
        self.curvature_term + self.mode_sum
    }
}

/// Terms for modes j in `first..=last` (strided) against mode k.
fn scan_terms(config: &CavityConfig, mk: &CavityMode, first: usize, last: usize, stride: usize) -> Result<Vec<ContributingMode>> {
    const CHUNK: usize = 2048;
    let g = config.geometry(mk.q)?;
    let starts: Vec<usize> = (first..=last).step_by(CHUNK * stride).collect();
    let parts: Vec<Result<Vec<ContributingMode>>> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + CHUNK * stride - 1).min(last);
            let roots = roots_in(&g, Band::Indices { first: s, last: e })?;
            let wk = mk.frequency();
            let mut out = Vec::new();
            for r in roots.iter().filter(|r| (r.index - s) % stride == 0 && r.index != mk.index) {
                let mj = CavityMode::build(&g, mk.q, r);
                let gkj = g_interface(config, mk, &mj);
                let wj = mj.frequency();
                let dw = mk.omega.diff(mj.omega);
                let term = gkj * gkj * dw * dw * (wk + wj) / (4.0 * wk * wj);
                out.push(ContributingMode {
                    j: r.index,
                    omega_j: units::omega_to_si(wj),
                    g: gkj,
                    term: units::omega_to_si(term),
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

pub fn quadratic_coupling(config: &CavityConfig, q0: f64, k: usize, opts: QuadraticOptions) -> Result<EffectiveModelReport> {
    let (lo, hi) = opts.window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid window [{lo:e}, {hi:e}]")));
    }
    let mk = mode_function(config, q0, k)?;
    let d1 = frequency_derivative(config, q0, k, 1)?;
    if d1.value.abs() > SLOPE_TOLERANCE * mk.frequency() / config.length {
        return Err(Error::Precondition(format!(
            "q0 is not an extremum of ω_{k}: dω/dq = {:e} rad/s/m",
            units::slope_to_si(d1.value)
        )));
    }
    let d2 = frequency_derivative(config, q0, k, 2)?;
    let geom = config.geometry(q0)?;
    let first = geom.count_below(units::omega_from_si(lo)) + 1;
    let last = geom.count_below(units::omega_from_si(hi));
    if last < first {
        return Err(Error::Domain("window contains no modes".into()));
    }
    let window_modes = last - first + 1;
    let stride = match opts.sampling {
        WindowSampling::Exhaustive => 1,
        WindowSampling::Sampled(n) => {
            if n == 0 {
                return Err(Error::Domain("sample count must be positive".into()));
            }
            // odd stride so both parities are visited
            let s = (window_modes / n).max(1);
            if s % 2 == 0 {
                s + 1
            } else {
                s
            }
        }
    };
    let all = scan_terms(config, &mk, first, last, stride)?;
    let evaluated = all.len();
    let peak = all.iter().map(|c| c.term.abs()).fold(0.0, f64::max);
    let table: Vec<ContributingMode> = all.into_iter().filter(|c| c.term.abs() > 1e-8 * peak).collect();
    let terms: Vec<f64> = table.iter().map(|c| c.term).collect();
    let mode_sum = pairwise_sum(&terms);
    let window_sum = match opts.sampling {
        WindowSampling::Exhaustive => mode_sum,
        WindowSampling::Sampled(_) => {
            let frac = table.len() as f64 / evaluated.max(1) as f64;
            let mean = mode_sum / table.len().max(1) as f64;
            mean * frac * window_modes as f64
        }
    };
    let (min, max) = terms
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), &t| (a.min(t.abs()), b.max(t.abs())));
    let spread = if table.is_empty() { f64::NAN } else { max / min };

    // contributing neighbours of k, evaluated exhaustively near k
    let n_near = opts.near_count.max(1);
    let near_first = k.saturating_sub(4 * n_near + 2).max(1);
    let near = scan_terms(config, &mk, near_first, k + 4 * n_near + 2, 1)?;
    let near_peak = near.iter().map(|c| c.term.abs()).fold(0.0, f64::max);
    let near: Vec<&ContributingMode> = near.iter().filter(|c| c.term.abs() > 1e-8 * near_peak).collect();
    let below: Vec<&&ContributingMode> = near.iter().filter(|c| c.j < k).rev().take(n_near).collect();
    let above: Vec<&&ContributingMode> = near.iter().filter(|c| c.j > k).take(n_near).collect();
    let chosen: Vec<f64> = below.iter().chain(above.iter()).map(|c| c.term).collect();
    let per_mode_near_k = pairwise_sum(&chosen) / chosen.len().max(1) as f64;
    let mut freqs: Vec<f64> = below.iter().chain(above.iter()).map(|c| c.omega_j).collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let measured_spacing = if freqs.len() >= 2 {
        (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64
    } else {
        f64::NAN
    };
    let contributing_spacing = opts.spacing.unwrap_or(measured_spacing);
    let spacing_sum = per_mode_near_k * (hi - lo) / contributing_spacing;

    let curvature = d2.value * units::C;
    Ok(EffectiveModelReport {
        k,
        q0,
        omega_k0: units::omega_to_si(mk.frequency()),
        slope: units::slope_to_si(d1.value),
        curvature,
        curvature_term: 0.5 * curvature,
        mode_sum,
        table,
        window: opts.window,
        sampling: opts.sampling,
        evaluated,
        window_modes,
        window_sum,
        per_mode_near_k,
        spread,
        contributing_spacing,
        spacing_sum,
    })
}
