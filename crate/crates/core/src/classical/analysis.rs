use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::grid::Grid;
use super::integrator::{evolve_classical, ClassicalOptions, ClassicalState, ModeExcitation, Trajectory};
use super::motion::{MembraneMotion, PrescribedMotion};
use crate::couplings::{g_interface, mode_block, zeta_interface};
use crate::error::{Error, Result};
use crate::spectral::CavityConfig;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralPeak {
    /// Angular frequency of the strongest bin.
    pub omega: f64,
    /// Bin width 2π/T.
    pub bin: f64,
    pub index: usize,
}

/// Strongest positive-frequency bin of a uniformly sampled real signal
/// (mean removed, no window).
pub fn spectral_peak(signal: &[f64], sample_dt: f64) -> Result<SpectralPeak> {
    let n = signal.len();
    if n < 4 || !(sample_dt > 0.0) {
        return Err(Error::Domain("need at least four samples and a positive step".into()));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut best = 1;
    for i in 1..=n / 2 {
        if buf[i].norm_sqr() > buf[best].norm_sqr() {
            best = i;
        }
    }
    let bin = 2.0 * std::f64::consts::PI / (n as f64 * sample_dt);
    Ok(SpectralPeak {
        omega: best as f64 * bin,
        bin,
        index: best,
    })
}

/// Resonant exchange between modes k1 and k2 driven by
/// q(t) = q0 + a·sin(Ωt) with Ω = ω2 − ω1, from the linearised hop
/// h = ½ g_12 (ω1² − ω2²)/√(ω1ω2): energy fraction in k2 follows sin²(a|h|t/2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferPrediction {
    pub k1: usize,
    pub k2: usize,
    pub omega1: f64,
    pub omega2: f64,
    /// ω2 − ω1
    pub drive: f64,
    pub hop: f64,
    pub amplitude: f64,
    /// π/(a|h|), time to full transfer
    pub transfer_time: f64,
}

pub fn transfer_prediction(config: &CavityConfig, q0: f64, k1: usize, k2: usize, amplitude: f64) -> Result<TransferPrediction> {
    if k1 == k2 || k1 == 0 || k2 == 0 {
        return Err(Error::Domain("need two distinct modes".into()));
    }
    let lo = k1.min(k2);
    let block = mode_block(config, q0, lo, k1.max(k2) - lo + 1)?;
    let (m1, m2) = (&block[k1 - lo], &block[k2 - lo]);
    let (w1, w2) = (m1.frequency(), m2.frequency());
    let g = g_interface(config, m1, m2);
    let hop = 0.5 * g * m1.omega.diff(m2.omega) * (w1 + w2) / (w1 * w2).sqrt();
    Ok(TransferPrediction {
        k1,
        k2,
        omega1: w1,
        omega2: w2,
        drive: m2.omega.diff(m1.omega),
        hop,
        amplitude,
        transfer_time: std::f64::consts::PI / (amplitude * hop).abs(),
    })
}

/// E_{i2}/(E_{i1} + E_{i2}) per sample, with i1, i2 positions in the
/// projection band.
pub fn transfer_fraction(traj: &Trajectory, i1: usize, i2: usize) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| {
            let (a, b) = (s.mode_energies[i1], s.mode_energies[i2]);
            (s.t, b / (a + b))
        })
        .collect()
}

/// Time of the largest fraction within the first excursion above ½.
pub fn first_transfer_maximum(fraction: &[(f64, f64)]) -> Option<(f64, f64)> {
    let start = fraction.iter().position(|&(_, f)| f > 0.5)?;
    let mut best = fraction[start];
    for &(t, f) in &fraction[start..] {
        if f < 0.5 {
            break;
        }
        if f > best.1 {
            best = (t, f);
        }
    }
    Some(best)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Mode initially excited.
    pub k: usize,
    pub amplitude: f64,
    pub motion: PrescribedMotion,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticProbeReport {
    pub k: usize,
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// E_k / ω_k(q(t))
    pub invariant: Vec<f64>,
    /// max |J(t)/J(0) − 1|
    pub drift: f64,
    /// Largest energy found outside mode k, relative to E_k(0).
    pub leaked: f64,
    /// max|q̇| · max|∂ω/∂q| / (min spacing)², at the initial position.
    pub adiabaticity: f64,
    pub mode_energies: Vec<Vec<f64>>,
}

/// Excite mode k, move the membrane as prescribed and follow E_k/ω_k.
pub fn adiabatic_invariant_probe(config: &CavityConfig, grid: Grid, spec: &SweepSpec, opts: &ClassicalOptions) -> Result<AdiabaticProbeReport> {
    let cfg = super::grid::grid_config(config, &grid, opts.thin_slab)?;
    let (q0, _, _) = spec.motion.at(0.0);
    let first = spec.k.saturating_sub(1).max(1);
    let count = spec.k + 2 - first;
    let block = mode_block(&cfg, q0, first, count)?;
    let slopes: Vec<f64> = block.iter().map(|m| (m.frequency() * zeta_interface(&cfg, m, m)).abs()).collect();
    let gap = block
        .windows(2)
        .map(|w| w[1].omega.diff(w[0].omega))
        .fold(f64::INFINITY, f64::min);
    let speed = (0..=1000)
        .map(|i| spec.motion.at(spec.t_end * i as f64 / 1000.0).1.abs())
        .fold(0.0, f64::max);
    let adiabaticity = speed * slopes.iter().cloned().fold(0.0, f64::max) / (gap * gap);

    let state = ClassicalState::from_modes(
        grid,
        &cfg,
        q0,
        &[ModeExcitation {
            k: spec.k,
            amplitude: spec.amplitude,
            phase: 0.0,
        }],
    )?;
    let o = ClassicalOptions {
        projection: Some((first, count)),
        sample_every: spec.sample_every,
        ..*opts
    };
    let traj = evolve_classical(config, &state, &MembraneMotion::Prescribed(spec.motion), spec.t_end, spec.dt, &o)?;
    let pos = spec.k - first;
    let mut invariant = Vec::new();
    let mut leaked: f64 = 0.0;
    let e0 = traj.samples[0].mode_energies[pos];
    for s in &traj.samples {
        let m = crate::spectral::mode_function(&cfg, s.q, spec.k)?;
        invariant.push(s.mode_energies[pos] / m.frequency());
        let others: f64 = s
            .mode_energies
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, e)| e)
            .sum();
        leaked = leaked.max(others / e0);
    }
    let j0 = invariant[0];
    let drift = invariant.iter().map(|j| (j / j0 - 1.0).abs()).fold(0.0, f64::max);
    Ok(AdiabaticProbeReport {
        k: spec.k,
        indices: (first..first + count).collect(),
        times: traj.samples.iter().map(|s| s.t).collect(),
        positions: traj.samples.iter().map(|s| s.q).collect(),
        invariant,
        drift,
        leaked,
        adiabaticity,
        mode_energies: traj.samples.iter().map(|s| s.mode_energies.clone()).collect(),
    })
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"MIMCAVF1";

/// Field dump: magic "MIMCAVF1", node count (u64), then dx, t, q, q̇ and the
/// A and Ȧ arrays as f64, all little-endian.
pub fn write_snapshot<W: Write>(w: &mut W, s: &ClassicalState) -> std::io::Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(s.grid.nodes() as u64).to_le_bytes())?;
    for v in [s.grid.dx, s.t, s.q, s.q_dot].iter().chain(&s.a).chain(&s.a_dot) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<ClassicalState> {
    let io = |e: std::io::Error| Error::Config(format!("snapshot: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Config("not a field snapshot".into()));
    }
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io)?;
    let nodes = u64::from_le_bytes(b) as usize;
    let mut f = || -> Result<f64> {
        r.read_exact(&mut b).map_err(io)?;
        Ok(f64::from_le_bytes(b))
    };
    let (dx, t, q, q_dot) = (f()?, f()?, f()?, f()?);
    let a = (0..nodes).map(|_| f()).collect::<Result<Vec<_>>>()?;
    let a_dot = (0..nodes).map(|_| f()).collect::<Result<Vec<_>>>()?;
    if nodes < 2 {
        return Err(Error::Config("snapshot has too few nodes".into()));
    }
    let grid = Grid { cells: nodes - 1, dx };
    ClassicalState::new(grid, a, a_dot, q, q_dot, t)
}
