use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::CavityConfig;

/// Cells needed across the slab before it is treated as resolved.
pub const MIN_CELLS_ACROSS_SLAB: f64 = 4.0;

/// Uniform grid with nodes x_i = i·dx, i = 0..=cells; the end nodes are the
/// mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub cells: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(length: f64, cells: usize) -> Result<Grid> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!("grid length must be positive, got {length}")));
        }
        if cells < 16 {
            return Err(Error::Config(format!("need at least 16 cells, got {cells}")));
        }
        Ok(Grid {
            cells,
            dx: length / cells as f64,
        })
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn length(&self) -> f64 {
        self.cells as f64 * self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
}

/// Slab spread over `MIN_CELLS_ACROSS_SLAB` cells with χd held fixed.
pub fn thin_slab_surrogate(config: &CavityConfig, dx: f64) -> Result<CavityConfig> {
    let d = config.slab_width;
    let d_eff = d.max(MIN_CELLS_ACROSS_SLAB * dx);
    let chi = if d_eff > 0.0 {
        config.effective_susceptibility() * d / d_eff
    } else {
        0.0
    };
    CavityConfig::new(config.length, d_eff, chi, config.reference_position)
}

/// The slab the grid actually carries: `config` itself when resolved, the
/// thin-slab surrogate when allowed, otherwise an error.
pub fn grid_config(config: &CavityConfig, grid: &Grid, thin_slab: bool) -> Result<CavityConfig> {
    if (grid.length() - config.length).abs() > 1e-12 * config.length {
        return Err(Error::Config(format!(
            "grid length {} does not match cavity length {}",
            grid.length(),
            config.length
        )));
    }
    let cells = config.slab_width / grid.dx;
    if cells >= MIN_CELLS_ACROSS_SLAB || config.effective_susceptibility() == 0.0 {
        Ok(*config)
    } else if thin_slab {
        thin_slab_surrogate(config, grid.dx)
    } else {
        Err(Error::Config(format!(
            "slab spans {cells:.2} cells; at least {MIN_CELLS_ACROSS_SLAB} are needed (or enable the thin-slab surrogate)"
        )))
    }
}

/// Cell-averaged permittivity at every node for slab centre q.
pub fn permittivity(config: &CavityConfig, grid: &Grid, q: f64, eps: &mut [f64]) {
    let chi = config.effective_susceptibility();
    let h = 0.5 * config.slab_width;
    let (a, b) = (q - h, q + h);
    eps.iter_mut().for_each(|e| *e = 1.0);
    if chi == 0.0 {
        return;
    }
    let dx = grid.dx;
    let lo = (((a / dx) - 1.0).floor().max(0.0)) as usize;
    let hi = (((b / dx) + 1.0).ceil() as usize).min(grid.cells);
    for (i, e) in eps.iter_mut().enumerate().take(hi + 1).skip(lo) {
        let x = grid.x(i);
        let c0 = (x - 0.5 * dx).max(0.0);
        let c1 = (x + 0.5 * dx).min(grid.length());
        let cover = (c1.min(b) - c0.max(a)).max(0.0);
        *e = 1.0 + chi * cover / (c1 - c0);
    }
}

/// First and last node with ε ≠ 1, if any.
pub(crate) fn slab_nodes(eps: &[f64]) -> Option<(usize, usize)> {
    let s = eps.iter().position(|&e| e != 1.0)?;
    let e = eps.iter().rposition(|&e| e != 1.0)?;
    Some((s, e))
}
