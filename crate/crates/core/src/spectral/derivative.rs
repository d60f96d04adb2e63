use super::config::{CavityConfig, Geometry};
use super::dispersion::{roots_in, track_root, Band};
use super::mode::{coefficients, CavityMode, Coefficients};
use crate::error::{Error, Result};
use crate::numerics::phase::Split;
use crate::numerics::ridders::{ridders, Stencil};

/// A derivative of ω_k with respect to the membrane position, in natural
/// units (order 1: 1/m², order 2: 1/m³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyDerivative {
    pub index: usize,
    pub order: u8,
    pub value: f64,
    pub error: f64,
    pub step: f64,
}

/// Follows one mode index as the slab is displaced by small offsets.
pub(crate) struct Tracker {
    geom: Geometry,
    index: usize,
    omega0: Split,
    half_gap: f64,
    lower: Option<f64>,
    upper: f64,
}

impl Tracker {
    pub fn new(geom: Geometry, index: usize) -> Result<Self> {
        let first = index.saturating_sub(1).max(1);
        let rs = roots_in(&geom, Band::Indices { first, last: index + 1 })?;
        let find = |i: usize| rs.iter().find(|r| r.index == i).map(|r| r.value());
        let here = rs.iter().find(|r| r.index == index).unwrap().omega;
        let lower = if index > 1 { find(index - 1) } else { None };
        let upper = find(index + 1).unwrap();
        let w = here.value();
        let mut gap = upper - w;
        if let Some(lo) = lower {
            gap = gap.min(w - lo);
        }
        Ok(Tracker {
            geom,
            index,
            omega0: here,
            half_gap: 0.5 * gap,
            lower,
            upper,
        })
    }

    pub fn omega0(&self) -> Split {
        self.omega0
    }

    /// Largest displacement the slab can take without touching a mirror.
    pub fn room(&self) -> f64 {
        self.geom.a.min(self.geom.length - self.geom.b)
    }

    pub fn at(&self, eta: f64) -> Result<Coefficients> {
        let g = self.geom.displaced(eta);
        let w = track_root(&g, self.index, self.omega0.value(), 0.5 * self.half_gap).map_err(|e| {
            Error::BranchTracking {
                index: self.index,
                neighbor: self.index + 1,
                detail: e.to_string(),
            }
        })?;
        let shift = w.diff(self.omega0);
        if shift.abs() >= self.half_gap {
            let neighbor = match self.lower {
                Some(lo) if (w.value() - lo).abs() < (w.value() - self.upper).abs() => self.index - 1,
                _ => self.index + 1,
            };
            return Err(Error::BranchTracking {
                index: self.index,
                neighbor,
                detail: format!(
                    "frequency moved by {shift:e} at offset {eta:e}, more than half the gap {:e}",
                    2.0 * self.half_gap
                ),
            });
        }
        Ok(coefficients(&g, w))
    }

    /// Initial Ridders step: small against both the cavity and the wavelength.
    pub fn initial_step(&self) -> Result<f64> {
        let room = self.room();
        if room <= 0.0 {
            return Err(Error::Domain(
                "slab touches a mirror; position derivatives are undefined".into(),
            ));
        }
        let w = self.omega0.value();
        Ok((1e-6 * self.geom.length).min(0.1 / (self.geom.n * w)).min(0.25 * room))
    }
}

pub fn frequency_derivative(config: &CavityConfig, q0: f64, k: usize, order: u8) -> Result<FrequencyDerivative> {
    if k == 0 {
        return Err(Error::Domain("mode indices start at 1".into()));
    }
    let stencil = match order {
        1 => Stencil::First,
        2 => Stencil::Second,
        _ => return Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}"))),
    };
    let g = config.geometry(q0)?;
    let tr = Tracker::new(g, k)?;
    let w0 = tr.omega0();
    let h0 = tr.initial_step()?;
    let d = ridders(|h| Ok(vec![tr.at(h)?.omega.diff(w0)]), h0, stencil, 12)?;
    Ok(FrequencyDerivative {
        index: k,
        order,
        value: d.value[0],
        error: d.error[0],
        step: d.step[0],
    })
}

/// ∂_q of a mode's region coefficients at fixed anchors (0, a, l).
#[derive(Debug, Clone)]
pub struct ModeDerivative {
    pub mode: CavityMode,
    pub d_omega: f64,
    /// ∂_q of (p, s) per region.
    pub d_p: [f64; 3],
    pub d_s: [f64; 3],
    /// ∂_q of the wavenumber per region.
    pub d_k: [f64; 3],
    /// Largest Ridders error estimate among the components.
    pub max_error: f64,
}

impl ModeDerivative {
    /// ∂φ/∂q at fixed x.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let r = self.mode.region(x);
        self.value_in(r, x)
    }

    #[inline]
    pub fn value_in(&self, r: usize, x: f64) -> f64 {
        let pc = &self.mode.pieces[r];
        let u = x - pc.anchor;
        let (sn, cs) = pc.k.phase(u).sin_cos();
        self.d_p[r] * cs + self.d_s[r] * sn + self.d_k[r] * u * (pc.s * cs - pc.p * sn)
    }
}

/// Position derivative of a mode by branch-tracked finite differences of
/// its region coefficients.
pub fn mode_q_derivative(config: &CavityConfig, mode: &CavityMode) -> Result<ModeDerivative> {
    let g = config.geometry(mode.q)?;
    let tr = Tracker::new(g, mode.index)?;
    let w0 = tr.omega0();
    let h0 = tr.initial_step()?;
    let d = ridders(|h| Ok(tr.at(h)?.as_vec(w0)), h0, Stencil::First, 10)?;
    let v = &d.value;
    let n = g.n;
    Ok(ModeDerivative {
        mode: mode.clone(),
        d_omega: v[0],
        d_p: [0.0, v[2], 0.0],
        d_s: [v[1], v[3], v[4]],
        d_k: [v[0], n * v[0], v[0]],
        max_error: d.error.iter().cloned().fold(0.0, f64::max),
    })
}
