use crate::error::{Error, Result};
use crate::numerics::phase::Split;
use serde::{Deserialize, Serialize};

/// Cavity geometry and slab material. Lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub length: f64,
    pub slab_width: f64,
    pub susceptibility: f64,
    pub reference_position: f64,
}

impl CavityConfig {
    pub fn new(length: f64, slab_width: f64, susceptibility: f64, reference_position: f64) -> Result<Self> {
        let c = CavityConfig {
            length,
            slab_width,
            susceptibility,
            reference_position,
        };
        c.validate()?;
        Ok(c)
    }

    /// l = 0.06 m, n = 2.2, d = 50 nm, membrane at the centre.
    pub fn membrane_in_the_middle() -> Self {
        CavityConfig {
            length: 0.06,
            slab_width: 50e-9,
            susceptibility: 2.2 * 2.2 - 1.0,
            reference_position: 0.03,
        }
    }

    pub fn with_position(mut self, q0: f64) -> Self {
        self.reference_position = q0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite();
        if !(ok(self.length) && self.length > 0.0) {
            return Err(Error::Config(format!("cavity length must be positive, got {}", self.length)));
        }
        if !(ok(self.slab_width) && self.slab_width >= 0.0 && self.slab_width <= self.length) {
            return Err(Error::Config(format!(
                "slab width must lie in [0, l], got {}",
                self.slab_width
            )));
        }
        if !(ok(self.susceptibility) && self.susceptibility >= 0.0) {
            return Err(Error::Config(format!(
                "susceptibility must be non-negative, got {}",
                self.susceptibility
            )));
        }
        self.check_position(self.reference_position)
            .map_err(|e| Error::Config(format!("reference position: {e}")))
    }

    /// χ actually seen by the field; a zero-width slab is an empty cavity.
    pub fn effective_susceptibility(&self) -> f64 {
        if self.slab_width == 0.0 {
            0.0
        } else {
            self.susceptibility
        }
    }

    pub fn refractive_index(&self) -> f64 {
        (1.0 + self.effective_susceptibility()).sqrt()
    }

    /// l + (n − 1)d.
    pub fn optical_length(&self) -> f64 {
        self.length + (self.refractive_index() - 1.0) * self.slab_width
    }

    pub fn check_position(&self, q: f64) -> Result<()> {
        let h = 0.5 * self.slab_width;
        let tol = 1e-14 * self.length;
        if !q.is_finite() || q < h - tol || q > self.length - h + tol {
            return Err(Error::Domain(format!(
                "membrane position {q} outside [{h}, {}]",
                self.length - h
            )));
        }
        Ok(())
    }

    pub fn geometry(&self, q: f64) -> Result<Geometry> {
        self.check_position(q)?;
        let h = 0.5 * self.slab_width;
        let a = (q - h).max(0.0);
        let b = (q + h).min(self.length);
        Ok(Geometry {
            length: self.length,
            chi: self.effective_susceptibility(),
            n: self.refractive_index(),
            a,
            b,
            eta: 0.0,
        })
    }

    pub fn profile(&self) -> DielectricProfile {
        DielectricProfile { config: *self }
    }
}

/// ε(x, q): 1 + χ inside the slab, 1 elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct DielectricProfile {
    pub config: CavityConfig,
}

impl DielectricProfile {
    pub fn eps(&self, x: f64, q: f64) -> f64 {
        let h = 0.5 * self.config.slab_width;
        if x >= q - h && x < q + h {
            1.0 + self.config.effective_susceptibility()
        } else {
            1.0
        }
    }

    /// Positions where ε jumps.
    pub fn discontinuities(&self, q: f64) -> Vec<f64> {
        if self.config.effective_susceptibility() == 0.0 {
            Vec::new()
        } else {
            let h = 0.5 * self.config.slab_width;
            vec![q - h, q + h]
        }
    }
}

/// Slab interfaces at `a + eta` and `b + eta`. `eta` carries a small
/// displacement separately from `a`, `b` so that finite differences in q
/// are not limited by the spacing of doubles near `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub length: f64,
    pub chi: f64,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    pub eta: f64,
}

/// The three optical phases ωa, nωd and ωL₃, each reduced mod 2π.
#[derive(Debug, Clone, Copy)]
pub struct Phases {
    pub a: f64,
    pub d: f64,
    pub l3: f64,
}

impl Geometry {
    pub fn displaced(&self, eta: f64) -> Geometry {
        Geometry { eta, ..*self }
    }

    pub fn len_left(&self) -> f64 {
        self.a + self.eta
    }

    pub fn len_slab(&self) -> f64 {
        self.b - self.a
    }

    pub fn len_right(&self) -> f64 {
        (self.length - self.b) - self.eta
    }

    pub fn optical_length(&self) -> f64 {
        self.length + (self.n - 1.0) * self.len_slab()
    }

    pub fn phases(&self, w: Split) -> Phases {
        let wv = w.value();
        Phases {
            a: w.phase(self.a) + wv * self.eta,
            d: w.scale(self.n).phase(self.b - self.a),
            l3: w.phase(self.length - self.b) - wv * self.eta,
        }
    }

    /// Characteristic function whose zeros are the mode frequencies.
    pub fn dispersion(&self, w: Split) -> f64 {
        let p = self.phases(w);
        let n = self.n;
        (p.a + p.l3).sin() * p.d.cos() + p.d.sin() * (p.a.cos() * p.l3.cos() / n - n * p.a.sin() * p.l3.sin())
    }

    /// Characteristic function and its ω-derivative.
    pub fn dispersion_with_slope(&self, w: Split) -> (f64, f64) {
        let p = self.phases(w);
        let n = self.n;
        let (sa, ca) = p.a.sin_cos();
        let (sd, cd) = p.d.sin_cos();
        let (s3, c3) = p.l3.sin_cos();
        let (sal, cal) = (p.a + p.l3).sin_cos();
        let d = sal * cd + sd * (ca * c3 / n - n * sa * s3);
        let d_a = cal * cd + sd * (-sa * c3 / n - n * ca * s3);
        let d_3 = cal * cd + sd * (-ca * s3 / n - n * sa * c3);
        let d_d = -sal * sd + cd * (ca * c3 / n - n * sa * s3);
        let slope = d_a * self.len_left() + d_d * n * self.len_slab() + d_3 * self.len_right();
        (d, slope)
    }

    /// Continuous scaled Prüfer angle at x = l for trial frequency `w`;
    /// the number of modes below `w` is ⌊θ/π⌋.
    pub fn prufer_angle(&self, w: f64) -> f64 {
        let mut th = w * self.len_left();
        th = prufer_jump(th, self.n);
        th += self.n * w * self.len_slab();
        th = prufer_jump(th, 1.0 / self.n);
        th + w * self.len_right()
    }

    pub fn count_below(&self, w: f64) -> usize {
        if w <= 0.0 {
            return 0;
        }
        (self.prufer_angle(w) / std::f64::consts::PI).floor().max(0.0) as usize
    }
}

fn prufer_jump(theta: f64, ratio: f64) -> f64 {
    if ratio == 1.0 {
        return theta;
    }
    let pi = std::f64::consts::PI;
    let r = theta.rem_euclid(pi);
    let base = theta - r;
    base + (ratio * r.sin()).atan2(r.cos())
}
