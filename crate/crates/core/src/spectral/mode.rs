use super::config::{CavityConfig, Geometry};
use super::dispersion::{roots_in, Band, Root};
use crate::error::{Error, Result};
use crate::numerics::phase::Split;

/// `p·cos(k(x − anchor)) + s·sin(k(x − anchor))` on `[x0, x1]` with
/// dielectric constant `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub anchor: f64,
    pub k: Split,
    pub p: f64,
    pub s: f64,
    pub eps: f64,
}

impl Piece {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let (sn, cs) = self.k.phase(x - self.anchor).sin_cos();
        self.p * cs + self.s * sn
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        let (sn, cs) = self.k.phase(x - self.anchor).sin_cos();
        self.k.value() * (self.s * cs - self.p * sn)
    }

    /// The piece representing ∂ₓ of this one.
    pub fn derivative(&self) -> Piece {
        let k = self.k.value();
        Piece {
            p: k * self.s,
            s: -k * self.p,
            ..*self
        }
    }

    /// ∫ self·other dx over the common interval (no ε weight). Both pieces
    /// must share the anchor and bounds.
    pub fn product_integral(&self, o: &Piece) -> f64 {
        debug_assert_eq!(self.anchor, o.anchor);
        let u0 = self.x0 - self.anchor;
        let u1 = self.x1 - self.anchor;
        if u1 <= u0 {
            return 0.0;
        }
        let m = 0.5 * (u0 + u1);
        let h = 0.5 * (u1 - u0);
        let dk = self.k.diff(o.k);
        let sk = self.k.add_split(o.k);
        let (sd, cd) = (dk * m).sin_cos();
        let (ss, cs) = sk.phase(m).sin_cos();
        let sinc_d = sinc(dk * h);
        let sinc_s = sinc(sk.value() * h);
        let ic_d = 2.0 * h * cd * sinc_d;
        let is_d = 2.0 * h * sd * sinc_d;
        let ic_s = 2.0 * h * cs * sinc_s;
        let is_s = 2.0 * h * ss * sinc_s;
        let (p1, s1, p2, s2) = (self.p, self.s, o.p, o.s);
        0.5 * ((p1 * p2 + s1 * s2) * ic_d
            + (p1 * p2 - s1 * s2) * ic_s
            + (p1 * s2 + s1 * p2) * is_s
            + (s1 * p2 - p1 * s2) * is_d)
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// One instantaneous eigenmode: regions left of the slab, inside it, and
/// right of it. Normalised so that ∫ε φ² dx = 1, with φ′(0) > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityMode {
    pub index: usize,
    pub q: f64,
    pub omega: Split,
    pub pieces: [Piece; 3],
    pub length: f64,
}

/// Unnormalised-to-normalised coefficients of a mode at slab offset η,
/// with the slab piece expressed about the undisplaced interface `a`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coefficients {
    pub omega: Split,
    pub left: f64,
    pub slab_p: f64,
    pub slab_s: f64,
    pub right: f64,
}

impl Coefficients {
    pub fn as_vec(&self, omega0: Split) -> Vec<f64> {
        vec![self.omega.diff(omega0), self.left, self.slab_p, self.slab_s, self.right]
    }
}

pub(crate) fn coefficients(g: &Geometry, w: Split) -> Coefficients {
    let ph = g.phases(w);
    let n = g.n;
    let nw = w.scale(n);
    let (sa, ca) = ph.a.sin_cos();
    let (sd, cd) = ph.d.sin_cos();
    let (s3, c3) = ph.l3.sin_cos();
    // unit amplitude on the left
    let b1 = sa;
    let b2 = ca / n;
    let phib = b1 * cd + b2 * sd;
    let dphib = n * (b2 * cd - b1 * sd); // φ′(b)/ω
    let c = if s3.abs() >= c3.abs() { phib / s3 } else { -dphib / c3 };

    // ∫ε φ² with unit left amplitude, via the same piece integrals used for
    // overlaps so normalisation and orthogonality agree.
    let la = g.len_left();
    let ld = g.len_slab();
    let l3 = g.len_right();
    let left = Piece { x0: 0.0, x1: la, anchor: 0.0, k: w, p: 0.0, s: 1.0, eps: 1.0 };
    let slab = Piece { x0: 0.0, x1: ld, anchor: 0.0, k: nw, p: b1, s: b2, eps: n * n };
    let right = Piece { x0: -l3, x1: 0.0, anchor: 0.0, k: w, p: 0.0, s: -c, eps: 1.0 };
    let norm2 = left.product_integral(&left)
        + (1.0 + g.chi) * slab.product_integral(&slab)
        + right.product_integral(&right);
    let amp = 1.0 / norm2.sqrt();

    // express the slab piece about the undisplaced interface
    let theta = nw.value() * g.eta;
    let (st, ct) = theta.sin_cos();
    Coefficients {
        omega: w,
        left: amp,
        slab_p: amp * (b1 * ct - b2 * st),
        slab_s: amp * (b1 * st + b2 * ct),
        right: -amp * c,
    }
}

impl CavityMode {
    pub(crate) fn from_coefficients(index: usize, q: f64, g: &Geometry, c: &Coefficients) -> Self {
        debug_assert_eq!(g.eta, 0.0);
        let n = g.n;
        let eps_in = 1.0 + g.chi;
        let pieces = [
            Piece { x0: 0.0, x1: g.a, anchor: 0.0, k: c.omega, p: 0.0, s: c.left, eps: 1.0 },
            Piece { x0: g.a, x1: g.b, anchor: g.a, k: c.omega.scale(n), p: c.slab_p, s: c.slab_s, eps: eps_in },
            Piece { x0: g.b, x1: g.length, anchor: g.length, k: c.omega, p: 0.0, s: c.right, eps: 1.0 },
        ];
        CavityMode {
            index,
            q,
            omega: c.omega,
            pieces,
            length: g.length,
        }
    }

    pub fn build(g: &Geometry, q: f64, root: &Root) -> Self {
        let c = coefficients(g, root.omega);
        Self::from_coefficients(root.index, q, g, &c)
    }

    pub fn frequency(&self) -> f64 {
        self.omega.value()
    }

    pub fn slab_start(&self) -> f64 {
        self.pieces[1].x0
    }

    pub fn slab_end(&self) -> f64 {
        self.pieces[1].x1
    }

    /// Region index (0 left, 1 slab, 2 right) containing x.
    pub fn region(&self, x: f64) -> usize {
        if x < self.pieces[1].x0 {
            0
        } else if x < self.pieces[1].x1 {
            1
        } else {
            2
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces[self.region(x)].value(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.pieces[self.region(x)].slope(x)
    }

    /// φ″ + εω²φ evaluated from the closed form.
    pub fn ode_residual(&self, x: f64) -> f64 {
        let pc = &self.pieces[self.region(x)];
        let k = pc.k.value();
        let w = self.frequency();
        (pc.eps * w * w - k * k) * pc.value(x)
    }

    /// One-sided limits (left, right) of φ at an interface.
    pub fn limits_at(&self, interface: usize) -> (f64, f64) {
        let x = self.pieces[interface + 1].x0;
        (self.pieces[interface].value(x), self.pieces[interface + 1].value(x))
    }

    /// One-sided limits (left, right) of φ′ at an interface.
    pub fn slope_limits_at(&self, interface: usize) -> (f64, f64) {
        let x = self.pieces[interface + 1].x0;
        (self.pieces[interface].slope(x), self.pieces[interface + 1].slope(x))
    }

    /// Parity about the cavity centre: +1 even, −1 odd, 0 if neither
    /// (judged at the slab faces and two interior sample points).
    pub fn parity(&self) -> i32 {
        let l = self.length;
        let pts = [0.1234 * l, 0.3456 * l, self.slab_start()];
        let scale = self.max_abs_estimate();
        let mut even = true;
        let mut odd = true;
        for &x in &pts {
            let u = self.value(x);
            let v = self.value(l - x);
            if (u - v).abs() > 1e-6 * scale {
                even = false;
            }
            if (u + v).abs() > 1e-6 * scale {
                odd = false;
            }
        }
        match (even, odd) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        }
    }

    pub fn max_abs_estimate(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.p.hypot(p.s))
            .fold(0.0, f64::max)
    }
}

/// ∫ ε φ_k φ_j dx in closed form. Both modes must belong to the same q.
pub fn overlap(a: &CavityMode, b: &CavityMode) -> f64 {
    debug_assert_eq!(a.q, b.q);
    a.pieces
        .iter()
        .zip(&b.pieces)
        .map(|(p, o)| p.eps * p.product_integral(o))
        .sum()
}

/// ∫ over the slab only of φ_a′ φ_b, unweighted.
pub fn slab_slope_overlap(slope_of: &CavityMode, other: &CavityMode) -> f64 {
    slope_of.pieces[1].derivative().product_integral(&other.pieces[1])
}

pub fn mode_function(config: &CavityConfig, q: f64, k: usize) -> Result<CavityMode> {
    if k == 0 {
        return Err(Error::Domain("mode indices start at 1".into()));
    }
    let g = config.geometry(q)?;
    let r = roots_in(&g, Band::Indices { first: k, last: k })?;
    Ok(CavityMode::build(&g, q, &r[0]))
}

pub fn modes(config: &CavityConfig, q: f64, band: Band) -> Result<Vec<CavityMode>> {
    let g = config.geometry(q)?;
    let r = roots_in(&g, band)?;
    Ok(r.iter().map(|root| CavityMode::build(&g, q, root)).collect())
}

pub fn mode_overlap(config: &CavityConfig, q: f64, k: usize, j: usize) -> Result<f64> {
    let a = mode_function(config, q, k)?;
    let b = mode_function(config, q, j)?;
    Ok(overlap(&a, &b))
}
