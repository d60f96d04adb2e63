use super::config::{CavityConfig, Geometry};
use crate::error::{Error, Result};
use crate::numerics::phase::Split;
use crate::numerics::roots::brent;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which part of the spectrum to compute. Frequencies in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Band {
    /// The lowest `n` modes.
    Count(usize),
    /// Modes with 1-based indices `first..=last`.
    Indices { first: usize, last: usize },
    /// All modes with `lo <= ω < hi`.
    Interval { lo: f64, hi: f64 },
    /// `count` consecutive modes centred on the one nearest `center`.
    Around { center: f64, count: usize },
}

/// A mode frequency with its 1-based index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub index: usize,
    pub omega: Split,
}

impl Root {
    pub fn value(&self) -> f64 {
        self.omega.value()
    }
}

pub fn dispersion_roots(config: &CavityConfig, q: f64, band: Band) -> Result<Vec<Root>> {
    let g = config.geometry(q)?;
    roots_in(&g, band)
}

/// Roots of the characteristic function in `g` for `band`.
pub fn roots_in(g: &Geometry, band: Band) -> Result<Vec<Root>> {
    let lopt = g.optical_length();
    match band {
        Band::Count(n) => {
            if n == 0 {
                return Err(Error::Domain("empty band".into()));
            }
            roots_in(g, Band::Indices { first: 1, last: n })
        }
        Band::Indices { first, last } => {
            if first == 0 || last < first {
                return Err(Error::Domain(format!("invalid index band {first}..={last}")));
            }
            let lo = ((first as f64 - 1.0) * PI / lopt).max(0.0);
            let hi = (last as f64 + 1.0) * PI / lopt;
            let all = scan(g, lo, hi)?;
            let out: Vec<Root> = all
                .into_iter()
                .filter(|r| r.index >= first && r.index <= last)
                .collect();
            if out.len() != last - first + 1 {
                return Err(Error::Numerical(format!(
                    "found {} of {} requested modes",
                    out.len(),
                    last - first + 1
                )));
            }
            Ok(out)
        }
        Band::Interval { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo || hi <= 0.0 {
                return Err(Error::Domain(format!("empty frequency interval [{lo}, {hi})")));
            }
            scan(g, lo.max(0.0), hi)
        }
        Band::Around { center, count } => {
            if count == 0 || !(center > 0.0) {
                return Err(Error::Domain("empty band".into()));
            }
            let below = g.count_below(center);
            // nearest mode index is `below` or `below + 1`
            let near = nearest_index(g, center, below)?;
            let first = (near as i64 - (count as i64 - 1) / 2).max(1) as usize;
            roots_in(
                g,
                Band::Indices {
                    first,
                    last: first + count - 1,
                },
            )
        }
    }
}

fn nearest_index(g: &Geometry, center: f64, below: usize) -> Result<usize> {
    let first = below.max(1);
    let rs = roots_in(g, Band::Indices { first, last: below + 1 })?;
    let best = rs
        .iter()
        .min_by(|a, b| {
            (a.value() - center)
                .abs()
                .partial_cmp(&(b.value() - center).abs())
                .unwrap()
        })
        .unwrap();
    Ok(best.index)
}

/// Scan step; small enough that no two modes share a cell in practice.
pub fn scan_step(g: &Geometry) -> f64 {
    PI / (4.0 * g.n * g.length)
}

fn scan(g: &Geometry, lo: f64, hi: f64) -> Result<Vec<Root>> {
    let step = scan_step(g);
    // Offset the interior grid by an irrational fraction of a step so that
    // grid points do not coincide with the exactly periodic roots of
    // uniform or empty cavities.
    let offset = 0.381_966_011_250_105 * step;
    let mut grid = vec![lo];
    let mut w = lo + offset;
    while w < hi {
        grid.push(w);
        w += step;
    }
    grid.push(hi);
    let mut out = Vec::new();
    let mut n0 = g.count_below(grid[0]);
    for pair in grid.windows(2) {
        let n1 = g.count_below(pair[1]);
        if n1 > n0 {
            isolate(g, pair[0], pair[1], n0, n1, 0, &mut out)?;
        }
        n0 = n1;
    }
    Ok(out)
}

fn isolate(g: &Geometry, lo: f64, hi: f64, nlo: usize, nhi: usize, depth: usize, out: &mut Vec<Root>) -> Result<()> {
    if nhi == nlo {
        return Ok(());
    }
    if nhi == nlo + 1 {
        let dlo = g.dispersion(Split::new(lo));
        let dhi = g.dispersion(Split::new(hi));
        if dlo == 0.0 || dhi == 0.0 || dlo.signum() != dhi.signum() {
            let w = refine(g, lo, hi)?;
            out.push(Root { index: nhi, omega: w });
            return Ok(());
        }
    }
    if depth > 80 || hi - lo <= 8.0 * f64::EPSILON * hi {
        if nhi == nlo + 1 {
            // the root sits on a cell edge to within rounding
            let w = if g.dispersion(Split::new(lo)).abs() < g.dispersion(Split::new(hi)).abs() {
                lo
            } else {
                hi
            };
            out.push(Root { index: nhi, omega: polish(g, w, hi - lo) });
            return Ok(());
        }
        return Err(Error::DegenerateBracket {
            lower: nlo + 1,
            upper: nhi,
            detail: format!("roots not separable on [{lo:e}, {hi:e}] after scan refinement"),
        });
    }
    let mid = 0.5 * (lo + hi);
    let nmid = g.count_below(mid);
    let nmid = nmid.clamp(nlo, nhi);
    isolate(g, lo, mid, nlo, nmid, depth + 1, out)?;
    isolate(g, mid, hi, nmid, nhi, depth + 1, out)
}

/// Brent to adjacent doubles, then Newton steps carried in split precision.
pub(crate) fn refine(g: &Geometry, lo: f64, hi: f64) -> Result<Split> {
    let w = brent(|x| g.dispersion(Split::new(x)), lo, hi, 0.0, 2.0 * f64::EPSILON, 300)?;
    Ok(polish(g, w, hi - lo))
}

pub(crate) fn polish(g: &Geometry, w0: f64, max_step: f64) -> Split {
    let mut w = Split::new(w0);
    for _ in 0..3 {
        let (d, s) = g.dispersion_with_slope(w);
        if s == 0.0 || d == 0.0 {
            break;
        }
        let dw = -d / s;
        if !dw.is_finite() || dw.abs() > max_step {
            break;
        }
        w = w.add(dw);
        if dw.abs() < 1e-33 * w.hi.abs() {
            break;
        }
    }
    w
}

/// Root of index `index` in `g`, searched first in a window around `guess`.
pub(crate) fn track_root(g: &Geometry, index: usize, guess: f64, half_width: f64) -> Result<Split> {
    let lo = guess - half_width;
    let hi = guess + half_width;
    if lo > 0.0 && g.count_below(lo) + 1 == index && g.count_below(hi) == index {
        let dlo = g.dispersion(Split::new(lo));
        let dhi = g.dispersion(Split::new(hi));
        if dlo.signum() != dhi.signum() {
            return refine(g, lo, hi);
        }
    }
    let r = roots_in(g, Band::Indices { first: index, last: index })?;
    Ok(r[0].omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cavity_roots() {
        let c = CavityConfig::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let r = dispersion_roots(&c, 0.5, Band::Count(3)).unwrap();
        for (i, root) in r.iter().enumerate() {
            assert_eq!(root.index, i + 1);
            let exact = (i + 1) as f64 * PI;
            assert!((root.value() - exact).abs() < 1e-14 * exact);
        }
    }

    #[test]
    fn filled_cavity_roots() {
        let c = CavityConfig::new(1.0, 1.0, 3.0, 0.5).unwrap();
        let r = dispersion_roots(&c, 0.5, Band::Count(5)).unwrap();
        for root in &r {
            let exact = root.index as f64 * PI / 2.0;
            assert!((root.value() - exact).abs() < 1e-13 * exact, "{root:?}");
        }
    }

    #[test]
    fn around_band_is_centred() {
        let c = CavityConfig::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let r = dispersion_roots(&c, 0.5, Band::Around { center: 10.0 * PI + 0.2, count: 5 }).unwrap();
        let idx: Vec<usize> = r.iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![8, 9, 10, 11, 12]);
    }
}
