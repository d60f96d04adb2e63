//! Gauss–Legendre rules and panel quadrature for vector-valued integrands.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate a scalar function over [a, b] with a single application.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(m + h * x);
        }
        s * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One interval split into `panels` equal panels.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub panels: usize,
}

/// Result of a panel quadrature.
#[derive(Debug, Clone)]
pub struct PanelResult {
    pub values: Vec<f64>,
    /// Max-norm difference between the last two refinement levels.
    pub abs_error: f64,
    pub nodes_used: usize,
    pub levels: usize,
}

const CHUNK: usize = 512;

/// Apply the rule once on every panel of every segment.
///
/// `f(segment, x, w, acc, scratch)` must add `w · integrand(x)` into `acc`;
/// `scratch` is a per-job buffer the integrand may reuse.
pub fn panel_sum<F>(segments: &[Segment], dim: usize, rule: &GaussLegendre, f: &F) -> Vec<f64>
where
    F: Fn(usize, f64, f64, &mut [f64], &mut Vec<f64>) + Sync,
{
    let mut jobs = Vec::new();
    for (si, s) in segments.iter().enumerate() {
        if s.b <= s.a || s.panels == 0 {
            continue;
        }
        let mut start = 0;
        while start < s.panels {
            let end = (start + CHUNK).min(s.panels);
            jobs.push((si, start, end));
            start = end;
        }
    }
    let partials: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(si, p0, p1)| {
            let s = segments[si];
            let width = (s.b - s.a) / s.panels as f64;
            let mut acc = vec![0.0; dim];
            let mut scratch = Vec::new();
            for p in p0..p1 {
                let lo = s.a + width * p as f64;
                let hi = if p + 1 == s.panels { s.b } else { lo + width };
                let m = 0.5 * (lo + hi);
                let h = 0.5 * (hi - lo);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    f(si, m + h * x, w * h, &mut acc, &mut scratch);
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; dim];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Panel quadrature with global panel doubling until two successive levels
/// agree to `max(rtol·‖S‖∞, atol)`.
pub fn integrate_panels<F>(
    segments: &[Segment],
    dim: usize,
    rule: &GaussLegendre,
    rtol: f64,
    atol: f64,
    max_levels: usize,
    f: F,
) -> Result<PanelResult>
where
    F: Fn(usize, f64, f64, &mut [f64], &mut Vec<f64>) + Sync,
{
    let mut segs: Vec<Segment> = segments.to_vec();
    let mut prev = panel_sum(&segs, dim, rule, &f);
    let mut nodes = count_nodes(&segs, rule);
    let mut err = f64::INFINITY;
    for level in 1..=max_levels {
        for s in segs.iter_mut() {
            s.panels *= 2;
        }
        let cur = panel_sum(&segs, dim, rule, &f);
        nodes += count_nodes(&segs, rule);
        err = prev
            .iter()
            .zip(&cur)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = super::max_abs(&cur);
        if err <= (rtol * scale).max(atol) {
            return Ok(PanelResult {
                values: cur,
                abs_error: err,
                nodes_used: nodes,
                levels: level + 1,
            });
        }
        prev = cur;
    }
    let scale = super::max_abs(&prev).max(f64::MIN_POSITIVE);
    Err(Error::Quadrature {
        achieved: err / scale,
        target: rtol,
    })
}

fn count_nodes(segs: &[Segment], rule: &GaussLegendre) -> usize {
    segs.iter().map(|s| s.panels * rule.order()).sum()
}

/// Globally adaptive scalar Gauss–Legendre quadrature by interval bisection.
pub fn adaptive_scalar<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    max_depth: usize,
) -> Result<f64> {
    let rule = GaussLegendre::new(10);
    let whole = rule.integrate(a, b, f);
    let (v, e) = bisect(f, &rule, a, b, whole, rtol, atol, max_depth);
    if e <= (rtol * v.abs()).max(atol) {
        Ok(v)
    } else {
        Err(Error::Quadrature {
            achieved: e / v.abs().max(f64::MIN_POSITIVE),
            target: rtol,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    rtol: f64,
    atol: f64,
    depth: usize,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let refined = left + right;
    let err = (refined - whole).abs();
    if depth == 0 || err <= (rtol * refined.abs()).max(atol) {
        return (refined, err);
    }
    let (l, el) = bisect(f, rule, a, m, left, rtol, atol * 0.5, depth - 1);
    let (r, er) = bisect(f, rule, m, b, right, rtol, atol * 0.5, depth - 1);
    (l + r, el + er)
}

/// Result of [`adaptive_vector`].
#[derive(Debug, Clone)]
pub struct VectorIntegral {
    pub values: Vec<f64>,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Locally adaptive Gauss–Legendre quadrature of a vector-valued, fallible
/// integrand. An interval is accepted when its two halves agree with the
/// whole to within its share of `max(rtol·‖I‖∞, atol)`.
pub fn adaptive_vector<F>(f: &mut F, a: f64, b: f64, rtol: f64, atol: f64, max_depth: usize) -> Result<VectorIntegral>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let rule = GaussLegendre::new(8);
    let mut evals = 0usize;
    let mut apply = |lo: f64, hi: f64, evals: &mut usize| -> Result<Vec<f64>> {
        let m = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut acc: Vec<f64> = Vec::new();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(m + h * x)?;
            *evals += 1;
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            for (o, vi) in acc.iter_mut().zip(&v) {
                *o += w * h * vi;
            }
        }
        Ok(acc)
    };
    if b == a {
        let v = f(a)?;
        return Ok(VectorIntegral { values: vec![0.0; v.len()], abs_error: 0.0, evaluations: 1 });
    }
    let whole = apply(a, b, &mut evals)?;
    let scale = super::max_abs(&whole);
    let total = (b - a).abs();
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut values = vec![0.0; stack[0].2.len()];
    let mut abs_error = 0.0;
    let mut failed = false;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let m = 0.5 * (lo + hi);
        let left = apply(lo, m, &mut evals)?;
        let right = apply(m, hi, &mut evals)?;
        let refined: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let err = refined.iter().zip(&est).fold(0.0_f64, |e, (r, w)| e.max((r - w).abs()));
        let share = (hi - lo).abs() / total;
        let tol = (rtol * scale.max(super::max_abs(&refined))).max(atol) * share;
        if err <= tol || depth >= max_depth {
            if err > tol {
                failed = true;
            }
            for (v, r) in values.iter_mut().zip(&refined) {
                *v += r;
            }
            abs_error += err;
        } else {
            stack.push((m, hi, right, depth + 1));
            stack.push((lo, m, left, depth + 1));
        }
    }
    let s = super::max_abs(&values);
    if failed && abs_error > (rtol * s).max(atol) {
        return Err(Error::Quadrature {
            achieved: abs_error / s.max(f64::MIN_POSITIVE),
            target: rtol,
        });
    }
    Ok(VectorIntegral { values, abs_error, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let r = GaussLegendre::new(8);
        let v = r.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let ws: f64 = r.weights.iter().sum();
        assert!((ws - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_centre_node() {
        let r = GaussLegendre::new(5);
        assert_eq!(r.nodes[2], 0.0);
        assert!((r.weights[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn panels_converge_on_oscillatory_vector() {
        let rule = GaussLegendre::new(16);
        let segs = [Segment { a: 0.0, b: 10.0, panels: 4 }];
        let res = integrate_panels(&segs, 2, &rule, 1e-12, 0.0, 10, |_, x, w, acc, _| {
            acc[0] += w * (20.0 * x).cos();
            acc[1] += w * x * (20.0 * x).sin();
        })
        .unwrap();
        let exact0 = (200.0f64).sin() / 20.0;
        let exact1 = (200.0f64).sin() / 400.0 - 10.0 * (200.0f64).cos() / 20.0;
        assert!((res.values[0] - exact0).abs() < 1e-12);
        assert!((res.values[1] - exact1).abs() < 1e-11);
    }

    #[test]
    fn adaptive_scalar_handles_kink() {
        let v = adaptive_scalar(&|x: f64| x.abs(), -1.0, 2.0, 1e-12, 1e-14, 40).unwrap();
        assert!((v - 2.5).abs() < 1e-11);
    }

    #[test]
    fn adaptive_vector_resolves_a_narrow_peak() {
        let mut f = |x: f64| -> Result<Vec<f64>> { Ok(vec![1e-3 / (x * x + 1e-6), x.cos()]) };
        let r = adaptive_vector(&mut f, -1.0, 1.0, 1e-11, 0.0, 60).unwrap();
        let exact = 2.0 * (1e3f64).atan();
        assert!((r.values[0] - exact).abs() < 1e-9);
        assert!((r.values[1] - 2.0 * 1f64.sin()).abs() < 1e-12);
    }
}
