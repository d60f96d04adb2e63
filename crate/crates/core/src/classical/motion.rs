use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// External potential V(q) on the membrane. Units follow the field: with
/// c = 1, energy per unit mirror area and mass per unit area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    Harmonic { mass: f64, omega: f64, center: f64 },
    Free { mass: f64 },
    /// V sampled on strictly increasing q, cubic-Hermite interpolated.
    Table { mass: f64, q: Vec<f64>, v: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match self {
            PotentialSpec::Harmonic { mass, omega, center } => {
                if !(*mass > 0.0 && *omega > 0.0 && center.is_finite()) {
                    return bad("harmonic potential needs mass > 0 and omega > 0");
                }
            }
            PotentialSpec::Free { mass } => {
                if !(*mass > 0.0) {
                    return bad("mass must be positive");
                }
            }
            PotentialSpec::Table { mass, q, v } => {
                if !(*mass > 0.0) {
                    return bad("mass must be positive");
                }
                if q.len() < 2 || q.len() != v.len() {
                    return bad("potential table needs at least two (q, V) pairs of equal length");
                }
                if q.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
                    return bad("potential table q must be strictly increasing and V finite");
                }
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        match self {
            PotentialSpec::Harmonic { mass, .. } | PotentialSpec::Free { mass } | PotentialSpec::Table { mass, .. } => *mass,
        }
    }

    /// (V, −dV/dq) at q.
    pub fn evaluate(&self, x: f64) -> (f64, f64) {
        match self {
            PotentialSpec::Harmonic { mass, omega, center } => {
                let k = mass * omega * omega;
                let u = x - center;
                (0.5 * k * u * u, -k * u)
            }
            PotentialSpec::Free { .. } => (0.0, 0.0),
            PotentialSpec::Table { q, v, .. } => hermite(q, v, x),
        }
    }
}

fn node_slope(q: &[f64], v: &[f64], i: usize) -> f64 {
    let n = q.len();
    if i == 0 {
        (v[1] - v[0]) / (q[1] - q[0])
    } else if i == n - 1 {
        (v[n - 1] - v[n - 2]) / (q[n - 1] - q[n - 2])
    } else {
        (v[i + 1] - v[i - 1]) / (q[i + 1] - q[i - 1])
    }
}

/// Cubic Hermite value and negative slope; linear continuation outside.
fn hermite(q: &[f64], v: &[f64], x: f64) -> (f64, f64) {
    let n = q.len();
    if x <= q[0] {
        let s = node_slope(q, v, 0);
        return (v[0] + s * (x - q[0]), -s);
    }
    if x >= q[n - 1] {
        let s = node_slope(q, v, n - 1);
        return (v[n - 1] + s * (x - q[n - 1]), -s);
    }
    let i = q.partition_point(|&p| p <= x) - 1;
    let h = q[i + 1] - q[i];
    let t = (x - q[i]) / h;
    let (m0, m1) = (node_slope(q, v, i) * h, node_slope(q, v, i + 1) * h);
    let (t2, t3) = (t * t, t * t * t);
    let val = (2.0 * t3 - 3.0 * t2 + 1.0) * v[i] + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * v[i + 1] + (t3 - t2) * m1;
    let der = ((6.0 * t2 - 6.0 * t) * v[i] + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * v[i + 1] + (3.0 * t2 - 2.0 * t) * m1) / h;
    (val, -der)
}

/// Membrane trajectory imposed from outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PrescribedMotion {
    /// q = center + amplitude·sin(omega·t + phase)
    Sinusoid { center: f64, amplitude: f64, omega: f64, phase: f64 },
    /// Smooth ramp from `from` to `to` over `duration`, at rest at both ends.
    Sweep { from: f64, to: f64, duration: f64 },
}

impl PrescribedMotion {
    /// (q, q̇, q̈) at time t.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            PrescribedMotion::Sinusoid { center, amplitude, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                (center + amplitude * s, amplitude * omega * c, -amplitude * omega * omega * s)
            }
            PrescribedMotion::Sweep { from, to, duration } => {
                let u = (t / duration).clamp(0.0, 1.0);
                let tau = 2.0 * std::f64::consts::PI;
                let span = to - from;
                if t <= 0.0 || t >= duration {
                    return (from + span * u, 0.0, 0.0);
                }
                let q = from + span * (u - (tau * u).sin() / tau);
                let v = span * (1.0 - (tau * u).cos()) / duration;
                let a = span * tau * (tau * u).sin() / (duration * duration);
                (q, v, a)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PrescribedMotion::Sinusoid { center, amplitude, omega, phase } => {
                center.is_finite() && amplitude.is_finite() && omega.is_finite() && phase.is_finite()
            }
            PrescribedMotion::Sweep { from, to, duration } => from.is_finite() && to.is_finite() && duration > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("invalid prescribed motion".into()))
        }
    }
}

/// How the membrane moves during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MembraneMotion {
    /// Held at the initial q (infinite-mass limit).
    Frozen,
    Prescribed(PrescribedMotion),
    /// Newtonian motion in the potential, driven by the radiation force.
    Dynamic(PotentialSpec),
}
