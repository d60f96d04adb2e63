use serde::Serialize;

use super::grid::{grid_config, permittivity, slab_nodes, Grid};
use super::motion::MembraneMotion;
use crate::error::{Error, Result};
use crate::numerics::tridiag;
use crate::spectral::{modes, Band, CavityConfig, CavityMode};

/// Field on the grid plus the membrane coordinate. Units: c = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalState {
    pub grid: Grid,
    pub a: Vec<f64>,
    pub a_dot: Vec<f64>,
    pub q: f64,
    pub q_dot: f64,
    pub t: f64,
}

/// A(x, 0) = amplitude·φ_k(x)cos(phase), Ȧ = −amplitude·ω_k φ_k sin(phase);
/// the mode then carries energy ½ amplitude² ω_k².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeExcitation {
    pub k: usize,
    pub amplitude: f64,
    pub phase: f64,
}

impl ClassicalState {
    pub fn new(grid: Grid, a: Vec<f64>, a_dot: Vec<f64>, q: f64, q_dot: f64, t: f64) -> Result<Self> {
        let n = grid.nodes();
        if a.len() != n || a_dot.len() != n {
            return Err(Error::Config(format!("field arrays must have {n} nodes")));
        }
        if a[0] != 0.0 || a[n - 1] != 0.0 || a_dot[0] != 0.0 || a_dot[n - 1] != 0.0 {
            return Err(Error::Config("field must vanish at the mirrors".into()));
        }
        if a.iter().chain(&a_dot).any(|v| !v.is_finite()) || !(q.is_finite() && q_dot.is_finite() && t.is_finite()) {
            return Err(Error::Config("non-finite initial state".into()));
        }
        Ok(ClassicalState { grid, a, a_dot, q, q_dot, t })
    }

    pub fn vacuum(grid: Grid, q: f64) -> Self {
        let n = grid.nodes();
        ClassicalState {
            grid,
            a: vec![0.0; n],
            a_dot: vec![0.0; n],
            q,
            q_dot: 0.0,
            t: 0.0,
        }
    }

    /// Superposition of eigenmodes of `config` (the slab as the grid
    /// carries it) at membrane position q.
    pub fn from_modes(grid: Grid, config: &CavityConfig, q: f64, excitations: &[ModeExcitation]) -> Result<Self> {
        let mut s = ClassicalState::vacuum(grid, q);
        for ex in excitations {
            let m = crate::spectral::mode_function(config, q, ex.k)?;
            let (c, sn) = (ex.phase.cos(), ex.phase.sin());
            let w = m.frequency();
            for i in 1..grid.cells {
                let phi = m.value(grid.x(i));
                s.a[i] += ex.amplitude * phi * c;
                s.a_dot[i] -= ex.amplitude * w * phi * sn;
            }
        }
        Ok(s)
    }
}

/// Derivative at `s` of the parabola through three nodes.
fn parabola_slope(grid: &Grid, a: &[f64], i0: usize, s: f64) -> f64 {
    let x: [f64; 3] = [grid.x(i0), grid.x(i0 + 1), grid.x(i0 + 2)];
    let mut d = 0.0;
    for j in 0..3 {
        let (p, r) = ((j + 1) % 3, (j + 2) % 3);
        d += a[i0 + j] * ((s - x[p]) + (s - x[r])) / ((x[j] - x[p]) * (x[j] - x[r]));
    }
    d
}

/// First nodes whose cells lie wholly outside the slab, on either side.
fn face_stencils(grid: &Grid, config: &CavityConfig, q: f64) -> Result<(usize, usize)> {
    let h = 0.5 * config.slab_width;
    let (a, b) = (q - h, q + h);
    let left = (a / grid.dx - 0.5).floor();
    let right = (b / grid.dx + 0.5).ceil();
    if left < 2.0 || right + 2.0 > grid.cells as f64 {
        return Err(Error::Domain(format!("membrane at {q} is too close to a mirror for the grid")));
    }
    Ok((left as usize - 2, right as usize))
}

/// ½ χ/(1+χ) [(∂ₓA)²(q − d/2) − (∂ₓA)²(q + d/2)], with each face gradient
/// extrapolated from the vacuum side.
pub fn radiation_force(config: &CavityConfig, grid: &Grid, a: &[f64], q: f64) -> Result<f64> {
    let chi = config.effective_susceptibility();
    if chi == 0.0 {
        return Ok(0.0);
    }
    let (l0, r0) = face_stencils(grid, config, q)?;
    let h = 0.5 * config.slab_width;
    let ga = parabola_slope(grid, a, l0, q - h);
    let gb = parabola_slope(grid, a, r0, q + h);
    Ok(0.5 * chi / (1.0 + chi) * (ga * ga - gb * gb))
}

#[derive(Debug, Clone, Copy)]
pub struct ClassicalOptions {
    /// Replace an unresolved slab by one spread over four cells (χd fixed).
    pub thin_slab: bool,
    /// dt must not exceed cfl_safety · dx.
    pub cfl_safety: f64,
    /// Largest allowed |q̇| (in units of c).
    pub velocity_limit: f64,
    pub sample_every: usize,
    /// Modes (first, count) to project onto at every sample.
    pub projection: Option<(usize, usize)>,
    /// Record A at this position at every step.
    pub probe_x: Option<f64>,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        ClassicalOptions {
            thin_slab: true,
            cfl_safety: 0.5,
            velocity_limit: 0.01,
            sample_every: 100,
            projection: None,
            probe_x: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub q: f64,
    pub q_dot: f64,
    /// ∫ ½(εȦ² + (∂ₓA)²) dx
    pub e_field: f64,
    /// q̇ ∫ χ Ȧ ∂ₓA dx
    pub e_coupling: f64,
    /// ½ m q̇² + V(q); zero unless the membrane is dynamic
    pub e_mech: f64,
    pub e_total: f64,
    pub force: f64,
    pub mode_energies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// Slab actually carried by the grid.
    pub grid_config: CavityConfig,
    pub grid: Grid,
    pub dt: f64,
    pub steps: usize,
    pub samples: Vec<Sample>,
    pub mode_indices: Vec<usize>,
    /// A(probe_x) at every step.
    pub probe: Vec<f64>,
    /// RMS of the q̈ term over RMS of the 2q̇ term in the field equation.
    pub accel_velocity_ratio: Option<f64>,
    pub max_speed: f64,
    pub final_state: ClassicalState,
}

impl Trajectory {
    /// max |E_total(t) − E_total(0)| / E_total(0).
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.samples[0].e_total;
        self.samples.iter().map(|s| (s.e_total - e0).abs()).fold(0.0, f64::max) / e0.abs()
    }

    pub fn field_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].e_field;
        self.samples.iter().map(|s| (s.e_field - e0).abs()).fold(0.0, f64::max) / e0.abs()
    }

    /// Smallest Σ_k E_k / E_field over the samples.
    pub fn projection_completeness(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.mode_energies.iter().sum::<f64>() / s.e_field)
            .fold(f64::INFINITY, f64::min)
    }
}

struct ModeTable {
    q: f64,
    omega: Vec<f64>,
    /// ε_i φ_k(x_i) dx, row-major per mode
    weights: Vec<Vec<f64>>,
}

fn mode_table(config: &CavityConfig, grid: &Grid, eps: &[f64], q: f64, first: usize, count: usize) -> Result<ModeTable> {
    let ms: Vec<CavityMode> = modes(config, q, Band::Indices { first, last: first + count - 1 })?;
    Ok(ModeTable {
        q,
        omega: ms.iter().map(|m| m.frequency()).collect(),
        weights: ms
            .iter()
            .map(|m| (0..grid.nodes()).map(|i| eps[i] * m.value(grid.x(i)) * grid.dx).collect())
            .collect(),
    })
}

/// ½Σε((a1−a0)/dt)²dx + ½Σ(Δa1)(Δa0)/dx: the energy leapfrog conserves
/// exactly for fixed ε.
fn half_step_energy(eps: &[f64], a0: &[f64], a1: &[f64], dt: f64, dx: f64) -> f64 {
    let mut kin = 0.0;
    let mut pot = 0.0;
    for i in 0..a0.len() {
        let v = (a1[i] - a0[i]) / dt;
        kin += eps[i] * v * v;
        if i + 1 < a0.len() {
            pot += (a1[i + 1] - a1[i]) * (a0[i + 1] - a0[i]);
        }
    }
    0.5 * kin * dx + 0.5 * pot / dx
}

fn interpolate(grid: &Grid, a: &[f64], x: f64) -> f64 {
    let u = (x / grid.dx).clamp(0.0, grid.cells as f64);
    let i = (u.floor() as usize).min(grid.cells - 1);
    let f = u - i as f64;
    a[i] * (1.0 - f) + a[i + 1] * f
}

struct Stepper {
    grid: Grid,
    dt: f64,
    eps: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    /// A^{n+1} from A^{n−1}, A^n with membrane velocity v and acceleration acc
    /// at step n. The mixed term is centred in time, so nodes inside the
    /// slab are coupled through a tridiagonal solve.
    fn advance(&mut self, prev: &[f64], cur: &[f64], next: &mut [f64], v: f64, acc: f64) -> Result<()> {
        let n = self.grid.cells;
        let (dx, dt) = (self.grid.dx, self.dt);
        let (dt2, idx2) = (dt * dt, 1.0 / (dx * dx));
        for i in 1..n {
            let lap = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) * idx2;
            next[i] = 2.0 * cur[i] - prev[i] + dt2 * lap / self.eps[i];
        }
        next[0] = 0.0;
        next[n] = 0.0;
        if v == 0.0 && acc == 0.0 {
            return Ok(());
        }
        let Some((s, e)) = slab_nodes(&self.eps) else {
            return Ok(());
        };
        let (s, e) = (s.max(1), e.min(n - 1));
        let m = e - s + 1;
        self.lower.resize(m, 0.0);
        self.diag.resize(m, 0.0);
        self.upper.resize(m, 0.0);
        self.rhs.resize(m, 0.0);
        for r in 0..m {
            let i = s + r;
            let eps = self.eps[i];
            let chi = eps - 1.0;
            let c = chi * v / (2.0 * dx * dt);
            let lap = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) * idx2;
            let mut rhs = eps * (2.0 * cur[i] - prev[i]) / dt2 + lap + c * (prev[i + 1] - prev[i - 1])
                - chi * acc * (cur[i + 1] - cur[i - 1]) / (2.0 * dx);
            if r == 0 {
                rhs += c * next[i - 1];
            }
            if r == m - 1 {
                rhs -= c * next[i + 1];
            }
            self.lower[r] = -c;
            self.diag[r] = eps / dt2;
            self.upper[r] = c;
            self.rhs[r] = rhs;
        }
        if !tridiag::solve(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch) {
            return Err(Error::Numerical("singular slab system".into()));
        }
        next[s..=e].copy_from_slice(&self.rhs[..m]);
        Ok(())
    }
}

/// Co-integrate the field equation
/// ε∂²ₜA − ∂²ₓA + 2q̇χ∂ₓ∂ₜA + q̈χ∂ₓA = 0 with the membrane, from `state0`
/// to `t_end` in steps of `dt`.
pub fn evolve_classical(
    config: &CavityConfig,
    state0: &ClassicalState,
    motion: &MembraneMotion,
    t_end: f64,
    dt: f64,
    opts: &ClassicalOptions,
) -> Result<Trajectory> {
    let grid = state0.grid;
    let cfg = grid_config(config, &grid, opts.thin_slab)?;
    if !(dt > 0.0 && dt <= opts.cfl_safety * grid.dx) {
        return Err(Error::Config(format!(
            "time step {dt:e} violates the CFL bound {:e} (safety {} × dx)",
            opts.cfl_safety * grid.dx,
            opts.cfl_safety
        )));
    }
    if !(t_end > state0.t) {
        return Err(Error::Config("t_end must exceed the initial time".into()));
    }
    if opts.sample_every == 0 {
        return Err(Error::Config("sample_every must be positive".into()));
    }
    let n_nodes = grid.nodes();
    if state0.a.len() != n_nodes || state0.a_dot.len() != n_nodes {
        return Err(Error::Config("state does not match its grid".into()));
    }
    if let Some((first, count)) = opts.projection {
        if first == 0 || count == 0 {
            return Err(Error::Config("projection band must start at 1 and be non-empty".into()));
        }
    }
    match motion {
        MembraneMotion::Dynamic(p) => p.validate()?,
        MembraneMotion::Prescribed(p) => p.validate()?,
        MembraneMotion::Frozen => {}
    }

    let t0 = state0.t;
    let kinematics = |t: f64, q: f64, v: f64, acc: f64| -> (f64, f64, f64) {
        match motion {
            MembraneMotion::Frozen => (state0.q, 0.0, 0.0),
            MembraneMotion::Prescribed(p) => p.at(t - t0),
            MembraneMotion::Dynamic(_) => (q, v, acc),
        }
    };
    let check = |q: f64, v: f64| -> Result<()> {
        cfg.check_position(q)?;
        face_stencils(&grid, &cfg, q)?;
        if v.abs() > opts.velocity_limit {
            return Err(Error::Precondition(format!(
                "membrane speed {:.3e} c exceeds the non-relativistic limit {:.3e} c",
                v.abs(),
                opts.velocity_limit
            )));
        }
        Ok(())
    };
    let (mut q, mut v, mut acc) = kinematics(t0, state0.q, state0.q_dot, 0.0);
    if let MembraneMotion::Dynamic(_) = motion {
        if v.abs() > opts.velocity_limit {
            return Err(Error::Config(format!("initial membrane speed {v:e} exceeds the limit")));
        }
    }
    check(q, v).map_err(|e| if e.is_config() { e } else { Error::Config(e.to_string()) })?;

    let mut st = Stepper {
        grid,
        dt,
        eps: vec![1.0; n_nodes],
        lower: Vec::new(),
        diag: Vec::new(),
        upper: Vec::new(),
        rhs: Vec::new(),
        scratch: Vec::new(),
    };
    permittivity(&cfg, &grid, q, &mut st.eps);
    let mech = |q: f64, v: f64| -> (f64, f64) {
        match motion {
            MembraneMotion::Dynamic(p) => {
                let (pot, f) = p.evaluate(q);
                (0.5 * p.mass() * v * v + pot, f)
            }
            _ => (0.0, 0.0),
        }
    };
    let dynamic_acc = |a: &[f64], q: f64| -> Result<f64> {
        match motion {
            MembraneMotion::Dynamic(p) => Ok((radiation_force(&cfg, &grid, a, q)? + p.evaluate(q).1) / p.mass()),
            _ => Ok(0.0),
        }
    };
    if let MembraneMotion::Dynamic(_) = motion {
        acc = dynamic_acc(&state0.a, q)?;
    }

    // A^{-1} from a second-order Taylor step backwards
    let dx = grid.dx;
    let mut prev = vec![0.0; n_nodes];
    for i in 1..grid.cells {
        let lap = (state0.a[i + 1] - 2.0 * state0.a[i] + state0.a[i - 1]) / (dx * dx);
        let chi = st.eps[i] - 1.0;
        let mixed = 2.0 * chi * v * (state0.a_dot[i + 1] - state0.a_dot[i - 1]) / (2.0 * dx);
        let drive = chi * acc * (state0.a[i + 1] - state0.a[i - 1]) / (2.0 * dx);
        let a_ddot = (lap - mixed - drive) / st.eps[i];
        prev[i] = state0.a[i] - dt * state0.a_dot[i] + 0.5 * dt * dt * a_ddot;
    }
    let mut cur = state0.a.clone();
    let mut next = vec![0.0; n_nodes];

    let steps = ((t_end - t0) / dt).round().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps / opts.sample_every + 2);
    let mut probe = Vec::new();
    let mut table: Option<ModeTable> = None;
    let (mut s_acc, mut s_vel) = (0.0, 0.0);
    let mut max_speed = v.abs();
    let moving = !matches!(motion, MembraneMotion::Frozen);

    for n in 0..=steps {
        let t = t0 + n as f64 * dt;
        st.advance(&prev, &cur, &mut next, v, acc)?;
        if let Some(x) = opts.probe_x {
            probe.push(interpolate(&grid, &cur, x));
        }
        let slab = slab_nodes(&st.eps);
        if moving {
            if let Some((s, e)) = slab {
                for i in s.max(1)..=e.min(grid.cells - 1) {
                    let chi = st.eps[i] - 1.0;
                    let ta = chi * acc * (cur[i + 1] - cur[i - 1]) / (2.0 * dx);
                    let tv = 2.0 * chi * v * ((next[i + 1] - prev[i + 1]) - (next[i - 1] - prev[i - 1])) / (4.0 * dx * dt);
                    s_acc += ta * ta;
                    s_vel += tv * tv;
                }
            }
        }
        if n % opts.sample_every == 0 || n == steps {
            let e_field = 0.5 * (half_step_energy(&st.eps, &prev, &cur, dt, dx) + half_step_energy(&st.eps, &cur, &next, dt, dx));
            let mut cross = 0.0;
            if let Some((s, e)) = slab {
                for i in s.max(1)..=e.min(grid.cells - 1) {
                    let ad = (next[i] - prev[i]) / (2.0 * dt);
                    cross += (st.eps[i] - 1.0) * ad * (cur[i + 1] - cur[i - 1]) / (2.0 * dx) * dx;
                }
            }
            let e_coupling = v * cross;
            let (e_mech, _) = mech(q, v);
            let mut mode_energies = Vec::new();
            if let Some((first, count)) = opts.projection {
                if table.as_ref().is_none_or(|tb| tb.q != q) {
                    table = Some(mode_table(&cfg, &grid, &st.eps, q, first, count)?);
                }
                let tb = table.as_ref().unwrap();
                for (w, wt) in tb.omega.iter().zip(&tb.weights) {
                    let (mut amp, mut mom) = (0.0, 0.0);
                    for i in 0..n_nodes {
                        amp += wt[i] * cur[i];
                        mom += wt[i] * (next[i] - prev[i]);
                    }
                    mom /= 2.0 * dt;
                    mode_energies.push(0.5 * (mom * mom + w * w * amp * amp));
                }
            }
            samples.push(Sample {
                t,
                q,
                q_dot: v,
                e_field,
                e_coupling,
                e_mech,
                e_total: e_field + e_coupling + e_mech,
                force: radiation_force(&cfg, &grid, &cur, q)?,
                mode_energies,
            });
        }
        if n == steps {
            break;
        }
        // membrane to step n+1
        let t1 = t + dt;
        match motion {
            MembraneMotion::Dynamic(_) => {
                let v_half = v + 0.5 * dt * acc;
                q += dt * v_half;
                permittivity(&cfg, &grid, q, &mut st.eps);
                face_stencils(&grid, &cfg, q)?;
                acc = dynamic_acc(&next, q)?;
                v = v_half + 0.5 * dt * acc;
            }
            MembraneMotion::Prescribed(_) => {
                let k = kinematics(t1, q, v, acc);
                q = k.0;
                v = k.1;
                acc = k.2;
                permittivity(&cfg, &grid, q, &mut st.eps);
            }
            MembraneMotion::Frozen => {}
        }
        check(q, v)?;
        max_speed = max_speed.max(v.abs());
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }

    let mut a_dot = vec![0.0; n_nodes];
    for i in 1..grid.cells {
        a_dot[i] = (next[i] - prev[i]) / (2.0 * dt);
    }
    let t_final = t0 + steps as f64 * dt;
    Ok(Trajectory {
        grid_config: cfg,
        grid,
        dt,
        steps,
        mode_indices: opts
            .projection
            .map(|(f, c)| (f..f + c).collect())
            .unwrap_or_default(),
        samples,
        probe,
        accel_velocity_ratio: if moving && s_vel > 0.0 { Some((s_acc / s_vel).sqrt()) } else { None },
        max_speed,
        final_state: ClassicalState {
            grid,
            a: cur,
            a_dot,
            q,
            q_dot: v,
            t: t_final,
        },
    })
}
