use std::f64::consts::PI;

use mimcav::classical::{
    adiabatic_invariant_probe, evolve_classical, first_transfer_maximum, grid_config, spectral_peak, transfer_fraction,
    transfer_prediction, ClassicalOptions, ClassicalState, Grid, MembraneMotion, ModeExcitation, PrescribedMotion,
    SweepSpec, Trajectory,
};
use mimcav::couplings::{coupling_set, CouplingOptions};
use mimcav::effective::{linearized_hamiltonian_coeffs, two_mode_eta};
use mimcav::fock::{
    build_hamiltonian, compare_models, detuned_rabi, evolve_state, fit_rabi, number_state, photon_number,
    position_expectation, rwa_toggle_study, site_number, ComparisonSetup, EvolveOptions, FockBasis, FockModel,
    HamiltonianOptions, Propagator, Rwa, DEFAULT_MAX_DIM,
};
use mimcav::spectral::{frequency_derivative, mode_function};
use mimcav::units;

use crate::commands::{block_first, focus, partner};
use crate::config::{RunConfig, Scenario};
use crate::output::{Cell, Report, Table};
use crate::CliError;

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut header: Vec<String> = ["t", "q", "q_dot", "e_total", "e_mech"].iter().map(|s| s.to_string()).collect();
    header.extend(tr.mode_indices.iter().map(|k| format!("e_mode_{k}")));
    let mut t = Table {
        name: "trajectory".into(),
        header,
        rows: Vec::new(),
    };
    for s in &tr.samples {
        let mut row: Vec<Cell> = vec![s.t.into(), s.q.into(), s.q_dot.into(), s.e_total.into(), s.e_mech.into()];
        row.extend(s.mode_energies.iter().map(|&e| Cell::from(e)));
        t.push(row);
    }
    t
}

/// Projection window (k−1 .. k+1) clipped at the first mode.
fn neighbours(k: usize) -> (usize, usize) {
    let first = k.saturating_sub(1).max(1);
    (first, k + 2 - first)
}

pub fn classical(rc: &RunConfig, t_end: Option<f64>) -> Result<Report, CliError> {
    let phys = rc.classical_cavity()?;
    let grid = Grid::new(rc.classical_length_m, rc.classical_cells)?;
    let cfg = grid_config(&phys, &grid, true)?;
    let q0 = rc.classical_position_m;
    let k = rc.classical_mode;
    let dt = rc.classical_dt_natural_m;
    if k == 0 {
        return Err(CliError::Config("classical_mode starts at 1".into()));
    }
    let mut r = Report::default();
    r.note("scenario", rc.scenario);
    r.note("mode", k);
    r.note("dt_natural_m", dt);
    let excite = |k| ClassicalState::from_modes(grid, &cfg, q0, &[ModeExcitation { k, amplitude: 1.0, phase: 0.0 }]);
    match rc.scenario {
        Scenario::Static => {
            let t_end = t_end.unwrap_or(rc.classical_t_end_natural_m);
            let opts = ClassicalOptions {
                projection: Some(neighbours(k)),
                sample_every: rc.classical_sample_every,
                probe_x: Some(0.1234 * rc.classical_length_m),
                ..Default::default()
            };
            let tr = evolve_classical(&phys, &excite(k)?, &MembraneMotion::Frozen, t_end, dt, &opts)?;
            let peak = spectral_peak(&tr.probe, dt)?;
            let wk = mode_function(&cfg, q0, k)?.frequency();
            r.note("t_end_natural_m", t_end);
            r.note("energy_drift", tr.energy_drift());
            r.note("mode_omega_natural", wk);
            r.note("peak_omega_natural", peak.omega);
            r.note("fft_bin_natural", peak.bin);
            r.note("peak_within_one_bin", (peak.omega - wk).abs() <= peak.bin);
            r.tables.push(trajectory_table(&tr));
        }
        Scenario::TwoModeResonance => {
            let amp = rc.classical_amplitude_m;
            let p = transfer_prediction(&cfg, q0, k, k + 1, amp)?;
            let t_end = t_end.unwrap_or(1.6 * p.transfer_time);
            let motion = MembraneMotion::Prescribed(PrescribedMotion::Sinusoid {
                center: q0,
                amplitude: amp,
                omega: p.drive,
                phase: 0.0,
            });
            let pf = k.saturating_sub(1).max(1);
            let opts = ClassicalOptions {
                projection: Some((pf, k + 3 - pf)),
                sample_every: rc.classical_sample_every,
                ..Default::default()
            };
            let tr = evolve_classical(&phys, &excite(k)?, &motion, t_end, dt, &opts)?;
            let pos = k - pf;
            let frac = transfer_fraction(&tr, pos, pos + 1);
            r.note("t_end_natural_m", t_end);
            r.note("drive_omega_natural", p.drive);
            r.note("predicted_transfer_time_natural_m", p.transfer_time);
            match first_transfer_maximum(&frac) {
                Some((t, f)) => {
                    r.note("observed_transfer_time_natural_m", t);
                    r.note("observed_max_fraction", f);
                    r.note("transfer_time_rel_error", (t - p.transfer_time) / p.transfer_time);
                }
                None => r.note("observed_transfer_time_natural_m", "no transfer above one half"),
            }
            r.note("energy_drift", tr.energy_drift());
            let mut t = trajectory_table(&tr);
            t.header.push(format!("fraction_mode_{}", k + 1));
            for (row, (_, f)) in t.rows.iter_mut().zip(&frac) {
                row.push((*f).into());
            }
            r.tables.push(t);
        }
        Scenario::AdiabaticSweep => {
            let t_end = t_end.unwrap_or(rc.classical_t_end_natural_m);
            let spec = SweepSpec {
                k,
                amplitude: 1.0,
                motion: PrescribedMotion::Sweep {
                    from: q0,
                    to: rc.classical_sweep_to_m,
                    duration: t_end,
                },
                t_end,
                dt,
                sample_every: rc.classical_sample_every,
            };
            let p = adiabatic_invariant_probe(&phys, grid, &spec, &ClassicalOptions::default())?;
            let mut header: Vec<String> = ["t", "q", "invariant"].iter().map(|s| s.to_string()).collect();
            header.extend(p.indices.iter().map(|j| format!("e_mode_{j}")));
            let mut t = Table {
                name: "sweep".into(),
                header,
                rows: Vec::new(),
            };
            for i in 0..p.times.len() {
                let mut row: Vec<Cell> = vec![p.times[i].into(), p.positions[i].into(), p.invariant[i].into()];
                row.extend(p.mode_energies[i].iter().map(|&e| Cell::from(e)));
                t.push(row);
            }
            r.note("t_end_natural_m", t_end);
            r.note("invariant_drift", p.drift);
            r.note("leaked_fraction", p.leaked);
            r.note("adiabaticity", p.adiabaticity);
            r.tables.push(t);
        }
        s @ (Scenario::ModelComparison | Scenario::PairTerms) => {
            return Err(CliError::Config(format!("scenario {s:?} is quantum only")));
        }
    }
    Ok(r)
}

/// Above this dimension Krylov stepping beats a full diagonalisation.
const DENSE_CUTOVER: usize = 1000;

fn sample_times(t_end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
}

fn positive(t: f64) -> Result<f64, CliError> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(CliError::Config(format!("t_end must be positive, got {t}")))
    }
}

pub fn quantum(rc: &RunConfig, t_end: Option<f64>) -> Result<Report, CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let k = focus(rc)?;
    let om = rc.omega_mech_rad_s;
    let t_end = t_end.or((rc.quantum_t_end_s > 0.0).then_some(rc.quantum_t_end_s));
    let nc = rc.quantum_mech_cutoff;
    let mut r = Report::default();
    r.note("scenario", rc.scenario);
    r.note("k", k);
    r.note("position_m", q);
    match rc.scenario {
        Scenario::Static => {
            // one photon in mode k, membrane in its ground state
            let wk = units::omega_to_si(mode_function(&cav, q, k)?.frequency());
            let slope = units::slope_to_si(frequency_derivative(&cav, q, k, 1)?.value);
            let curv = frequency_derivative(&cav, q, k, 2)?.value * units::C;
            let model = FockModel::QuadraticSingleMode {
                omega_mech: om,
                mass: rc.mass_kg,
                omega_k: wk,
                slope,
                bracket: 0.5 * curv,
            };
            let basis = FockBasis::new(nc, vec![2], DEFAULT_MAX_DIM)?;
            let opts = HamiltonianOptions {
                frame: Some(wk),
                ..Default::default()
            };
            let h = build_hamiltonian(&model, &basis, &opts)?;
            let times = sample_times(positive(t_end.unwrap_or(10.0 * 2.0 * PI / om))?, rc.quantum_samples);
            let ev = evolve_state(&h, &number_state(&basis, &[0, 1])?, &times, &EvolveOptions::default())?;
            let mut t = Table::new("evolution", &["t_s", "photons", "phonons", "position_zp"]);
            for (ti, psi) in times.iter().zip(&ev.states) {
                t.push(vec![
                    (*ti).into(),
                    photon_number(&basis, psi).into(),
                    site_number(&basis, psi, 0).into(),
                    position_expectation(&basis, psi).into(),
                ]);
            }
            r.note("omega_k_rad_s", wk);
            r.note("slope_rad_s_per_m", slope);
            r.note("bracket_rad_s_per_m2", 0.5 * curv);
            note_evolution(&mut r, ev.norm_drift, ev.max_leakage, ev.leakage_flagged);
            r.tables.push(t);
        }
        Scenario::TwoModeResonance => {
            let p = partner(rc, k);
            let (lo, hi) = (k.min(p), k.max(p));
            let w_lo = mode_function(&cav, q, lo)?.frequency();
            let w_hi = mode_function(&cav, q, hi)?.frequency();
            let delta = rc.quantum_detuning_rad_s;
            // Ω = ω2 − ω1 + δ
            let omega = units::omega_to_si(w_hi - w_lo) + delta;
            if !(omega > 0.0 && delta.abs() < omega) {
                return Err(CliError::Config(format!("detuning {delta:e} leaves no resonant mechanical frequency")));
            }
            let m = two_mode_eta(&cav, q, lo, hi, rc.mass_kg, omega)?;
            // the exchange would sit below round-off of the diagonal energies
            if m.eta.abs() < 1e-12 * omega {
                return Err(CliError::Numerical(format!(
                    "eta = {:e} rad/s is below double precision against omega_mech = {omega:e} rad/s; lower mass_kg",
                    m.eta
                )));
            }
            let model = FockModel::TwoModeResonant {
                omega_mech: omega,
                omega1: m.omega1,
                omega2: m.omega2,
                eta: m.eta,
            };
            // photon number is conserved, so the spare layer stays empty
            let basis = FockBasis::new(nc, vec![2, 2], DEFAULT_MAX_DIM)?;
            // keeps b†a1†a2 (detuning δ), drops b a1†a2 (detuning −2Ω − δ)
            let opts = HamiltonianOptions {
                rwa: Rwa::Window(omega),
                frame: Some(m.omega1),
                ..Default::default()
            };
            let h = build_hamiltonian(&model, &basis, &opts)?;
            let (max, rate) = detuned_rabi(m.eta, delta);
            let period = PI / rate;
            let times = sample_times(positive(t_end.unwrap_or(2.5 * period))?, rc.quantum_samples);
            let ev = evolve_state(&h, &number_state(&basis, &[0, 0, 1])?, &times, &EvolveOptions::default())?;
            let lower: Vec<f64> = ev.states.iter().map(|x| site_number(&basis, x, 1)).collect();
            let mut t = Table::new("rabi", &["t_s", "p_lower", "p_upper", "phonons", "p_lower_closed_form"]);
            for (i, psi) in ev.states.iter().enumerate() {
                t.push(vec![
                    times[i].into(),
                    lower[i].into(),
                    site_number(&basis, psi, 2).into(),
                    site_number(&basis, psi, 0).into(),
                    (max * (rate * times[i]).sin().powi(2)).into(),
                ]);
            }
            r.note("k1", lo);
            r.note("k2", hi);
            r.note("omega_mech_rad_s", omega);
            r.note("detuning_rad_s", delta);
            r.note("eta_rad_s", m.eta);
            r.note("predicted_period_s", period);
            r.note("predicted_max_transfer", max);
            match fit_rabi(&times, &lower) {
                Ok(f) => {
                    r.note("fitted_period_s", f.period);
                    r.note("fitted_amplitude", f.amplitude);
                    r.note("period_rel_error", (f.period - period) / period);
                    r.note("fit_rms_residual", f.rms_residual);
                }
                Err(e) => r.note("fit", e.to_string()),
            }
            note_evolution(&mut r, ev.norm_drift, ev.max_leakage, ev.leakage_flagged);
            r.tables.push(t);
        }
        Scenario::ModelComparison => {
            let first = block_first(rc)?;
            let n = rc.mode_count;
            if !(first..first + n).contains(&k) {
                return Err(CliError::Config(format!("mode {k} is outside the block {first}..{}", first + n - 1)));
            }
            let coeffs = linearized_hamiltonian_coeffs(&cav, q, first, n, true)?;
            let p = (rc.partner_index > 0).then(|| partner(rc, k));
            if let Some(p) = p {
                if !(first..first + n).contains(&p) || p == k {
                    return Err(CliError::Config(format!("partner {p} is outside the block or equals k")));
                }
            }
            let dim = (nc + 1) * 3usize.saturating_pow(n as u32);
            let propagator = if dim <= DENSE_CUTOVER {
                Propagator::Dense
            } else {
                Propagator::default()
            };
            let times = sample_times(positive(t_end.unwrap_or(10.0 * 2.0 * PI / om))?, rc.quantum_samples);
            let setup = ComparisonSetup {
                coeffs,
                mode: k - first,
                partner: p.map(|p| p - first),
                omega_mech: om,
                mass: rc.mass_kg,
                phonons: 0,
                photons: 1,
                partner_photons: 0,
                vacuum_branch: true,
                mech_cutoff: nc,
                times: times.clone(),
                evolve: EvolveOptions {
                    propagator,
                    ..Default::default()
                },
            };
            let c = compare_models(&setup)?;
            let mut header = vec!["t_s", "fidelity_bare", "fidelity_shifted"];
            if c.fidelity_two_mode.is_some() {
                header.push("fidelity_two_mode");
            }
            header.extend(["photons", "position_zp"]);
            let mut t = Table::new("comparison", &header);
            for i in 0..times.len() {
                let mut row: Vec<Cell> = vec![times[i].into(), c.fidelity_bare[i].into(), c.fidelity_shifted[i].into()];
                if let Some(f) = &c.fidelity_two_mode {
                    row.push(f[i].into());
                }
                row.extend([c.photons_full[i].into(), c.position_full[i].into()]);
                t.push(row);
            }
            r.note("bare_bracket_rad_s_per_m2", c.bare_bracket);
            r.note("shifted_bracket_rad_s_per_m2", c.shifted_bracket);
            r.note("eta_rad_s", c.eta);
            r.note("dim_full", c.dim_full);
            r.note("min_fidelity_bare", c.fidelity_bare.iter().cloned().fold(1.0, f64::min));
            r.note("min_fidelity_shifted", c.fidelity_shifted.iter().cloned().fold(1.0, f64::min));
            r.note("max_leakage", c.max_leakage);
            r.note("leakage_flagged", c.leakage_flagged);
            r.tables.push(t);
        }
        Scenario::PairTerms => {
            let first = block_first(rc)?;
            let n = rc.mode_count;
            if !(first..first + n).contains(&k) {
                return Err(CliError::Config(format!("mode {k} is outside the block {first}..{}", first + n - 1)));
            }
            let set = coupling_set(&cav, rc.reference_position_m, q, first, n, CouplingOptions::default())?;
            let model = FockModel::TransformedStatic {
                omega_mech: om,
                omega: set.omega.clone(),
                xi_plus: set.xi_plus.clone(),
                xi_minus: set.xi_minus.clone(),
            };
            // the membrane does not enter these terms, so it keeps one level
            let basis = FockBasis::new(0, vec![2; n], DEFAULT_MAX_DIM)?;
            let mut occ = vec![0; n + 1];
            occ[k - first + 1] = 1;
            let wk = set.omega[k - first];
            let times = sample_times(positive(t_end.unwrap_or(20.0 * 2.0 * PI / wk))?, rc.quantum_samples);
            let rep = rwa_toggle_study(&model, &basis, &occ, &times, &HamiltonianOptions::default(), &EvolveOptions::default())?;
            let mut t = Table::new("pair_terms", &["t_s", "photons_with_pairs", "photons_without_pairs"]);
            for i in 0..times.len() {
                t.push(vec![times[i].into(), rep.photons_with[i].into(), rep.photons_without[i].into()]);
            }
            r.note("max_photon_delta", rep.max_photon_delta);
            r.note("perturbative_estimate", rep.perturbative_estimate);
            r.note("terms_dropped", rep.terms_dropped);
            r.tables.push(t);
        }
        Scenario::AdiabaticSweep => {
            return Err(CliError::Config("scenario adiabatic-sweep is classical only".into()));
        }
    }
    Ok(r)
}

fn note_evolution(r: &mut Report, drift: f64, leak: f64, flagged: bool) {
    r.note("norm_drift", drift);
    r.note("max_leakage", leak);
    r.note("leakage_flagged", flagged);
}
