use mimcav::classical::*;
use mimcav::spectral::*;
use proptest::prelude::*;
use std::f64::consts::PI;

const DT: f64 = 5e-4;

/// Desk cavity: l = 1, a membrane too thin for the grid (χd = 0.03).
fn desk(q0: f64) -> CavityConfig {
    CavityConfig::new(1.0, 5e-4, 60.0, q0).unwrap()
}

fn grid() -> Grid {
    Grid::new(1.0, 1000).unwrap()
}

fn single_mode(cfg: &CavityConfig, q: f64, k: usize) -> ClassicalState {
    ClassicalState::from_modes(grid(), cfg, q, &[ModeExcitation { k, amplitude: 1.0, phase: 0.0 }]).unwrap()
}

#[test]
fn empty_field_leaves_a_harmonic_membrane() {
    let phys = desk(0.5);
    let (om, a) = (2.0, 3e-3);
    let mut st = ClassicalState::vacuum(grid(), 0.5 + a);
    st.q_dot = 0.0;
    let pot = PotentialSpec::Harmonic { mass: 1.0, omega: om, center: 0.5 };
    let opts = ClassicalOptions { sample_every: 50, ..Default::default() };
    let tr = evolve_classical(&phys, &st, &MembraneMotion::Dynamic(pot), 20.0, DT, &opts).unwrap();
    for s in &tr.samples {
        let expect = 0.5 + a * (om * s.t).cos();
        // Verlet phase error (Ωdt)²Ωt/24
        let bound = 2.0 * a * (om * DT).powi(2) * om * s.t / 24.0 + 1e-15;
        assert!((s.q - expect).abs() < bound, "t={} {} vs {expect}", s.t, s.q);
        assert_eq!(s.e_field, 0.0);
        assert_eq!(s.force, 0.0);
    }
    assert!(tr.final_state.a.iter().all(|&x| x == 0.0));
}

#[test]
fn frozen_mode_rings_at_its_eigenfrequency() {
    let phys = desk(0.5);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    for (q, k) in [(0.5, 9), (0.37, 6)] {
        let st = single_mode(&cfg, q, k);
        let opts = ClassicalOptions {
            probe_x: Some(0.3137),
            sample_every: 1000,
            ..Default::default()
        };
        let tr = evolve_classical(&phys, &st, &MembraneMotion::Frozen, 100.0, DT, &opts).unwrap();
        let peak = spectral_peak(&tr.probe, DT).unwrap();
        let w = mode_function(&cfg, q, k).unwrap().frequency();
        assert!((peak.omega - w).abs() <= peak.bin, "{} vs {w} (bin {})", peak.omega, peak.bin);
    }
}

#[test]
fn frozen_field_energy_is_conserved() {
    let phys = desk(0.41);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let st = ClassicalState::from_modes(
        grid(),
        &cfg,
        0.41,
        &[
            ModeExcitation { k: 7, amplitude: 1.0, phase: 0.3 },
            ModeExcitation { k: 8, amplitude: 0.5, phase: 1.1 },
        ],
    )
    .unwrap();
    let w = mode_function(&cfg, 0.41, 7).unwrap().frequency();
    let opts = ClassicalOptions {
        projection: Some((5, 6)),
        sample_every: 200,
        ..Default::default()
    };
    let tr = evolve_classical(&phys, &st, &MembraneMotion::Frozen, 100.0 * 2.0 * PI / w, DT, &opts).unwrap();
    assert!(tr.field_energy_drift() < 1e-4, "{}", tr.field_energy_drift());
    assert!(tr.projection_completeness() > 0.999, "{}", tr.projection_completeness());
}

#[test]
fn force_vanishes_for_empty_and_symmetric_fields() {
    let phys = desk(0.5);
    let g = grid();
    let cfg = grid_config(&phys, &g, true).unwrap();
    assert_eq!(radiation_force(&cfg, &g, &vec![0.0; g.nodes()], 0.5).unwrap(), 0.0);
    for k in [3, 8, 9] {
        let st = single_mode(&cfg, 0.5, k);
        let f = radiation_force(&cfg, &g, &st.a, 0.5).unwrap();
        let w = mode_function(&cfg, 0.5, k).unwrap().frequency();
        assert!(f.abs() < 1e-9 * w * w, "k={k}: {f}");
    }
}

#[test]
fn averaged_force_follows_the_adiabatic_law() {
    // ⟨F⟩ = −E ∂ω/∂q / ω for a field held in one mode
    let phys = desk(0.45);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    for (q, k) in [(0.4537, 9), (0.3, 5)] {
        let st = single_mode(&cfg, q, k);
        let opts = ClassicalOptions { sample_every: 10, ..Default::default() };
        let tr = evolve_classical(&phys, &st, &MembraneMotion::Frozen, 50.0, DT, &opts).unwrap();
        let favg = tr.samples.iter().map(|s| s.force).sum::<f64>() / tr.samples.len() as f64;
        let w = mode_function(&cfg, q, k).unwrap().frequency();
        let d = frequency_derivative(&cfg, q, k, 1).unwrap();
        let law = -tr.samples[0].e_field * d.value / w;
        assert!((favg - law).abs() < 0.05 * law.abs(), "{favg} vs {law}");
    }
}

#[test]
fn total_energy_is_conserved_with_a_dynamic_membrane() {
    let phys = desk(0.45);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let q = 0.4537;
    for (mass, om) in [(1e5, 1.0), (3e4, 2.0)] {
        let st = single_mode(&cfg, q + 1e-3, 9);
        let pot = PotentialSpec::Harmonic { mass, omega: om, center: q };
        let opts = ClassicalOptions { sample_every: 100, ..Default::default() };
        let tr = evolve_classical(&phys, &st, &MembraneMotion::Dynamic(pot), 20.0 * PI / om, DT, &opts).unwrap();
        assert!(tr.energy_drift() < 1e-3, "{}", tr.energy_drift());
        // the field really does trade energy with the membrane
        assert!(tr.field_energy_drift() > 10.0 * tr.energy_drift());
    }
}

#[test]
fn resonant_drive_transfers_energy_at_the_predicted_rate() {
    let phys = desk(0.5);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let (k, amp) = (9, 2e-3);
    let p = transfer_prediction(&cfg, 0.5, k, k + 1, amp).unwrap();
    let motion = MembraneMotion::Prescribed(PrescribedMotion::Sinusoid {
        center: 0.5,
        amplitude: amp,
        omega: p.drive,
        phase: 0.0,
    });
    let opts = ClassicalOptions {
        projection: Some((k - 1, 4)),
        sample_every: 100,
        ..Default::default()
    };
    let tr = evolve_classical(&phys, &single_mode(&cfg, 0.5, k), &motion, 1.6 * p.transfer_time, DT, &opts).unwrap();
    let (t, f) = first_transfer_maximum(&transfer_fraction(&tr, 1, 2)).unwrap();
    assert!(f > 0.95);
    assert!((t - p.transfer_time).abs() < 0.1 * p.transfer_time, "{t} vs {}", p.transfer_time);
    // q̈ term against the 2q̇ term: of order Ω/ω
    let ratio = tr.accel_velocity_ratio.unwrap() / (p.drive / p.omega1);
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "{ratio}");
}

#[test]
fn invariant_is_constant_without_motion() {
    let phys = desk(0.45);
    let spec = SweepSpec {
        k: 9,
        amplitude: 1.0,
        motion: PrescribedMotion::Sweep { from: 0.45, to: 0.45, duration: 10.0 },
        t_end: 10.0,
        dt: DT,
        sample_every: 200,
    };
    let r = adiabatic_invariant_probe(&phys, grid(), &spec, &ClassicalOptions::default()).unwrap();
    assert!(r.drift < 1e-3, "{}", r.drift);
    assert_eq!(r.adiabaticity, 0.0);
}

#[test]
fn slow_sweep_keeps_the_invariant() {
    let phys = desk(0.45);
    let spec = SweepSpec {
        k: 9,
        amplitude: 1.0,
        motion: PrescribedMotion::Sweep { from: 0.45, to: 0.47, duration: 100.0 },
        t_end: 100.0,
        dt: DT,
        sample_every: 200,
    };
    let r = adiabatic_invariant_probe(&phys, grid(), &spec, &ClassicalOptions::default()).unwrap();
    assert!(r.adiabaticity < 1e-2);
    assert!(r.drift < 0.01, "{}", r.drift);
    assert!(r.leaked < 0.01);
    // ω_k really changed over the sweep
    let last = r.invariant.len() - 1;
    let e = &r.mode_energies;
    assert!((e[last][1] / e[0][1] - 1.0).abs() > 10.0 * r.drift);
}

#[test]
fn resonant_oscillation_breaks_the_invariant() {
    let phys = desk(0.5);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let p = transfer_prediction(&cfg, 0.5, 9, 10, 2e-3).unwrap();
    let spec = SweepSpec {
        k: 9,
        amplitude: 1.0,
        motion: PrescribedMotion::Sinusoid { center: 0.5, amplitude: 2e-3, omega: p.drive, phase: 0.0 },
        t_end: p.transfer_time,
        dt: DT,
        sample_every: 200,
    };
    let r = adiabatic_invariant_probe(&phys, grid(), &spec, &ClassicalOptions::default()).unwrap();
    assert!(r.drift > 0.5);
    let up: Vec<f64> = r.mode_energies.iter().map(|e| e[2]).collect();
    assert!(up[up.len() - 1] > 100.0 * up[1].max(1e-12));
}

#[test]
fn configuration_errors_are_caught_before_stepping() {
    let phys = desk(0.5);
    let g = grid();
    let cfg = grid_config(&phys, &g, true).unwrap();
    let st = single_mode(&cfg, 0.5, 3);
    let o = ClassicalOptions::default();
    let cfl = evolve_classical(&phys, &st, &MembraneMotion::Frozen, 1.0, 0.6 * g.dx, &o);
    assert!(matches!(cfl, Err(mimcav::Error::Config(_))));
    let thin = ClassicalOptions { thin_slab: false, ..o };
    assert!(matches!(evolve_classical(&phys, &st, &MembraneMotion::Frozen, 1.0, DT, &thin), Err(mimcav::Error::Config(_))));
    let fast = MembraneMotion::Prescribed(PrescribedMotion::Sinusoid { center: 0.5, amplitude: 0.02, omega: 1.0, phase: 0.0 });
    assert!(matches!(evolve_classical(&phys, &st, &fast, 1.0, DT, &o), Err(mimcav::Error::Config(_))));
    // at rest initially, too fast a quarter period later
    let speeds_up = MembraneMotion::Prescribed(PrescribedMotion::Sinusoid { center: 0.5, amplitude: 0.02, omega: 1.0, phase: PI / 2.0 });
    assert!(matches!(evolve_classical(&phys, &st, &speeds_up, 2.0, DT, &o), Err(mimcav::Error::Precondition(_))));
    let bad_pot = MembraneMotion::Dynamic(PotentialSpec::Harmonic { mass: 1.0, omega: 0.0, center: 0.5 });
    assert!(evolve_classical(&phys, &st, &bad_pot, 1.0, DT, &o).is_err());
    let mut a = vec![0.0; g.nodes()];
    a[0] = 1.0;
    assert!(ClassicalState::new(g, a, vec![0.0; g.nodes()], 0.5, 0.0, 0.0).is_err());
}

#[test]
fn snapshot_roundtrip() {
    let phys = desk(0.5);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let mut st = single_mode(&cfg, 0.5, 4);
    st.q_dot = 1e-4;
    st.t = 3.25;
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &st).unwrap();
    assert_eq!(buf.len(), 8 + 8 + 8 * (4 + 2 * st.grid.nodes()));
    assert_eq!(read_snapshot(&mut buf.as_slice()).unwrap(), st);
    assert!(read_snapshot(&mut &buf[..20]).is_err());
}

#[test]
fn surrogate_spectrum_tracks_the_thin_slab() {
    let phys = desk(0.43);
    let cfg = grid_config(&phys, &grid(), true).unwrap();
    let a = modes(&phys, 0.43, Band::Count(12)).unwrap();
    let b = modes(&cfg, 0.43, Band::Count(12)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.frequency() - y.frequency()).abs() < 5e-3 * x.frequency());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn empty_field_stays_empty(amp in 0.0f64..3e-3, om in 0.5f64..4.0, phase in 0.0f64..6.3) {
        let phys = desk(0.5);
        let st = ClassicalState::vacuum(grid(), 0.5 + amp * phase.sin());
        let m = MembraneMotion::Prescribed(PrescribedMotion::Sinusoid { center: 0.5, amplitude: amp, omega: om, phase });
        let tr = evolve_classical(&phys, &st, &m, 2.0, DT, &ClassicalOptions::default()).unwrap();
        prop_assert!(tr.final_state.a.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cell_averaged_slab_keeps_chi_d(q in 0.2f64..0.8, cells in 200usize..2000) {
        let phys = desk(0.5);
        let g = Grid::new(1.0, cells).unwrap();
        let cfg = grid_config(&phys, &g, true).unwrap();
        let mut eps = vec![0.0; g.nodes()];
        permittivity(&cfg, &g, q, &mut eps);
        let s: f64 = eps.iter().map(|e| (e - 1.0) * g.dx).sum();
        prop_assert!((s - 0.03).abs() < 1e-13);
    }

    #[test]
    fn frozen_superpositions_conserve_energy(k in 1usize..12, amp in 0.1f64..2.0, phase in 0.0f64..6.3, q in 0.3f64..0.7) {
        let phys = desk(0.5);
        let cfg = grid_config(&phys, &grid(), true).unwrap();
        let st = ClassicalState::from_modes(grid(), &cfg, q, &[
            ModeExcitation { k, amplitude: amp, phase },
            ModeExcitation { k: k + 1, amplitude: 1.0, phase: 0.0 },
        ]).unwrap();
        let tr = evolve_classical(&phys, &st, &MembraneMotion::Frozen, 5.0, DT, &ClassicalOptions { sample_every: 500, ..Default::default() }).unwrap();
        prop_assert!(tr.field_energy_drift() < 1e-10);
    }
}
