use mimcav::effective::{linearized_hamiltonian_coeffs, LinearizedCoeffs};
use mimcav::fock::*;
use mimcav::spectral::CavityConfig;
use mimcav::units;
use mimcav::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Mass giving a zero-point amplitude of 1 m at mechanical frequency Ω.
fn unit_zp_mass(omega_mech: f64) -> f64 {
    units::HBAR / (2.0 * omega_mech)
}

fn no_pairs() -> HamiltonianOptions {
    HamiltonianOptions {
        pair_terms: false,
        ..Default::default()
    }
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values.iter().map(|v| (v - x).abs()).fold(f64::INFINITY, f64::min)
}

fn population(basis: &FockBasis, psi: &[Complex64], occ: &[usize]) -> f64 {
    psi[basis.index(occ).unwrap()].norm_sqr()
}

fn two_mode(omega_mech: f64, eta: f64) -> FockModel {
    FockModel::TwoModeResonant {
        omega_mech,
        omega1: 10.0,
        omega2: 13.0,
        eta,
    }
}

fn rwa(window: f64) -> HamiltonianOptions {
    HamiltonianOptions {
        rwa: Rwa::Window(window),
        frame: Some(10.0),
        ..Default::default()
    }
}

#[test]
fn uncoupled_two_mode_hamiltonian_is_diagonal() {
    let basis = FockBasis::new(3, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, 0.0), &basis, &HamiltonianOptions::default()).unwrap();
    let m = h.matrix.to_dense();
    for i in 0..basis.dim() {
        let o = basis.occupations(i);
        let e = 3.0 * (o[0] as f64 + 0.5) + 10.0 * o[1] as f64 + 13.0 * o[2] as f64;
        assert!((m[(i, i)] - e).abs() < 1e-12);
        for j in (0..basis.dim()).filter(|&j| j != i) {
            assert_eq!(m[(i, j)], 0.0);
        }
    }
}

#[test]
fn single_mode_linear_coupling_gives_displaced_oscillators() {
    // Ω(j+½) + nω − (ω′ x_zp n)²/Ω in each photon-number sector
    let (om, w, slope) = (1.0, 10.0, 0.6);
    let model = FockModel::LinearizedMultimode {
        omega_mech: om,
        mass: unit_zp_mass(om),
        omega: vec![w],
        force: DMatrix::from_element(1, 1, 0.5 * slope),
        quadratic: None,
    };
    let basis = FockBasis::new(40, vec![2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&model, &basis, &no_pairs()).unwrap();
    let ev: Vec<f64> = dense_spectrum(&h).unwrap().eigenvalues.iter().copied().collect();
    for n in 0..=2 {
        for j in 0..5 {
            let e = om * (j as f64 + 0.5) + n as f64 * w - (slope * n as f64).powi(2) / om;
            assert!(nearest(&ev, e) < 1e-9, "n={n} j={j}");
        }
    }
}

#[test]
fn displaced_oscillator_mean_position() {
    // ⟨b + b†⟩ = −2α(1 − cos Ωt) with α = ω′ x_zp n / Ω
    let (om, slope) = (1.0, 0.3);
    let model = FockModel::LinearizedMultimode {
        omega_mech: om,
        mass: unit_zp_mass(om),
        omega: vec![10.0],
        force: DMatrix::from_element(1, 1, 0.5 * slope),
        quadratic: None,
    };
    let basis = FockBasis::new(30, vec![3], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&model, &basis, &HamiltonianOptions { frame: Some(10.0), ..no_pairs() }).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.4).collect();
    let ev = evolve_state(&h, &number_state(&basis, &[0, 2]).unwrap(), &times, &EvolveOptions::default()).unwrap();
    let alpha = slope * 2.0 / om;
    for (t, psi) in times.iter().zip(&ev.states) {
        let x = position_expectation(&basis, psi);
        assert!((x + 2.0 * alpha * (1.0 - (om * t).cos())).abs() < 1e-9, "t={t}: {x}");
    }
    assert!(!ev.leakage_flagged);
}

#[test]
fn quadratic_coupling_stiffens_the_membrane() {
    // Ω′² = Ω² + 2ħnB/m; levels nω + Ω′(j+½)
    let (om, w, bracket) = (1.0, 10.0, 0.3);
    let mass = unit_zp_mass(om);
    let model = FockModel::QuadraticSingleMode {
        omega_mech: om,
        mass,
        omega_k: w,
        slope: 0.0,
        bracket,
    };
    let basis = FockBasis::new(60, vec![2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&model, &basis, &HamiltonianOptions::default()).unwrap();
    let ev: Vec<f64> = dense_spectrum(&h).unwrap().eigenvalues.iter().copied().collect();
    for n in 0..=2 {
        let om2 = (om * om + 2.0 * units::HBAR * n as f64 * bracket / mass).sqrt();
        for j in 0..4 {
            let e = n as f64 * w + om2 * (j as f64 + 0.5);
            assert!(nearest(&ev, e) < 1e-8, "n={n} j={j}");
        }
    }
}

#[test]
fn resonant_exchange_follows_sin_squared() {
    let eta = 0.01;
    let basis = FockBasis::new(3, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, eta), &basis, &rwa(0.5)).unwrap();
    assert!(h.terms_dropped > 0);
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 2.0 * PI / eta / 400.0).collect();
    let ev = evolve_state(&h, &number_state(&basis, &[0, 0, 1]).unwrap(), &times, &EvolveOptions::default()).unwrap();
    let p: Vec<f64> = ev.states.iter().map(|s| population(&basis, s, &[1, 1, 0])).collect();
    for (t, pt) in times.iter().zip(&p) {
        assert!((pt - (eta * t).sin().powi(2)).abs() < 1e-6);
    }
    let fit = fit_rabi(&times, &p).unwrap();
    assert!((fit.period - PI / eta).abs() < 1e-4 * PI / eta);
    assert!((fit.amplitude - 1.0).abs() < 1e-6);
}

#[test]
fn counter_rotating_terms_barely_move_the_exchange() {
    let eta = 0.01;
    let basis = FockBasis::new(6, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, eta), &basis, &HamiltonianOptions { frame: Some(10.0), ..Default::default() }).unwrap();
    assert_eq!(h.terms_dropped, 0);
    let times: Vec<f64> = (0..=50).map(|i| i as f64 * PI / eta / 50.0).collect();
    let ev = evolve_state(&h, &number_state(&basis, &[0, 0, 1]).unwrap(), &times, &EvolveOptions::default()).unwrap();
    let p: Vec<f64> = ev.states.iter().map(|s| population(&basis, s, &[1, 1, 0])).collect();
    let fit = fit_rabi(&times, &p).unwrap();
    // Bloch–Siegert-type corrections scale as (η/2Ω)²
    assert!((fit.rate - eta).abs() < 1e-3 * eta);
    assert!(fit.amplitude > 0.999);
}

#[test]
fn detuned_exchange_peaks_below_one() {
    let (eta, delta) = (0.01, 0.012);
    let model = FockModel::TwoModeResonant {
        omega_mech: 3.0 + delta,
        omega1: 10.0,
        omega2: 13.0,
        eta,
    };
    let basis = FockBasis::new(3, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&model, &basis, &rwa(0.5)).unwrap();
    let (pmax, rate) = detuned_rabi(eta, delta);
    let t = PI / (2.0 * rate);
    let ev = evolve_state(&h, &number_state(&basis, &[0, 0, 1]).unwrap(), &[t], &EvolveOptions::default()).unwrap();
    let p = population(&basis, &ev.states[0], &[1, 1, 0]);
    assert!((p - pmax).abs() < 1e-4, "{p} vs {pmax}");
    assert!((pmax - eta * eta / (eta * eta + delta * delta / 4.0)).abs() < 1e-15);
}

#[test]
fn excitation_numbers_are_conserved_under_rwa() {
    let basis = FockBasis::new(4, vec![3, 3], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, 0.05), &basis, &rwa(0.5)).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| i as f64 * 30.0).collect();
    let psi0 = number_state(&basis, &[1, 0, 2]).unwrap();
    let ev = evolve_state(&h, &psi0, &times, &EvolveOptions::default()).unwrap();
    for s in &ev.states {
        assert!((photon_number(&basis, s) - 2.0).abs() < 1e-10);
        // b†a1†a2 moves n_b and n_1 together
        let nb_minus_n1 = site_number(&basis, s, 0) - site_number(&basis, s, 1);
        assert!((nb_minus_n1 - 1.0).abs() < 1e-10);
    }
    assert!(ev.norm_drift < 1e-10);
}

/// Symmetric toy cavity (length 1 m) with a block of four modes.
fn toy_block(chi: f64, first: usize) -> LinearizedCoeffs {
    let c = CavityConfig::new(1.0, 0.05, chi, 0.5).unwrap();
    linearized_hamiltonian_coeffs(&c, 0.5, first, 4, true).unwrap()
}

fn full_model(lin: &LinearizedCoeffs, omega_mech: f64, mass: f64) -> FockModel {
    FockModel::LinearizedMultimode {
        omega_mech,
        mass,
        omega: lin.omega.clone(),
        force: lin.force.clone(),
        quadratic: Some(lin.curvature.clone().unwrap()),
    }
}

#[test]
fn multimode_photon_number_is_conserved_without_pair_terms() {
    let lin = toy_block(3.0, 4);
    let om = 1e8;
    let mass = units::HBAR / (2.0 * om * 1e-8);
    let basis = FockBasis::new(5, vec![2; 4], DEFAULT_MAX_DIM).unwrap();
    let opts = HamiltonianOptions {
        frame: Some(lin.omega[1]),
        ..no_pairs()
    };
    let h = build_hamiltonian(&full_model(&lin, om, mass), &basis, &opts).unwrap();
    let times: Vec<f64> = (1..=5).map(|i| i as f64 * 1e-7).collect();
    let ev = evolve_state(&h, &number_state(&basis, &[1, 0, 1, 0, 0]).unwrap(), &times, &EvolveOptions::default()).unwrap();
    for s in &ev.states {
        assert!((photon_number(&basis, s) - 1.0).abs() < 1e-10);
    }
    assert!(ev.norm_drift < 1e-10);
}

#[test]
fn hamiltonians_are_hermitian() {
    let lin = toy_block(3.0, 4);
    let om = 1e8;
    let mass = units::HBAR / (2.0 * om * 1e-8);
    let cases = [
        (full_model(&lin, om, mass), FockBasis::new(3, vec![2; 4], DEFAULT_MAX_DIM).unwrap()),
        (two_mode(3.0, 0.2), FockBasis::new(4, vec![3, 3], DEFAULT_MAX_DIM).unwrap()),
        (
            FockModel::QuadraticSingleMode {
                omega_mech: 1.0,
                mass: unit_zp_mass(1.0),
                omega_k: 10.0,
                slope: 0.4,
                bracket: 0.2,
            },
            FockBasis::new(8, vec![3], DEFAULT_MAX_DIM).unwrap(),
        ),
    ];
    for (m, b) in &cases {
        let h = build_hamiltonian(m, b, &HamiltonianOptions::default()).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12 * h.matrix.norm_bound(), "{:?}", h.model);
    }
}

#[test]
fn krylov_and_dense_propagators_agree() {
    let lin = toy_block(3.0, 4);
    let om = 1e8;
    let mass = units::HBAR / (2.0 * om * 1e-8);
    let basis = FockBasis::new(3, vec![2; 4], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&full_model(&lin, om, mass), &basis, &HamiltonianOptions::default()).unwrap();
    let psi0 = number_state(&basis, &[0, 0, 1, 0, 0]).unwrap();
    let times = [2e-9, 5e-9, 1e-8];
    let a = evolve_state(&h, &psi0, &times, &EvolveOptions::default()).unwrap();
    let b = evolve_state(
        &h,
        &psi0,
        &times,
        &EvolveOptions {
            propagator: Propagator::Dense,
            ..Default::default()
        },
    )
    .unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        let d = x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(d < 1e-8, "{d}");
    }
    assert!(a.matvecs > 0);
}

#[test]
fn exchange_is_converged_in_the_mechanical_cutoff() {
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 10.0).collect();
    let run = |cut: usize| {
        let basis = FockBasis::new(cut, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&two_mode(3.0, 0.01), &basis, &HamiltonianOptions { frame: Some(10.0), ..Default::default() }).unwrap();
        let ev = evolve_state(&h, &number_state(&basis, &[0, 0, 1]).unwrap(), &times, &EvolveOptions::default()).unwrap();
        ev.states.iter().map(|s| population(&basis, s, &[1, 1, 0])).collect::<Vec<_>>()
    };
    let (a, b) = (run(6), run(10));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn leakage_into_the_top_layer_is_flagged() {
    let model = FockModel::LinearizedMultimode {
        omega_mech: 1.0,
        mass: unit_zp_mass(1.0),
        omega: vec![10.0],
        force: DMatrix::from_element(1, 1, 0.15),
        quadratic: None,
    };
    let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
    let run = |cut: usize| {
        let basis = FockBasis::new(cut, vec![2], DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&model, &basis, &HamiltonianOptions { frame: Some(10.0), ..no_pairs() }).unwrap();
        evolve_state(&h, &number_state(&basis, &[0, 1]).unwrap(), &times, &EvolveOptions::default()).unwrap()
    };
    assert!(run(3).leakage_flagged);
    let ok = run(30);
    assert!(!ok.leakage_flagged);
    assert!(ok.max_leakage < 1e-8);
}

#[test]
fn models_coincide_without_a_membrane() {
    let lin = toy_block(0.0, 4);
    let om = 1e6;
    let times: Vec<f64> = (0..=4).map(|i| i as f64 * 10.0 / om).collect();
    let r = compare_models(&ComparisonSetup {
        coeffs: lin,
        mode: 1,
        partner: Some(2),
        omega_mech: om,
        mass: 1e-30,
        phonons: 1,
        photons: 1,
        partner_photons: 0,
        vacuum_branch: true,
        mech_cutoff: 4,
        times,
        evolve: EvolveOptions {
            propagator: Propagator::Dense,
            ..Default::default()
        },
    })
    .unwrap();
    for f in r.fidelity_bare.iter().chain(&r.fidelity_shifted).chain(r.fidelity_two_mode.as_ref().unwrap()) {
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }
}

#[test]
fn adiabatic_regime_prefers_the_shifted_bracket() {
    // Ω far below every neighbour gap; x_zp chosen so that ½ω″x_zp² = 0.1Ω
    let lin = toy_block(3.0, 4);
    let (k, om) = (1, 1e6);
    let zp2 = 0.1 * om / (0.5 * lin.curvature.as_ref().unwrap()[k]).abs();
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 5.0 / om).collect();
    let r = compare_models(&ComparisonSetup {
        coeffs: lin,
        mode: k,
        partner: None,
        omega_mech: om,
        mass: units::HBAR / (2.0 * om * zp2),
        phonons: 0,
        photons: 1,
        partner_photons: 0,
        vacuum_branch: true,
        mech_cutoff: 8,
        times,
        evolve: EvolveOptions {
            propagator: Propagator::Dense,
            leakage_limit: 1e-6,
        },
    })
    .unwrap();
    assert!(!r.leakage_flagged);
    let last = r.times.len() - 1;
    assert!(r.fidelity_shifted.iter().all(|&f| f > 0.999));
    assert!(r.fidelity_bare[last] < r.fidelity_shifted[last] - 0.05);
    assert!(r.photons_full.iter().all(|&n| (n - 0.5).abs() < 1e-10));
}

#[test]
fn resonant_regime_is_captured_by_the_two_mode_model() {
    // the doublet at positions 2 and 3, Ω tuned to its splitting, η = 10⁻³Ω
    let lin = toy_block(3.0, 4);
    let (k, p) = (2, 3);
    let om = lin.omega[p] - lin.omega[k];
    let h = (lin.force[(k, p)] + lin.force[(p, k)]).abs();
    let zp = 1e-3 * om / h;
    let eta = zp * h;
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2 * PI / eta).collect();
    let r = compare_models(&ComparisonSetup {
        coeffs: lin,
        mode: k,
        partner: Some(p),
        omega_mech: om,
        mass: units::HBAR / (2.0 * om * zp * zp),
        phonons: 0,
        photons: 0,
        partner_photons: 1,
        vacuum_branch: false,
        mech_cutoff: 4,
        times,
        evolve: EvolveOptions::default(),
    })
    .unwrap();
    assert!((r.eta.unwrap().abs() - eta).abs() < 1e-12 * eta);
    assert!(r.fidelity_two_mode.unwrap().iter().all(|&f| f > 0.99));
    assert!(!r.leakage_flagged);
}

fn static_model(xi_minus: f64) -> FockModel {
    let mut xp = DMatrix::zeros(2, 2);
    xp[(0, 1)] = 0.05;
    xp[(1, 0)] = 0.05;
    xp[(0, 0)] = 0.02;
    let mut xm = DMatrix::zeros(2, 2);
    xm[(0, 1)] = xi_minus;
    xm[(1, 0)] = xi_minus;
    FockModel::TransformedStatic {
        omega_mech: 1.0,
        omega: vec![10.0, 13.0],
        xi_plus: xp,
        xi_minus: xm,
    }
}

fn toggle_times() -> Vec<f64> {
    (0..=400).map(|i| i as f64 * 0.01).collect()
}

#[test]
fn toggling_absent_pair_terms_changes_nothing() {
    let basis = FockBasis::new(1, vec![3, 3], DEFAULT_MAX_DIM).unwrap();
    let r = rwa_toggle_study(
        &static_model(0.0),
        &basis,
        &[0, 1, 0],
        &toggle_times(),
        &HamiltonianOptions::default(),
        &EvolveOptions::default(),
    )
    .unwrap();
    assert_eq!(r.max_photon_delta, 0.0);
    assert_eq!(r.perturbative_estimate, 0.0);
    assert_eq!(r.terms_dropped, 0);
}

#[test]
fn off_resonant_pair_creation_matches_second_order_estimate() {
    let basis = FockBasis::new(1, vec![3, 3], DEFAULT_MAX_DIM).unwrap();
    let xi = 0.1;
    let r = rwa_toggle_study(
        &static_model(xi),
        &basis,
        &[0, 0, 0],
        &toggle_times(),
        &HamiltonianOptions::default(),
        &EvolveOptions::default(),
    )
    .unwrap();
    // |1,1⟩ reached with amplitude 2ξ⁻/(ω1 + ω2); two photons per pair
    let hand = 2.0 * 4.0 * (2.0 * xi).powi(2) / (23.0f64 + 0.04).powi(2);
    assert!((r.perturbative_estimate - hand).abs() < 1e-12 * hand);
    let ratio = r.max_photon_delta / r.perturbative_estimate;
    assert!((1.0 / 3.0..3.0).contains(&ratio), "{ratio}");
    assert!(r.terms_dropped > 0);
}

#[test]
fn vacuum_stays_empty_without_pair_terms() {
    let basis = FockBasis::new(1, vec![3, 3], DEFAULT_MAX_DIM).unwrap();
    let r = rwa_toggle_study(
        &static_model(0.1),
        &basis,
        &[0, 0, 0],
        &toggle_times(),
        &HamiltonianOptions::default(),
        &EvolveOptions::default(),
    )
    .unwrap();
    assert!(r.photons_without.iter().all(|&n| n.abs() < 1e-14));
    assert!(r.photons_with.iter().any(|&n| n > 1e-5));
}

#[test]
fn frames_require_photon_number_conservation() {
    let basis = FockBasis::new(1, vec![2, 2], DEFAULT_MAX_DIM).unwrap();
    let opts = HamiltonianOptions {
        frame: Some(10.0),
        ..Default::default()
    };
    assert!(matches!(build_hamiltonian(&static_model(0.1), &basis, &opts), Err(Error::Precondition(_))));
    assert!(matches!(
        rwa_toggle_study(&static_model(0.1), &basis, &[0, 0, 0], &[1.0], &opts, &EvolveOptions::default()),
        Err(Error::Precondition(_))
    ));
    assert!(build_hamiltonian(&static_model(0.0), &basis, &opts).is_ok());
}

#[test]
fn oversize_problems_are_refused() {
    assert!(matches!(FockBasis::new(50, vec![20; 5], DEFAULT_MAX_DIM), Err(Error::Dimension { .. })));
    let basis = FockBasis::new(9, vec![9, 9], DEFAULT_MAX_DIM).unwrap();
    let small = HamiltonianOptions {
        max_dim: 100,
        ..Default::default()
    };
    assert!(matches!(build_hamiltonian(&two_mode(3.0, 0.1), &basis, &small), Err(Error::Dimension { .. })));
    let big = FockBasis::new(20, vec![15, 15], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, 0.1), &big, &HamiltonianOptions::default()).unwrap();
    assert!(matches!(dense_spectrum(&h), Err(Error::Dimension { .. })));
}

#[test]
fn malformed_inputs_are_rejected() {
    let basis = FockBasis::new(2, vec![1, 1], DEFAULT_MAX_DIM).unwrap();
    let h = build_hamiltonian(&two_mode(3.0, 0.1), &basis, &HamiltonianOptions::default()).unwrap();
    let mut psi = number_state(&basis, &[0, 0, 1]).unwrap();
    psi[0] = Complex64::new(0.5, 0.0);
    assert!(matches!(evolve_state(&h, &psi, &[1.0], &EvolveOptions::default()), Err(Error::Precondition(_))));
    assert!(number_state(&basis, &[0, 2, 0]).is_err());
    let one_mode = FockBasis::new(2, vec![1], DEFAULT_MAX_DIM).unwrap();
    assert!(build_hamiltonian(&two_mode(3.0, 0.1), &one_mode, &HamiltonianOptions::default()).is_err());
    let bad = FockModel::TwoModeResonant {
        omega_mech: -1.0,
        omega1: 1.0,
        omega2: 2.0,
        eta: 0.1,
    };
    assert!(build_hamiltonian(&bad, &basis, &HamiltonianOptions::default()).unwrap_err().is_config());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_transformed_hamiltonians_are_hermitian(
        xp in prop::collection::vec(-1.0f64..1.0, 9),
        xm in prop::collection::vec(-1.0f64..1.0, 9),
    ) {
        let model = FockModel::TransformedStatic {
            omega_mech: 1.0,
            omega: vec![5.0, 7.0, 11.0],
            xi_plus: DMatrix::from_vec(3, 3, xp),
            xi_minus: DMatrix::from_vec(3, 3, xm),
        };
        let basis = FockBasis::new(1, vec![2, 2, 2], DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&model, &basis, &HamiltonianOptions::default()).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12 * h.matrix.norm_bound());
    }

    #[test]
    fn hopping_alone_conserves_photon_number(
        xp in prop::collection::vec(-1.0f64..1.0, 9),
        n1 in 0usize..3,
        n2 in 0usize..3,
    ) {
        let model = FockModel::TransformedStatic {
            omega_mech: 1.0,
            omega: vec![5.0, 7.0, 11.0],
            xi_plus: DMatrix::from_vec(3, 3, xp),
            xi_minus: DMatrix::zeros(3, 3),
        };
        let basis = FockBasis::new(0, vec![4, 4, 4], DEFAULT_MAX_DIM).unwrap();
        let h = build_hamiltonian(&model, &basis, &HamiltonianOptions::default()).unwrap();
        let psi0 = number_state(&basis, &[0, n1, n2, 1]).unwrap();
        let ev = evolve_state(&h, &psi0, &[0.5, 1.0, 3.0], &EvolveOptions::default()).unwrap();
        for s in &ev.states {
            prop_assert!((photon_number(&basis, s) - (n1 + n2 + 1) as f64).abs() < 1e-10);
        }
    }
}
