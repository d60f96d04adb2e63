use mimcav::numerics::quadrature::adaptive_scalar;
use mimcav::spectral::*;
use mimcav::units;
use proptest::prelude::*;
use std::f64::consts::PI;

fn mim() -> CavityConfig {
    CavityConfig::membrane_in_the_middle()
}

/// ∫ f over [0, l] split at the slab faces, by adaptive Gauss–Legendre.
fn integrate_over_cavity(m: &CavityMode, f: impl Fn(f64) -> f64) -> f64 {
    let cuts = [0.0, m.slab_start(), m.slab_end(), m.length];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += adaptive_scalar(&f, w[0], w[1], 1e-14, 1e-16, 40).unwrap();
        }
    }
    total
}

#[test]
fn empty_cavity_spectrum_is_exact() {
    let c = CavityConfig::new(1.0, 0.0, 0.0, 0.5).unwrap();
    let r = dispersion_roots(&c, 0.5, Band::Count(3)).unwrap();
    let got: Vec<f64> = r.iter().map(|r| r.value()).collect();
    for (k, w) in got.iter().enumerate() {
        let exact = (k + 1) as f64 * PI;
        assert!((w - exact).abs() <= 1e-12 * exact, "{w} vs {exact}");
    }
}

#[test]
fn uniform_medium_rescales_frequencies() {
    let c = CavityConfig::new(1.0, 1.0, 3.0, 0.5).unwrap();
    let r = dispersion_roots(&c, 0.5, Band::Count(6)).unwrap();
    for root in &r {
        let exact = root.index as f64 * PI / 2.0;
        assert!((root.value() - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn weak_slab_matches_first_order_perturbation() {
    let (l, d, q, chi) = (1.0, 0.1, 0.37, 1e-3);
    let c = CavityConfig::new(l, d, chi, q).unwrap();
    let r = dispersion_roots(&c, q, Band::Count(6)).unwrap();
    let (a, b) = (q - d / 2.0, q + d / 2.0);
    for root in &r {
        let kk = root.index as f64 * PI / l;
        // ∫_a^b (2/l) sin²(kx) dx
        let s2 = |x: f64| x / l - (2.0 * kk * x).sin() / (2.0 * kk * l);
        let overlap = s2(b) - s2(a);
        let predicted = -0.5 * kk * chi * overlap;
        let shift = root.value() - kk;
        assert!(
            (shift - predicted).abs() < 0.01 * predicted.abs(),
            "mode {}: shift {shift:e} vs {predicted:e}",
            root.index
        );
    }
}

#[test]
fn mim_cavity_has_the_1064nm_doublet() {
    let c = mim();
    let target = units::omega_from_si(1.77e15);
    let r = dispersion_roots(&c, c.length / 2.0, Band::Around { center: target, count: 4 }).unwrap();
    let nearest = r
        .iter()
        .map(|r| r.value())
        .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
        .unwrap();
    assert!((nearest - target).abs() < 0.01 * target);
}

#[test]
fn empty_cavity_mode_is_a_sine() {
    let c = CavityConfig::new(1.0, 0.0, 0.0, 0.5).unwrap();
    let m = mode_function(&c, 0.5, 3).unwrap();
    for &x in &[0.1, 0.33, 0.5, 0.77] {
        let exact = 2f64.sqrt() * (3.0 * PI * x).sin();
        assert!((m.value(x) - exact).abs() < 1e-13);
    }
}

#[test]
fn normalisation_by_independent_quadrature() {
    for (c, q, k) in [
        (CavityConfig::new(1.0, 0.05, 3.0, 0.3).unwrap(), 0.3, 7),
        (CavityConfig::new(1.0, 0.2, 8.0, 0.61).unwrap(), 0.61, 3),
        (CavityConfig::new(0.5, 0.5, 1.5, 0.25).unwrap(), 0.25, 4),
    ] {
        let m = mode_function(&c, q, k).unwrap();
        let prof = c.profile();
        let norm = integrate_over_cavity(&m, |x| prof.eps(x, q) * m.value(x).powi(2));
        assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
        assert!(m.slope(0.0) > 0.0);
    }
}

#[test]
fn mim_mode_is_continuous_at_the_far_interface() {
    let c = mim();
    let q = c.length / 2.0;
    let target = units::omega_from_si(1.77e15);
    for m in modes(&c, q, Band::Around { center: target, count: 2 }).unwrap() {
        let scale = m.max_abs_estimate();
        for iface in 0..2 {
            let (lv, rv) = m.limits_at(iface);
            assert!((lv - rv).abs() < 1e-12 * scale, "value jump {}", (lv - rv).abs() / scale);
            let (ls, rs) = m.slope_limits_at(iface);
            assert!((ls - rs).abs() < 1e-12 * scale * m.frequency());
        }
        assert!(m.value(c.length).abs() < 1e-12 * scale);
        assert!(m.value(0.0).abs() == 0.0);
    }
}

#[test]
fn mim_modes_are_orthonormal() {
    let c = mim();
    let ms = modes(&c, c.length / 2.0, Band::Count(10)).unwrap();
    for a in &ms {
        for b in &ms {
            let o = overlap(a, b);
            let expect = if a.index == b.index { 1.0 } else { 0.0 };
            assert!((o - expect).abs() < 1e-10, "{} {} {o}", a.index, b.index);
        }
    }
}

#[test]
fn overlaps_near_1064nm_are_orthonormal() {
    let c = mim();
    let target = units::omega_from_si(1.77e15);
    let ms = modes(&c, 0.0301, Band::Around { center: target, count: 8 }).unwrap();
    for a in &ms {
        for b in &ms {
            let o = overlap(a, b);
            let expect = if a.index == b.index { 1.0 } else { 0.0 };
            assert!((o - expect).abs() < 1e-10, "{} {} {o}", a.index, b.index);
        }
    }
}

#[test]
fn empty_cavity_overlap_closed_form() {
    let c = CavityConfig::new(2.0, 0.0, 0.0, 1.0).unwrap();
    assert!((mode_overlap(&c, 1.0, 2, 2).unwrap() - 1.0).abs() < 1e-14);
    assert!(mode_overlap(&c, 1.0, 2, 5).unwrap().abs() < 1e-14);
}

#[test]
fn empty_cavity_frequencies_do_not_move() {
    let c = CavityConfig::new(1.0, 0.1, 0.0, 0.4).unwrap();
    for order in [1u8, 2] {
        let d = frequency_derivative(&c, 0.4, 3, order).unwrap();
        // roots carry ~1e-16/l absolute error, amplified by h⁻ᵒʳᵈᵉʳ
        let floor = 1e-15 / d.step.powi(order as i32);
        assert!(d.value.abs() < floor.max(1e-9), "order {order}: {} (step {})", d.value, d.step);
        assert!(d.value.abs() <= 3.0 * d.error + 1e-9);
    }
}

#[test]
fn slope_matches_interface_formula() {
    // dω/dq = −(ω/2)·χ·(φ(b)² − φ(a)²)
    let c = CavityConfig::new(1.0, 0.05, 3.0, 0.3).unwrap();
    for k in [2, 5, 9] {
        let m = mode_function(&c, 0.3, k).unwrap();
        let d = frequency_derivative(&c, 0.3, k, 1).unwrap();
        let pa = m.value(m.slab_start());
        let pb = m.pieces[2].value(m.slab_end());
        let expect = -0.5 * m.frequency() * 3.0 * (pb * pb - pa * pa);
        assert!((d.value - expect).abs() < 1e-9 * expect.abs().max(1.0), "{k}: {} {expect}", d.value);
    }
}

#[test]
fn slope_matches_five_point_fit() {
    let c = CavityConfig::new(1.0, 0.05, 3.0, 0.3).unwrap();
    let k = 5;
    let h = 2e-4;
    let w = |q: f64| {
        dispersion_roots(&c, q, Band::Indices { first: k, last: k }).unwrap()[0].value()
    };
    let fit = (w(0.3 - 2.0 * h) - 8.0 * w(0.3 - h) + 8.0 * w(0.3 + h) - w(0.3 + 2.0 * h)) / (12.0 * h);
    let fit2 = {
        let h = 2.0 * h;
        (w(0.3 - 2.0 * h) - 8.0 * w(0.3 - h) + 8.0 * w(0.3 + h) - w(0.3 + 2.0 * h)) / (12.0 * h)
    };
    let fit_err = (fit - fit2).abs() + 1e-14 * w(0.3) / h;
    let d = frequency_derivative(&c, 0.3, k, 1).unwrap();
    assert!((d.value - fit).abs() <= fit_err + d.error, "{} vs {fit} (±{fit_err})", d.value);
}

#[test]
fn mim_centre_is_stationary_and_curvature_is_tagged() {
    let c = mim();
    let q0 = c.length / 2.0;
    let target = units::omega_from_si(1.77e15);
    let ms = modes(&c, q0, Band::Around { center: target, count: 2 }).unwrap();
    let mut curvatures = Vec::new();
    for m in &ms {
        let d1 = frequency_derivative(&c, q0, m.index, 1).unwrap();
        let scale = m.frequency() * c.susceptibility * 2.0 / c.length;
        assert!(d1.value.abs() < 1e-9 * scale, "slope {}", d1.value);
        let d2 = frequency_derivative(&c, q0, m.index, 2).unwrap();
        curvatures.push(units::curvature_to_si_per_nm2(d2.value));
    }
    let neg = curvatures.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((neg + 3.68e5).abs() < 0.05 * 3.68e5, "{curvatures:?}");
}

#[test]
fn mirrored_position_gives_same_spectrum() {
    let c = CavityConfig::new(1.0, 0.04, 5.0, 0.3).unwrap();
    let a = dispersion_roots(&c, 0.3, Band::Count(12)).unwrap();
    let b = dispersion_roots(&c, 0.7, Band::Count(12)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.value() - y.value()).abs() < 1e-12 * x.value());
    }
}

#[test]
fn out_of_range_position_is_a_domain_error() {
    let c = CavityConfig::new(1.0, 0.1, 1.0, 0.5).unwrap();
    assert!(matches!(
        dispersion_roots(&c, 0.01, Band::Count(2)),
        Err(mimcav::Error::Domain(_))
    ));
    assert!(mode_function(&c, 0.5, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn empty_cavity_root_count(wmax in 1.0f64..200.0, l in 0.5f64..3.0) {
        let c = CavityConfig::new(l, 0.0, 0.0, l / 2.0).unwrap();
        let r = dispersion_roots(&c, l / 2.0, Band::Interval { lo: 0.0, hi: wmax }).unwrap();
        prop_assert_eq!(r.len(), (wmax * l / PI).floor() as usize);
    }

    #[test]
    fn count_grows_with_susceptibility(chi in 0.0f64..10.0, dchi in 0.0f64..5.0, q in 0.3f64..0.7) {
        let wmax = 60.0;
        let lo = CavityConfig::new(1.0, 0.08, chi, q).unwrap();
        let hi = CavityConfig::new(1.0, 0.08, chi + dchi, q).unwrap();
        let n_lo = dispersion_roots(&lo, q, Band::Interval { lo: 0.0, hi: wmax }).unwrap().len();
        let n_hi = dispersion_roots(&hi, q, Band::Interval { lo: 0.0, hi: wmax }).unwrap().len();
        prop_assert!(n_hi >= n_lo);
    }

    #[test]
    fn frequencies_lie_between_uniform_bounds(chi in 0.0f64..20.0, d in 0.0f64..0.3, q in 0.35f64..0.65) {
        // 1 ≤ ε ≤ n² everywhere, so min–max pins kπ/(n l) ≤ ω_k ≤ kπ/l
        let c = CavityConfig::new(1.0, d, chi, q).unwrap();
        let n = (1.0 + chi).sqrt();
        let r = dispersion_roots(&c, q, Band::Count(15)).unwrap();
        for (i, w) in r.iter().enumerate() {
            let k = (i + 1) as f64;
            prop_assert_eq!(w.index, i + 1);
            prop_assert!(w.value() <= k * PI * (1.0 + 1e-12));
            prop_assert!(w.value() >= k * PI / n * (1.0 - 1e-12));
        }
        for w in r.windows(2) {
            prop_assert!(w[1].value() > w[0].value());
        }
    }

    #[test]
    fn ode_residual_is_tiny(chi in 0.0f64..20.0, d in 0.001f64..0.3, q in 0.35f64..0.65, k in 1usize..30) {
        let c = CavityConfig::new(1.0, d, chi, q).unwrap();
        let m = mode_function(&c, q, k).unwrap();
        let w2 = m.frequency().powi(2);
        let scale = m.max_abs_estimate() * w2 * (1.0 + chi);
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            prop_assert!(m.ode_residual(x).abs() < 1e-10 * scale);
        }
        // finite-difference check of the same ODE away from interfaces
        let h = 1e-4;
        for &x in &[0.1, 0.9] {
            let fd = (m.value(x + h) - 2.0 * m.value(x) + m.value(x - h)) / (h * h);
            prop_assert!((fd + w2 * m.value(x)).abs() < 1e-5 * scale);
        }
    }

    #[test]
    fn centred_slab_parity_alternates(chi in 0.1f64..20.0, d in 0.001f64..0.3) {
        let c = CavityConfig::new(1.0, d, chi, 0.5).unwrap();
        let ms = modes(&c, 0.5, Band::Count(8)).unwrap();
        for m in &ms {
            let expect = if m.index % 2 == 1 { 1 } else { -1 };
            prop_assert_eq!(m.parity(), expect);
            let d1 = frequency_derivative(&c, 0.5, m.index, 1).unwrap();
            prop_assert!(d1.value.abs() < 1e-8 * m.frequency() * (1.0 + chi));
        }
    }

    #[test]
    fn frequency_is_continuous_in_position(chi in 0.5f64..10.0, k in 1usize..12) {
        let c = CavityConfig::new(1.0, 0.05, chi, 0.5).unwrap();
        let qs: Vec<f64> = (0..41).map(|i| 0.4 + 0.2 * i as f64 / 40.0).collect();
        let ws: Vec<f64> = qs
            .iter()
            .map(|&q| dispersion_roots(&c, q, Band::Indices { first: k, last: k }).unwrap()[0].value())
            .collect();
        // |dω/dq| ≤ ω·χ·max φ² ≤ ω·χ·(2 / l)·(1 + χ) gives a crude slope bound
        let bound = ws.iter().cloned().fold(0.0, f64::max) * chi * 2.0 * (1.0 + chi);
        for i in 1..ws.len() {
            prop_assert!((ws[i] - ws[i - 1]).abs() <= bound * (qs[i] - qs[i - 1]));
        }
    }
}
