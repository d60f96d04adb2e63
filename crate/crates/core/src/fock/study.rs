use num_complex::Complex64;
use serde::Serialize;

use super::basis::FockBasis;
use super::evolve::{evolve_state, fidelity, number_state, photon_number, position_expectation, EvolveOptions, Evolution};
use super::hamiltonian::{build_hamiltonian, FockModel, HamiltonianOptions, Rwa};
use crate::effective::LinearizedCoeffs;
use crate::error::{Error, Result};

/// P(t) ≈ A sin²(γt).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RabiFit {
    pub amplitude: f64,
    pub rate: f64,
    /// π/γ
    pub period: f64,
    pub rms_residual: f64,
}

fn rabi_residual(times: &[f64], p: &[f64], rate: f64) -> (f64, f64) {
    let s: Vec<f64> = times.iter().map(|t| (rate * t).sin().powi(2)).collect();
    let ss: f64 = s.iter().map(|x| x * x).sum();
    let sp: f64 = s.iter().zip(p).map(|(x, y)| x * y).sum();
    let a = if ss > 0.0 { sp / ss } else { 0.0 };
    let r: f64 = s.iter().zip(p).map(|(x, y)| (a * x - y).powi(2)).sum();
    (a, r)
}

/// Least-squares fit of A sin²(γt). The rate is seeded from the first
/// local maximum and refined by golden-section search with A eliminated.
pub fn fit_rabi(times: &[f64], p: &[f64]) -> Result<RabiFit> {
    if times.len() != p.len() || times.len() < 5 {
        return Err(Error::Config("need at least five matching samples".into()));
    }
    let peak = (1..p.len() - 1)
        .find(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])
        .ok_or_else(|| Error::Numerical("no oscillation maximum in the samples".into()))?;
    let g0 = std::f64::consts::FRAC_PI_2 / times[peak];
    let (mut lo, mut hi) = (0.7 * g0, 1.4 * g0);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let f = |g: f64| rabi_residual(times, p, g).1;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-13 * g0 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    let rate = 0.5 * (lo + hi);
    let (amplitude, r) = rabi_residual(times, p, rate);
    Ok(RabiFit {
        amplitude,
        rate,
        period: std::f64::consts::PI / rate,
        rms_residual: (r / p.len() as f64).sqrt(),
    })
}

/// Largest transfer and its rate for a two-level exchange with coupling η
/// and detuning δ: (η²/(η² + δ²/4), √(η² + δ²/4)).
pub fn detuned_rabi(eta: f64, detuning: f64) -> (f64, f64) {
    let r2 = eta * eta + 0.25 * detuning * detuning;
    (eta * eta / r2, r2.sqrt())
}

/// One cavity mode (and optionally a resonant partner) singled out from a
/// linearised block.
#[derive(Debug, Clone)]
pub struct ComparisonSetup {
    /// Needs `curvature`.
    pub coeffs: LinearizedCoeffs,
    /// Position of the driven mode within the block.
    pub mode: usize,
    /// Position of the partner used for the two-mode model.
    pub partner: Option<usize>,
    pub omega_mech: f64,
    pub mass: f64,
    /// Initial occupations of the membrane, the driven mode and the partner.
    pub phonons: usize,
    pub photons: usize,
    pub partner_photons: usize,
    /// Start from (|n_b, 0⟩ + |n_b, n⟩)/√2 instead of the number state, so
    /// the photon-number-dependent phase is observable.
    pub vacuum_branch: bool,
    pub mech_cutoff: usize,
    pub times: Vec<f64>,
    pub evolve: EvolveOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelComparison {
    pub times: Vec<f64>,
    /// Overlap of each reduced model with the full linearised evolution.
    pub fidelity_bare: Vec<f64>,
    pub fidelity_shifted: Vec<f64>,
    pub fidelity_two_mode: Option<Vec<f64>>,
    pub photons_full: Vec<f64>,
    /// ⟨x̂⟩/x_zp under the full model.
    pub position_full: Vec<f64>,
    /// x̂² coefficients in rad/s per m².
    pub bare_bracket: f64,
    pub shifted_bracket: f64,
    pub eta: Option<f64>,
    pub dim_full: usize,
    pub max_leakage: f64,
    pub leakage_flagged: bool,
}

/// Σ_{j≠k} g_kj² (ω_k − ω_j)²(ω_k + ω_j)/(4ω_kω_j) over the block.
pub fn block_mode_sum(c: &LinearizedCoeffs, k: usize) -> f64 {
    let w = &c.omega;
    (0..w.len())
        .filter(|&j| j != k)
        .map(|j| {
            let g = c.g[(k, j)];
            g * g * (w[k] - w[j]).powi(2) * (w[k] + w[j]) / (4.0 * w[k] * w[j])
        })
        .sum()
}

fn embed(reduced: &FockBasis, full: &FockBasis, sites: &[usize], psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); full.dim()];
    let mut occ = vec![0; full.sites()];
    for (i, x) in psi.iter().enumerate() {
        occ.iter_mut().for_each(|o| *o = 0);
        for (s, n) in reduced.occupations(i).into_iter().enumerate() {
            occ[sites[s]] = n;
        }
        match full.index(&occ) {
            Some(j) => out[j] = *x,
            None if x.norm_sqr() == 0.0 => {}
            None => return Err(Error::Precondition("reduced state does not fit the full basis".into())),
        }
    }
    Ok(out)
}

fn initial(basis: &FockBasis, occ: &[usize], vacuum_branch: bool) -> Result<Vec<Complex64>> {
    let mut psi = number_state(basis, occ)?;
    if vacuum_branch && occ[1..].iter().any(|&n| n > 0) {
        let mut vac = vec![0; occ.len()];
        vac[0] = occ[0];
        let v = number_state(basis, &vac)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        psi.iter_mut().zip(&v).for_each(|(x, y)| *x = (*x + y) * r);
    }
    Ok(psi)
}

fn fidelities(reduced: &FockBasis, full: &FockBasis, sites: &[usize], ev: &Evolution, reference: &Evolution) -> Result<Vec<f64>> {
    ev.states
        .iter()
        .zip(&reference.states)
        .map(|(s, r)| Ok(fidelity(&embed(reduced, full, sites, s)?, r)))
        .collect()
}

/// Evolve the same number state under the full linearised block (quadratic
/// coefficient ½ω″ + diagonal second-order piece, hops kept, pair terms
/// dropped) and under the reduced single-mode models with bracket ½ω″
/// (bare) and ½ω″ + block mode sum (shifted), and optionally the two-mode
/// resonant model. All run in a frame rotating at ω_k.
pub fn compare_models(s: &ComparisonSetup) -> Result<ModelComparison> {
    let c = &s.coeffs;
    let n = c.omega.len();
    let curv = c
        .curvature
        .as_ref()
        .ok_or_else(|| Error::Precondition("comparison needs the curvature".into()))?;
    if s.mode >= n || s.partner.is_some_and(|p| p >= n || p == s.mode) {
        return Err(Error::Config("mode positions outside the block".into()));
    }
    let k = s.mode;
    let opts = HamiltonianOptions {
        rwa: Rwa::Off,
        pair_terms: false,
        frame: Some(c.omega[k]),
        ..Default::default()
    };
    let total = s.photons + s.partner_photons;
    // photon number is conserved, so one spare layer never fills
    let pc = total + 1;
    let quad: Vec<f64> = (0..n).map(|j| 0.5 * curv[j] + c.second_order_diagonal[j]).collect();
    let full_model = FockModel::LinearizedMultimode {
        omega_mech: s.omega_mech,
        mass: s.mass,
        omega: c.omega.clone(),
        force: c.force.clone(),
        quadratic: Some(quad),
    };
    let full_basis = FockBasis::new(s.mech_cutoff, vec![pc; n], opts.max_dim)?;
    let mut occ = vec![0; n + 1];
    occ[0] = s.phonons;
    occ[k + 1] = s.photons;
    if let Some(p) = s.partner {
        occ[p + 1] = s.partner_photons;
    } else if s.partner_photons > 0 {
        return Err(Error::Config("partner photons without a partner".into()));
    }
    let h_full = build_hamiltonian(&full_model, &full_basis, &opts)?;
    let full = evolve_state(&h_full, &initial(&full_basis, &occ, s.vacuum_branch)?, &s.times, &s.evolve)?;
    let mut leak = full.max_leakage;

    let bare_bracket = 0.5 * curv[k];
    let shifted_bracket = bare_bracket + block_mode_sum(c, k);
    let single_basis = FockBasis::new(s.mech_cutoff, vec![pc], opts.max_dim)?;
    let single = |bracket: f64| -> Result<Evolution> {
        let m = FockModel::QuadraticSingleMode {
            omega_mech: s.omega_mech,
            mass: s.mass,
            omega_k: c.omega[k],
            slope: c.slope[k],
            bracket,
        };
        let h = build_hamiltonian(&m, &single_basis, &opts)?;
        evolve_state(&h, &initial(&single_basis, &[s.phonons, s.photons], s.vacuum_branch)?, &s.times, &s.evolve)
    };
    let bare = single(bare_bracket)?;
    let shifted = single(shifted_bracket)?;
    leak = leak.max(bare.max_leakage).max(shifted.max_leakage);
    let sites = [0, k + 1];
    let fidelity_bare = fidelities(&single_basis, &full_basis, &sites, &bare, &full)?;
    let fidelity_shifted = fidelities(&single_basis, &full_basis, &sites, &shifted, &full)?;

    let (fidelity_two_mode, eta) = match s.partner {
        Some(p) => {
            let zp = crate::units::zero_point_amplitude(s.mass, s.omega_mech);
            let eta = zp * (c.force[(k, p)] + c.force[(p, k)]);
            let m = FockModel::TwoModeResonant {
                omega_mech: s.omega_mech,
                omega1: c.omega[k],
                omega2: c.omega[p],
                eta,
            };
            let b = FockBasis::new(s.mech_cutoff, vec![pc, pc], opts.max_dim)?;
            let h = build_hamiltonian(&m, &b, &opts)?;
            let ev = evolve_state(&h, &initial(&b, &[s.phonons, s.photons, s.partner_photons], s.vacuum_branch)?, &s.times, &s.evolve)?;
            leak = leak.max(ev.max_leakage);
            (Some(fidelities(&b, &full_basis, &[0, k + 1, p + 1], &ev, &full)?), Some(eta))
        }
        None => (None, None),
    };

    Ok(ModelComparison {
        times: s.times.clone(),
        fidelity_bare,
        fidelity_shifted,
        fidelity_two_mode,
        photons_full: full.states.iter().map(|x| photon_number(&full_basis, x)).collect(),
        position_full: full.states.iter().map(|x| position_expectation(&full_basis, x)).collect(),
        bare_bracket,
        shifted_bracket,
        eta,
        dim_full: full_basis.dim(),
        max_leakage: leak,
        leakage_flagged: leak >= s.evolve.leakage_limit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RwaToggleReport {
    pub times: Vec<f64>,
    pub photons_with: Vec<f64>,
    pub photons_without: Vec<f64>,
    /// max_t |⟨N⟩_with − ⟨N⟩_without|
    pub max_photon_delta: f64,
    /// Σ_f 4|Δn_f| |V_f|²/E_f² for a number-state input, V = H_with − H_without.
    pub perturbative_estimate: f64,
    pub terms_dropped: usize,
}

/// Evolve a number state with and without the pair (a†a†, aa) terms, all
/// other settings taken from `base`.
pub fn rwa_toggle_study(
    model: &FockModel,
    basis: &FockBasis,
    occ: &[usize],
    times: &[f64],
    base: &HamiltonianOptions,
    evolve: &EvolveOptions,
) -> Result<RwaToggleReport> {
    if base.frame.is_some() {
        return Err(Error::Precondition("pair terms cannot be toggled in a rotating frame".into()));
    }
    let with = build_hamiltonian(model, basis, &HamiltonianOptions { pair_terms: true, ..*base })?;
    let without = build_hamiltonian(model, basis, &HamiltonianOptions { pair_terms: false, ..*base })?;
    let psi0 = number_state(basis, occ)?;
    let i = basis.index(occ).expect("number_state checked the occupations");
    let n_i: usize = occ[1..].iter().sum();
    let e_i = without.matrix.get(i, i);
    let mut estimate = 0.0;
    let mut diff = std::collections::BTreeMap::new();
    for (j, v) in with.matrix.row(i) {
        *diff.entry(j).or_insert(0.0) += v;
    }
    for (j, v) in without.matrix.row(i) {
        *diff.entry(j).or_insert(0.0) -= v;
    }
    for (f, v) in diff {
        if f == i || v == 0.0 {
            continue;
        }
        let e = without.matrix.get(f, f) - e_i;
        if e == 0.0 {
            return Err(Error::NearDegenerate {
                k: i,
                j: f,
                gap: 0.0,
                floor: 0.0,
            });
        }
        let n_f: usize = (1..basis.sites()).map(|s| basis.occupation(f, s)).sum();
        estimate += 4.0 * (n_f as f64 - n_i as f64).abs() * v * v / (e * e);
    }
    let a = evolve_state(&with, &psi0, times, evolve)?;
    let b = evolve_state(&without, &psi0, times, evolve)?;
    let pw: Vec<f64> = a.states.iter().map(|x| photon_number(basis, x)).collect();
    let po: Vec<f64> = b.states.iter().map(|x| photon_number(basis, x)).collect();
    let delta = pw.iter().zip(&po).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(RwaToggleReport {
        times: times.to_vec(),
        photons_with: pw,
        photons_without: po,
        max_photon_delta: delta,
        perturbative_estimate: estimate,
        terms_dropped: without.terms_dropped - with.terms_dropped,
    })
}
