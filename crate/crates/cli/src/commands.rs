use mimcav::couplings::{coupling_set, mode_block, transformed_modes, CouplingOptions};
use mimcav::effective::{heisenberg_adiabatic_check, single_mode_shift, two_mode_eta, ShiftOptions};
use mimcav::spectral::{dispersion_roots, frequency_derivative, modes as cavity_modes, Band};
use mimcav::units;
use nalgebra::DMatrix;

use crate::config::RunConfig;
use crate::output::{Cell, Report, Table};
use crate::CliError;

fn band(rc: &RunConfig, count: usize) -> Band {
    if rc.band_center_rad_s > 0.0 {
        Band::Around {
            center: units::omega_from_si(rc.band_center_rad_s),
            count,
        }
    } else {
        Band::Count(count)
    }
}

/// Lowest index of the configured mode block.
pub fn block_first(rc: &RunConfig) -> Result<usize, CliError> {
    let r = dispersion_roots(&rc.cavity()?, rc.position_m, band(rc, rc.mode_count))?;
    r.first()
        .map(|r| r.index)
        .ok_or_else(|| CliError::Numerical("no modes in the requested band".into()))
}

/// The mode of interest: `mode_index`, else the one nearest the band centre.
pub fn focus(rc: &RunConfig) -> Result<usize, CliError> {
    if rc.mode_index > 0 {
        return Ok(rc.mode_index);
    }
    if rc.band_center_rad_s > 0.0 {
        let r = dispersion_roots(&rc.cavity()?, rc.position_m, band(rc, 1))?;
        return Ok(r[0].index);
    }
    Ok(1)
}

pub fn partner(rc: &RunConfig, k: usize) -> usize {
    if rc.partner_index > 0 {
        rc.partner_index
    } else {
        k + 1
    }
}

pub fn modes(rc: &RunConfig) -> Result<Report, CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let first = block_first(rc)?;
    let n = rc.mode_count;
    // two extra modes for the gap and family-spacing columns
    let ms = cavity_modes(&cav, q, Band::Indices { first, last: first + n + 1 })?;
    let mut t = Table::new(
        "modes",
        &[
            "k",
            "omega_rad_s",
            "wavelength_nm",
            "parity",
            "domega_dq_rad_s_per_nm",
            "d2omega_dq2_rad_s_per_nm2",
            "gap_next_rad_s",
            "family_spacing_rad_s",
        ],
    );
    for i in 0..n {
        let m = &ms[i];
        let d1 = frequency_derivative(&cav, q, m.index, 1)?;
        let d2 = frequency_derivative(&cav, q, m.index, 2)?;
        t.push(vec![
            m.index.into(),
            units::omega_to_si(m.frequency()).into(),
            units::wavelength_nm(m.frequency()).into(),
            m.parity().into(),
            (units::slope_to_si(d1.value) * units::NM).into(),
            units::curvature_to_si_per_nm2(d2.value).into(),
            units::omega_to_si(ms[i + 1].omega.diff(m.omega)).into(),
            units::omega_to_si(ms[i + 2].omega.diff(m.omega)).into(),
        ]);
    }
    let mut r = Report::default();
    r.note("position_m", q);
    r.note("first_index", first);
    r.note("mode_count", n);
    r.tables.push(t);
    Ok(r)
}

fn push_matrix(t: &mut Table, name: &str, indices: &[usize], m: &DMatrix<f64>) {
    for (a, &k) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate() {
            t.push(vec![name.into(), k.into(), j.into(), m[(a, b)].into()]);
        }
    }
}

fn check_row(t: &mut Table, name: &str, value: f64, limit: f64) -> bool {
    let ok = value == 0.0 || value < limit;
    t.push(vec![name.into(), value.into(), limit.into(), ok.into()]);
    ok
}

pub fn couplings(rc: &RunConfig) -> Result<Report, CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let first = block_first(rc)?;
    let n = rc.mode_count;
    let set = coupling_set(
        &cav,
        rc.reference_position_m,
        q,
        first,
        n,
        CouplingOptions {
            quadrature_check: true,
            ..Default::default()
        },
    )?;
    let mut t = Table::new("couplings", &["matrix", "k", "j", "value"]);
    push_matrix(&mut t, "g_per_m", &set.indices, &set.g);
    push_matrix(&mut t, "zeta_per_m", &set.indices, &set.zeta);
    push_matrix(&mut t, "f", &set.indices, &set.f);
    push_matrix(&mut t, "lambda", &set.indices, &set.lambda);
    push_matrix(&mut t, "xi_plus_rad_s", &set.indices, &set.xi_plus);
    push_matrix(&mut t, "xi_minus_rad_s", &set.indices, &set.xi_minus);

    let block = mode_block(&cav, q, first, n)?;
    let gram = transformed_modes(&block, &set.lambda)?.gram();
    let gram_defect = (gram - DMatrix::identity(n, n)).amax();
    let g_diag = (0..n).map(|i| set.g[(i, i)].abs()).fold(0.0, f64::max);

    let mut c = Table::new("checks", &["check", "value", "limit", "result"]);
    let mut all = true;
    all &= check_row(&mut c, "g_antisymmetry_before_enforcement", set.raw_antisymmetry_defect.unwrap_or(f64::NAN), 1e-8);
    all &= check_row(&mut c, "g_diagonal", g_diag, 0.0);
    all &= check_row(&mut c, "rotation_orthogonality", set.orthogonality_defect, 1e-12);
    all &= check_row(&mut c, "transformed_gram_identity", gram_defect, 1e-8);

    let mut r = Report::default();
    r.note("position_m", q);
    r.note("reference_position_m", rc.reference_position_m);
    r.note("indices", &set.indices);
    r.note("omega_rad_s", &set.omega);
    r.note("path_error", set.path_error);
    r.note("checks_pass", all);
    r.tables.push(t);
    r.tables.push(c);
    Ok(r)
}

pub fn shift(rc: &RunConfig) -> Result<Report, CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let k = focus(rc)?;
    let s = single_mode_shift(&cav, q, k, rc.mode_count, ShiftOptions::for_mechanical_frequency(rc.omega_mech_rad_s))?;
    let mut t = Table::new("shift_terms", &["j", "numerator_rad2_s2", "denominator_rad_s", "term_rad_s"]);
    for term in &s.terms {
        t.push(vec![term.j.into(), term.numerator.into(), term.denominator.into(), term.term.into()]);
    }
    let mut r = Report::default();
    r.note("k", k);
    r.note("position_m", q);
    r.note("omega_k_rad_s", s.omega_k);
    r.note("two_xi_kk_rad_s", s.two_xi_kk);
    r.note("delta_rad_s", s.delta);
    if rc.mode_count >= 2 {
        let a = heisenberg_adiabatic_check(&cav, q, k, rc.mode_count, rc.omega_mech_rad_s)?;
        r.note("adiabatic_check", &a);
    }
    r.tables.push(t);
    Ok(r)
}

pub fn eta(rc: &RunConfig) -> Result<Report, CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let k = focus(rc)?;
    let p = partner(rc, k);
    let m = two_mode_eta(&cav, q, k, p, rc.mass_kg, rc.omega_mech_rad_s)?;
    let mut t = Table::new(
        "eta",
        &["k1", "k2", "omega1_rad_s", "omega2_rad_s", "g12_per_m", "zero_point_m", "eta_rad_s", "detuning_rad_s"],
    );
    let row: Vec<Cell> = vec![
        m.k1.into(),
        m.k2.into(),
        m.omega1.into(),
        m.omega2.into(),
        m.g12.into(),
        m.zero_point.into(),
        m.eta.into(),
        m.detuning.into(),
    ];
    t.push(row);
    let mut r = Report::default();
    r.note("position_m", q);
    r.note("mass_kg", m.mass);
    r.note("omega_mech_rad_s", m.omega_mech);
    r.note("resonant_omega_mech_rad_s", m.omega2 - m.omega1);
    r.tables.push(t);
    Ok(r)
}
