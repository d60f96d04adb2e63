use std::panic::{catch_unwind, AssertUnwindSafe};

use mimcav::effective::{
    per_nm2, photon_threshold, quadratic_coupling, renormalized_mass_correction, EffectiveModelReport, Occupancy,
    QuadraticOptions, WindowSampling,
};
use mimcav::spectral::{dispersion_roots, frequency_derivative, mode_function, Band};
use mimcav::units;

use crate::config::RunConfig;
use crate::output::{Report, Table};
use crate::CliError;

#[derive(Clone, Copy)]
enum Tolerance {
    Relative(f64),
    Factor(f64),
    Decades(f64),
    AtMost,
}

impl Tolerance {
    fn describe(self) -> String {
        match self {
            Tolerance::Relative(r) => format!("within {}%", r * 100.0),
            Tolerance::Factor(f) => format!("within a factor {f}"),
            Tolerance::Decades(d) => format!("within {d} decade(s)"),
            Tolerance::AtMost => "at most the quoted value".into(),
        }
    }

    fn accepts(self, value: f64, quoted: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match self {
            Tolerance::Relative(r) => (value - quoted).abs() <= r * quoted.abs(),
            Tolerance::Factor(f) => {
                let x = value / quoted;
                x >= 1.0 / f && x <= f
            }
            Tolerance::Decades(d) => value > 0.0 && (value / quoted).log10().abs() <= d,
            Tolerance::AtMost => value <= quoted,
        }
    }
}

struct Row {
    quantity: &'static str,
    unit: &'static str,
    quoted: f64,
    tolerance: Tolerance,
}

const ROWS: [Row; 8] = [
    Row { quantity: "mode_frequency", unit: "rad/s", quoted: 1.77e15, tolerance: Tolerance::Relative(0.01) },
    Row { quantity: "family_spacing", unit: "rad/s", quoted: 3e10, tolerance: Tolerance::Relative(0.15) },
    Row { quantity: "curvature", unit: "rad/s/nm^2", quoted: -3.68e5, tolerance: Tolerance::Relative(0.05) },
    Row { quantity: "per_mode_contribution", unit: "rad/s/nm^2", quoted: 0.22, tolerance: Tolerance::Factor(2.0) },
    Row { quantity: "per_mode_spread", unit: "max/min", quoted: 3.0, tolerance: Tolerance::AtMost },
    Row { quantity: "window_sum", unit: "rad/s/nm^2", quoted: 0.7e5, tolerance: Tolerance::Factor(2.0) },
    Row { quantity: "vacuum_mass_equivalent", unit: "kg", quoted: 1e-28, tolerance: Tolerance::Decades(1.0) },
    Row { quantity: "photon_threshold", unit: "photons", quoted: 1e15, tolerance: Tolerance::Decades(1.0) },
];

type Computed = Result<f64, String>;

fn guarded(f: impl FnOnce() -> Result<f64, CliError>) -> Computed {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("internal panic".into()),
    }
}

/// The doublet member near the band centre whose curvature is negative,
/// with its curvature in rad/s per nm²; the lower member if neither is.
fn reference_mode(rc: &RunConfig) -> Result<(usize, f64), CliError> {
    let cav = rc.cavity()?;
    let q = rc.position_m;
    let pair = dispersion_roots(
        &cav,
        q,
        Band::Around {
            center: units::omega_from_si(rc.band_center_rad_s),
            count: 2,
        },
    )?;
    let mut best = None;
    for r in &pair {
        let c = units::curvature_to_si_per_nm2(frequency_derivative(&cav, q, r.index, 2)?.value);
        if best.is_none() || c < 0.0 && best.is_some_and(|(_, b): (usize, f64)| b >= 0.0) {
            best = Some((r.index, c));
        }
    }
    best.ok_or_else(|| CliError::Numerical("no modes near the band centre".into()))
}

/// Computed value per row, in the order of `ROWS`.
fn compute(rc: &RunConfig) -> (Vec<Computed>, Vec<String>) {
    let mut notes = Vec::new();
    let reference = reference_mode(rc);
    let k = reference.as_ref().map(|r| r.0).map_err(|e| e.to_string());
    if let Ok(k) = &k {
        notes.push(format!("reference mode k = {k}"));
    }
    let with_k = |f: &dyn Fn(usize) -> Result<f64, CliError>| -> Computed {
        match &k {
            Ok(k) => guarded(|| f(*k)),
            Err(e) => Err(e.clone()),
        }
    };

    let omega = with_k(&|k| Ok(units::omega_to_si(mode_function(&rc.cavity()?, rc.position_m, k)?.frequency())));
    let spacing = with_k(&|k| {
        let cav = rc.cavity()?;
        let a = mode_function(&cav, rc.position_m, k)?;
        let b = mode_function(&cav, rc.position_m, k + 2)?;
        Ok(units::omega_to_si(b.omega.diff(a.omega)))
    });
    let curvature = match &reference {
        Ok((_, c)) => Ok(*c),
        Err(e) => Err(e.to_string()),
    };

    let quad: Result<EffectiveModelReport, String> = match &k {
        Ok(k) => {
            let opts = QuadraticOptions {
                window: (rc.window_lo_rad_s, rc.window_hi_rad_s),
                sampling: if rc.window_samples > 0 {
                    WindowSampling::Sampled(rc.window_samples)
                } else {
                    WindowSampling::Exhaustive
                },
                spacing: (rc.spacing_rad_s > 0.0).then_some(rc.spacing_rad_s),
                near_count: 5,
            };
            catch_unwind(AssertUnwindSafe(|| -> Result<EffectiveModelReport, CliError> {
                Ok(quadratic_coupling(&rc.cavity()?, rc.position_m, *k, opts)?)
            }))
            .map_err(|_| "internal panic".to_string())
            .and_then(|r| r.map_err(|e| e.to_string()))
        }
        Err(e) => Err(e.clone()),
    };
    if let Ok(q) = &quad {
        notes.push(format!(
            "window [{:e}, {:e}] rad/s: {} modes, {} evaluated, {} contributing in the table, contributing spacing {:e} rad/s",
            q.window.0,
            q.window.1,
            q.window_modes,
            q.evaluated,
            q.table.len(),
            q.contributing_spacing
        ));
    }
    let from_quad = |f: fn(&EffectiveModelReport) -> f64| -> Computed { quad.as_ref().map(f).map_err(|e| e.clone()) };
    let per_mode = from_quad(|q| per_nm2(q.per_mode_near_k));
    let spread = from_quad(|q| q.spread);
    let window_sum = from_quad(|q| per_nm2(q.spacing_sum));

    let mass = guarded(|| {
        let c = rc.mass_cavity()?;
        Ok(renormalized_mass_correction(&c, 0.5 * rc.mass_length_m, rc.mass_cutoff_rad_s, Occupancy::Vacuum)?.mass_equivalent)
    });
    let threshold = guarded(|| {
        let c = rc.mass_cavity()?;
        let q0 = 0.5 * rc.mass_length_m;
        let center = units::omega_from_si(rc.band_center_rad_s);
        let km = dispersion_roots(&c, q0, Band::Around { center, count: 1 })?[0].index;
        Ok(photon_threshold(&c, q0, km, rc.threshold_mass_kg)?)
    });
    if rc.refractive_index == 1.0 {
        notes.push("no index contrast: couplings, curvature and the field mass vanish".into());
    }
    (vec![omega, spacing, curvature, per_mode, spread, window_sum, mass, threshold], notes)
}

/// Never fails as a whole; every row carries its own verdict.
pub fn reproduce(rc: &RunConfig) -> Report {
    let (values, notes) = compute(rc);
    let mut t = Table::new("reproduction", &["quantity", "unit", "computed", "quoted", "tolerance", "result", "note"]);
    let mut passed = 0;
    for (row, v) in ROWS.iter().zip(&values) {
        let (computed, ok, note) = match v {
            Ok(x) => (*x, row.tolerance.accepts(*x, row.quoted), String::new()),
            Err(e) => (f64::NAN, false, e.clone()),
        };
        passed += ok as usize;
        t.push(vec![
            row.quantity.into(),
            row.unit.into(),
            computed.into(),
            row.quoted.into(),
            row.tolerance.describe().into(),
            ok.into(),
            note.into(),
        ]);
    }
    let mut r = Report::default();
    r.note("rows", ROWS.len());
    r.note("passed", passed);
    r.note("notes", notes);
    r.tables.push(t);
    r
}
