//! Physical constants and conversions between natural units (c = 1, lengths
//! in metres, frequencies in rad per metre) and SI.

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const NM: f64 = 1e-9;

/// Angular frequency in natural units (1/m) to rad/s.
pub fn omega_to_si(w: f64) -> f64 {
    w * C
}

/// Angular frequency in rad/s to natural units (1/m).
pub fn omega_from_si(w: f64) -> f64 {
    w / C
}

/// dω/dq in natural units (1/m²) to rad/s per metre.
pub fn slope_to_si(dw: f64) -> f64 {
    dw * C
}

/// d²ω/dq² in natural units (1/m³) to rad/s per nm².
pub fn curvature_to_si_per_nm2(d2w: f64) -> f64 {
    d2w * C * NM * NM
}

/// rad/s per nm² to natural units (1/m³).
pub fn curvature_from_si_per_nm2(v: f64) -> f64 {
    v / (C * NM * NM)
}

/// Vacuum wavelength in nm of a mode with natural-unit frequency `w`.
pub fn wavelength_nm(w: f64) -> f64 {
    2.0 * std::f64::consts::PI / w / NM
}

/// Zero-point amplitude √(ħ/2mΩ) of an oscillator (SI).
pub fn zero_point_amplitude(mass: f64, omega_mech: f64) -> f64 {
    (HBAR / (2.0 * mass * omega_mech)).sqrt()
}
