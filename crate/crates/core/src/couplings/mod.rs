//! Intermode coupling tensors g, ζ, f, λ, ξ± and the Γ coefficients, plus
//! the rotated mode functions φ̃.
//!
//! g and ζ are kept in 1/m; ξ± and frequencies in a [`CouplingSet`] are in
//! rad/s.

mod tensors;
mod transform;

pub use tensors::{
    antisymmetrize, antisymmetry_defect, coupling_g, coupling_zeta, g_interface, g_matrix, interface_matrices,
    mode_block, quadrature_matrices, zeta_interface, GMethod, RawCouplings,
};
pub use transform::{
    coupling_f, coupling_set, gamma_coefficients, lambda_matrix, orthogonality_defect, transformed_modes,
    xi_coefficients, xi_convergence, CouplingOptions, CouplingSet, PathIntegral, PathOptions, TransformedModes,
    XiConvergence,
};
