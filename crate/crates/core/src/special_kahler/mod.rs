//! Conical and projective special ε₁-Kähler geometry from a prepotential.

mod cask;
mod prepotential;
mod psk;

pub use cask::{
    cask_metric, complex_structure_xu, conical_decomposition_check, forward_q, hab_block,
    hab_inverse_block, invert_q, levi_form, omega_matrix, seed_x, CaskFields, CaskMetric,
    ConicalResiduals,
};
pub use prepotential::{
    euler_hessian_residual, hermitian_form, homogeneity_check, Monomial, Prepotential,
    PrepotentialKind,
};
pub use psk::{h_hat, h_hat_identity_residual, period_matrix, psk_data, PskFields, PskPoint};
