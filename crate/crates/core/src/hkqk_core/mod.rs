//! The ε-HK/QK correspondence: bundle data on `P`, the metric `g′` on a
//! codimension-one submanifold `M′ ⊂ P`, the induced `J′_α`, `ω′_α`, and the
//! residuals certifying the output.

mod base;
mod bundle;
mod checks;
mod flat;

pub use base::{BaseFields, CorrespondenceInput, HkBase, Level};
pub use bundle::{
    bundle_data, bundle_from_fields, induced, induced_structures, qk_metric, qk_point,
    qk_point_with_order, BundleData, InducedStructures, QkPoint, SIGN_TOL, TRANSVERSAL_TOL,
};
pub use checks::{
    algebra_residual, base_residuals, bundle_residuals, killing_residual, moment_map_residual,
    nijenhuis_residual, perturbed_nijenhuis, qk_residuals, BaseResiduals, BundleResiduals,
    QkResiduals,
};
pub use flat::{flat_f1_plus_f, flat_model, flat_model_shifted, FlatModel};

#[cfg(test)]
mod tests;
