//! Pointwise tensor calculus in coordinate charts.

mod calculus;
mod curvature;
mod structure;
mod tensor;

use serde::Serialize;

use crate::error::{Error, Result};

pub use calculus::{
    bracket, cartan_residual, check_antisymmetric, d_one_form, d_two_form, differential,
    directional, exterior_derivative, interior, interior_matrix, lie_covariant2, lie_covector,
    lie_derivative, lie_endomorphism, lie_form, wedge, wedge11, Tensor, Valence,
};
pub use curvature::{
    christoffel, covariant_derivative_endomorphism, curvature, metric_compatibility_residual,
    riemann_from_christoffel, riemann_symmetry_residual, Array4, CurvatureData,
};
pub use structure::{
    expected_frame_matrices, frame_matrices, frame_matrix_residual, kahler_form, kahler_form_jet,
    model_curvature_r0, nijenhuis, q_invariance_residual, quaternion_algebra_residual, Signs,
};
pub use tensor::{
    dot, drop_component, pad, restrict_vec, sort_with_sign, values, Form, JMat, TupleIndex,
};

/// A coordinate chart: a name and one label per coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chart {
    name: String,
    labels: Vec<String>,
}

impl Chart {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Result<Chart> {
        if labels.is_empty() {
            return Err(Error::usage("a chart needs at least one coordinate"));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::usage("chart coordinate labels must be unique"));
        }
        Ok(Chart {
            name: name.into(),
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The chart of the hyperplane `{x_k = const}`.
    pub fn without(&self, k: usize, name: impl Into<String>) -> Result<Chart> {
        let labels = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, l)| l.clone())
            .collect();
        Chart::new(name, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_labels_must_be_unique() {
        assert!(Chart::new("bad", vec!["x".into(), "x".into()]).is_err());
        let c = Chart::new("plane", vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(c.without(0, "line").unwrap().labels(), ["y".to_string()]);
    }
}
