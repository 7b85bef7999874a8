//! Numerical engine for the ε-HK/QK correspondence.
//!
//! Starting from a degree-2 homogeneous ε₁-holomorphic prepotential the
//! crate builds the conical affine special ε₁-Kähler data, the rigid c-map
//! ε-hyper-Kähler structure on the tangent bundle, and the ε-quaternionic
//! Kähler metric on a codimension-one submanifold of the rank-one bundle
//! over it. Every geometric identity relating these objects is evaluated
//! pointwise with truncated Taylor jets and reported as a residual.

pub mod cli_verify;
pub mod epsnum;
pub mod error;
pub mod fs_metric;
pub mod geomkit;
pub mod hkqk_core;
pub mod rigid_cmap;
pub mod special_kahler;

pub use error::{Error, Result};
