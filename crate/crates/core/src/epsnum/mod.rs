//! ε-complex arithmetic and jet-based forward-mode differentiation.

mod eps;
pub mod fd;
mod jet;

pub use eps::{eps_mul, EpsComplex, Real, Sign, ZERO_DIVISOR_TOL};
pub use fd::{compare_jets, compare_with_fd, default_step, derivative_tuples, fd_partial, richardson, FdComparison};
pub use jet::{jet_lift, seed, Jet, JetSpace, MAX_ORDER};
