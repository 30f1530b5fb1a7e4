//! Quadrature, root finding and derivative-free minimisation.

mod quadrature;
mod roots;
mod simplex;

pub use quadrature::{integrate_adaptive, integrate_adaptive_vec, normal_expectation, normal_expectation_fixed, Integral};
pub use roots::brent_root;
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
