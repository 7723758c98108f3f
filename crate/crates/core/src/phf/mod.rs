//! Homogeneous polynomials and general positively homogeneous functions.

mod exponent;
mod format;
mod handle;
mod poly;

pub use exponent::{exponents_of_degree, Exponent, MonomialBasis};
pub use format::{parse_poly, poly_to_string, GeneralPolyRecord, PolyRecord, TermRecord};
pub use handle::{check_sublevel_bounded, sphere_directions, Boundedness, Phf, PhfKind};
pub use poly::{HomoPoly, Poly};

use crate::error::Result;

/// Σ_α p_α x^α.
pub fn eval_poly(p: &HomoPoly, x: &[f64]) -> Result<f64> {
    p.eval(x)
}

/// Analytic gradient of `p` at `x`.
pub fn grad_poly(p: &HomoPoly, x: &[f64]) -> Result<Vec<f64>> {
    p.grad(x)
}
