//! Sublevel sets of positively homogeneous functions.
//!
//! For a positively homogeneous function `g` of degree `d` with bounded
//! sublevel set, the volume of `{g <= y}` and integrals of homogeneous
//! weights over it are fixed multiples of the non-Gaussian integral
//! `∫ exp(-g)`. This crate evaluates those integrals through a radial and
//! spherical reduction, checks the related closed-form identities, and uses
//! the volume formula to compute minimum-volume polynomial sublevel sets
//! containing a compact body, bracketed by a moment (inner) and a
//! sum-of-squares (outer) hierarchy.
//!
//! Module map:
//!
//! - [`phf`]: exponents, monomial bases, homogeneous polynomials and general
//!   positively homogeneous function handles.
//! - [`integrate`]: spherical quadrature and Monte Carlo engines.
//! - [`levelset`]: sublevel volumes, weighted integrals and identity checks.
//! - [`moments`]: bodies, moment sequences, moment and localizing matrices.
//! - [`minvol`]: the volume objective and the two relaxation hierarchies.
//! - [`polarity`]: numeric conjugates and polar volumes.
//! - [`gausslike`]: the determinant-weighted integral and its critical points.
//! - [`cli`]: the command-line front end and its reports.

pub mod cli;
pub mod error;
pub mod gausslike;
pub mod integrate;
pub mod levelset;
pub mod linalg;
pub mod minvol;
pub mod moments;
pub mod phf;
pub mod polarity;
pub mod special;

pub use error::{Error, Result};
pub use integrate::{IntegralEstimate, QuadratureConfig, QuadratureMethod};
pub use phf::{Exponent, HomoPoly, MonomialBasis, Phf, Poly};
pub use levelset::{identity_suite, integrate_h_on_sublevel, volume_sublevel, IdentityReport, SublevelReport};
pub use minvol::{solve_inner, solve_outer, MinVolProblem};
pub use moments::{lebesgue_moments, BodyK, MomentSeq};
