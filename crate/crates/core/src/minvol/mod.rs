//! Minimum-volume sublevel sets `{g <= 1}` of homogeneous polynomials of
//! degree 2d containing a compact body K.
//!
//! The volume is `F(g)/Γ(1 + n/2d)` with `F(g) = ∫ exp(-g)`, a convex
//! function of the coefficients. Two hierarchies of convex problems bracket
//! the minimum ρ:
//!
//! - [`solve_inner`] requires the localizing matrix `M_k(1 - g, z)` of a
//!   measure on K to be PSD, a relaxation of `g <= 1` on K, giving lower
//!   bounds ρ_k that increase with k;
//! - [`solve_outer`] requires `1 - g` to have an SOS certificate of degree 2k
//!   in the quadratic module of K's inequalities, a restriction, giving upper
//!   bounds ρ'_k that decrease with k.

mod inner;
mod kkt;
mod newton;
mod objective;
mod outer;

pub use inner::{solve_inner, solve_inner_with, InnerSolution, KktCertificate};
pub use kkt::{kkt_check, ContactOptions, KktReport, Multiplier};
pub use newton::BarrierOptions;
pub use objective::{objective_eval, objective_f, objective_grad, objective_hess, ObjectiveEval};
pub use outer::{solve_outer, solve_outer_with, GramBlocks, OuterSolution};

use crate::error::{Error, Result};
use crate::moments::{BodyK, MomentSeq};
use crate::phf::{HomoPoly, MonomialBasis, Poly};
use crate::special::gamma;

/// The body K, the degree 2d of g, and optionally a moment sequence of a
/// measure supported on K (Lebesgue moments are computed when absent).
#[derive(Clone, Debug)]
pub struct MinVolProblem {
    pub n: usize,
    pub two_d: u32,
    pub body: BodyK,
    pub z: Option<MomentSeq>,
    pub u_list: Vec<Poly>,
}

impl MinVolProblem {
    pub fn new(body: BodyK, two_d: u32) -> Result<Self> {
        if two_d < 2 || two_d % 2 == 1 {
            return Err(Error::InvalidInput(format!("degree 2d must be even and at least 2, got {two_d}")));
        }
        let u_list = body.inequalities()?;
        Ok(MinVolProblem { n: body.n(), two_d, body, z: None, u_list })
    }

    pub fn with_moments(mut self, z: MomentSeq) -> Result<Self> {
        if z.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.n() });
        }
        self.z = Some(z);
        Ok(self)
    }

    pub fn d(&self) -> u32 {
        self.two_d / 2
    }

    /// vol{g <= 1} = F(g)/Γ(1 + n/2d).
    pub fn volume_from_rho(&self, rho: f64) -> f64 {
        rho / gamma(1.0 + self.n as f64 / self.two_d as f64)
    }

    /// g₀ = ‖x‖^{2d}/M with M = 2 max_K ‖x‖^{2d}, so g₀ <= 1/2 on K.
    pub fn slater_start(&self) -> HomoPoly {
        let m = 2.0 * self.body.max_norm_power(self.d());
        HomoPoly::norm_power(self.n, self.d()).scaled(1.0 / m)
    }

    pub fn coeff_basis(&self) -> MonomialBasis {
        MonomialBasis::pure(self.n, self.two_d)
    }

    fn check_dimension(&self) -> Result<()> {
        if self.n > 3 {
            return Err(Error::InvalidInput(format!("the solvers support n <= 3, got n = {}", self.n)));
        }
        Ok(())
    }
}
