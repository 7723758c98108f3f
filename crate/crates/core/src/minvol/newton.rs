use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Path-following parameters shared by both solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierOptions {
    /// Initial weight ν on F.
    pub nu0: f64,
    /// ν ← growth·ν between centering stages.
    pub growth: f64,
    /// Stop when (barrier dimension)/ν drops below this.
    pub gap_tol: f64,
    /// Armijo sufficient-decrease fraction.
    pub armijo: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    /// Centering stops at λ²/2 below this.
    pub newton_tol: f64,
    pub max_newton_per_stage: usize,
    /// |g_α| <= coeff_wall is enforced by a log barrier.
    pub coeff_wall: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            nu0: 1.0,
            growth: 4.0,
            gap_tol: 1e-6,
            armijo: 0.25,
            backtrack: 0.5,
            newton_tol: 1e-9,
            max_newton_per_stage: 200,
            coeff_wall: 1e6,
        }
    }
}

/// Below this decrement a failed line search is float round-off, not a stall.
pub(crate) const DECREMENT_FLOOR: f64 = 1e-6;

/// A smooth convex barrier function for one value of ν.
pub(crate) trait Centering {
    /// φ(x), or None outside the domain.
    fn value(&self, x: &[f64]) -> Option<f64>;
    /// (φ, ∇φ, ∇²φ).
    fn derivatives(&self, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)>;
    fn nu(&self) -> f64;
}

/// Solves H Δ = rhs for a symmetric H that should be positive definite,
/// falling back to LU when Cholesky fails on round-off.
pub(crate) fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    h.clone().lu().solve(rhs)
}

/// Damped Newton centering. Returns the new point, the Newton steps taken
/// and the final decrement λ².
pub(crate) fn center<C: Centering>(c: &C, x0: &[f64], opts: &BarrierOptions) -> Result<(Vec<f64>, usize, f64)> {
    let mut x = x0.to_vec();
    let mut steps = 0;
    let mut last_dec = f64::INFINITY;
    for _ in 0..opts.max_newton_per_stage {
        let (f, g, h) = c.derivatives(&x)?;
        let delta = solve_spd(&h, &(-&g)).ok_or(Error::NewtonStall { nu: c.nu(), decrement: f64::NAN })?;
        let slope = g.dot(&delta);
        let dec = -slope;
        last_dec = dec;
        if !(dec.is_finite()) {
            return Err(Error::NewtonStall { nu: c.nu(), decrement: dec });
        }
        if dec / 2.0 <= opts.newton_tol {
            return Ok((x, steps, dec));
        }
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + t * b).collect();
            if let Some(ft) = c.value(&trial) {
                if ft <= f + opts.armijo * t * slope {
                    break Some(trial);
                }
            }
            t *= opts.backtrack;
            if t < 1e-14 {
                break None;
            }
        };
        steps += 1;
        match accepted {
            Some(trial) => x = trial,
            None if dec < DECREMENT_FLOOR => return Ok((x, steps, dec)),
            None => return Err(Error::NewtonStall { nu: c.nu(), decrement: dec }),
        }
    }
    if last_dec < DECREMENT_FLOOR {
        return Ok((x, steps, last_dec));
    }
    Err(Error::NewtonStall { nu: c.nu(), decrement: last_dec })
}

/// −Σ log(W² − x_i²) with its gradient and (diagonal) Hessian added in place.
pub(crate) fn add_wall(x: &[f64], wall: f64, f: &mut f64, g: &mut DVector<f64>, h: &mut DMatrix<f64>) -> bool {
    for (i, &v) in x.iter().enumerate() {
        let (a, b) = (wall - v, wall + v);
        if !(a > 0.0 && b > 0.0) {
            return false;
        }
        *f -= a.ln() + b.ln();
        g[i] += 1.0 / a - 1.0 / b;
        h[(i, i)] += 1.0 / (a * a) + 1.0 / (b * b);
    }
    true
}

pub(crate) fn wall_value(x: &[f64], wall: f64) -> Option<f64> {
    let mut f = 0.0;
    for &v in x {
        let (a, b) = (wall - v, wall + v);
        if !(a > 0.0 && b > 0.0) {
            return None;
        }
        f -= a.ln() + b.ln();
    }
    Some(f)
}

/// True when some coefficient came within 1% of the wall.
pub(crate) fn near_wall(x: &[f64], wall: f64) -> bool {
    x.iter().any(|v| v.abs() > 0.99 * wall)
}
