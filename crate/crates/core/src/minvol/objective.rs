use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrate::{QuadratureConfig, QuadratureMethod, SphereValues};
use crate::linalg::SymMatrixView;
use crate::phf::{Exponent, HomoPoly, MonomialBasis, Phf};

/// F(g) = ∫ exp(-g) dx, or +∞ when g is not coercive.
pub fn objective_f(g: &HomoPoly, cfg: &QuadratureConfig) -> f64 {
    match SphereValues::new(&Phf::polynomial(g.clone()), cfg) {
        Ok(sv) => sv.exp_moments(g.degree() as f64, &[Exponent::zero(g.n())])[0],
        Err(_) => f64::INFINITY,
    }
}

/// Value, gradient and Hessian of F in the coefficients of g over the pure
/// basis of degree deg g.
#[derive(Clone, Debug)]
pub struct ObjectiveEval {
    pub value: f64,
    /// -∫ x^α exp(-g).
    pub grad: Vec<f64>,
    /// ∫ x^{α+β} exp(-g).
    pub hess: DMatrix<f64>,
    /// ∫ x^α exp(-g), the negated gradient.
    pub moments: Vec<f64>,
}

pub(crate) fn require_deterministic(cfg: &QuadratureConfig) -> Result<()> {
    if cfg.method != QuadratureMethod::SphereProductGauss {
        return Err(Error::InvalidInput(
            "derivatives of the volume objective need the deterministic product rule".into(),
        ));
    }
    Ok(())
}

/// One quadrature pass for F, ∇F and ∇²F.
pub fn objective_eval(g: &HomoPoly, cfg: &QuadratureConfig) -> Result<ObjectiveEval> {
    require_deterministic(cfg)?;
    let n = g.n();
    let d = g.degree();
    let sv = SphereValues::new(&Phf::polynomial(g.clone()), cfg)?;
    let basis = MonomialBasis::pure(n, d);
    let hess_basis = MonomialBasis::pure(n, 2 * d);
    let mut exps = vec![Exponent::zero(n)];
    exps.extend(basis.monomials().iter().cloned());
    exps.extend(hess_basis.monomials().iter().cloned());
    let vals = sv.exp_moments(d as f64, &exps);
    let l = basis.len();
    let moments: Vec<f64> = vals[1..=l].to_vec();
    let high = &vals[l + 1..];
    let hess = DMatrix::from_fn(l, l, |i, j| {
        let e = basis.get(i).add(basis.get(j));
        high[hess_basis.index_of(&e).expect("degree 2d exponent")]
    });
    Ok(ObjectiveEval { value: vals[0], grad: moments.iter().map(|m| -m).collect(), hess, moments })
}

pub fn objective_grad(g: &HomoPoly, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    Ok(objective_eval(g, cfg)?.grad)
}

pub fn objective_hess(g: &HomoPoly, cfg: &QuadratureConfig) -> Result<SymMatrixView> {
    let h = objective_eval(g, cfg)?.hess;
    SymMatrixView::new(MonomialBasis::pure(g.n(), g.degree()), h)
}
