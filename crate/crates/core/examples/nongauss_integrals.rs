//! ∫ h exp(-g) over ℝⁿ by the spherical reduction, checked against Monte Carlo.

use homolevel::integrate::{exp_moments, nongauss_integral};
use homolevel::{Exponent, HomoPoly, Phf, QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let g = Phf::polynomial(HomoPoly::new(
        2,
        4,
        [
            (Exponent::new(vec![4, 0]), 1.0),
            (Exponent::new(vec![2, 2]), 0.5),
            (Exponent::new(vec![0, 4]), 2.0),
        ],
    )?);
    let weights = [
        ("1", Phf::constant(2, 1.0)),
        ("x1^2", Phf::polynomial(HomoPoly::monomial(Exponent::new(vec![2, 0]), 1.0)?)),
        ("|x|^2", Phf::polynomial(HomoPoly::norm_power(2, 1))),
    ];
    let gauss = QuadratureConfig::default_for(2);
    let mc = QuadratureConfig::monte_carlo(200_000, 7);
    for (name, h) in &weights {
        let det = nongauss_integral(h, &g, &gauss)?;
        let rnd = nongauss_integral(h, &g, &mc)?;
        println!("h = {name}: product rule {:.10}, Monte Carlo {:.5} ± {:.5}", det.value, rnd.value, rnd.std_error);
    }

    let exps: Vec<Exponent> = homolevel::MonomialBasis::pure(2, 4).monomials().to_vec();
    let m = exp_moments(&g, &exps, &gauss)?;
    for (e, v) in exps.iter().zip(&m) {
        println!("∫ x^{:?} exp(-g) = {v:.10}", e.as_slice());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
