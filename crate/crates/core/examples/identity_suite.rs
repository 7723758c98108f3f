//! Euler-type and incomplete-gamma identities for a quartic and a weight.

use homolevel::levelset::identity_suite;
use homolevel::{Exponent, HomoPoly, Phf, QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);
    let g = Phf::polynomial(HomoPoly::new(
        2,
        4,
        [(Exponent::new(vec![4, 0]), 1.0), (Exponent::new(vec![1, 3]), 0.3), (Exponent::new(vec![0, 4]), 1.5)],
    )?);
    let h = Phf::polynomial(HomoPoly::monomial(Exponent::new(vec![2, 0]), 1.0)?);
    for r in identity_suite(&g, &h, 1.0, &cfg)? {
        println!("{:<18} lhs {:.12} rhs {:.12} residual {:.1e} pass {}", r.name, r.lhs, r.rhs, r.rel_residual, r.pass);
        if let Some(alt) = r.printed_constant_rhs {
            println!("{:<18} with 1/Γ((n+p)/d) the right-hand side would be {alt:.12}", "");
        }
    }

    // One dimension, g = x², h = 1, y = 1: ∫_{g<=1} g = 2/3, which only the
    // constant d/((n+p+d)Γ((n+p)/d)) reproduces.
    let g1 = Phf::polynomial(HomoPoly::norm_power(1, 1));
    let one = Phf::constant(1, 1.0);
    let euler = identity_suite(&g1, &one, 1.0, &QuadratureConfig::default_for(1))?
        .into_iter()
        .find(|r| r.name == "euler_sublevel")
        .expect("suite reports the sublevel identity");
    println!(
        "1-D check: lhs {:.6}, derived constant {:.6}, printed constant {:.6}",
        euler.lhs,
        euler.rhs,
        euler.printed_constant_rhs.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
