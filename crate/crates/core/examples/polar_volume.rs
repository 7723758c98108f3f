//! Numeric conjugates and polar volumes, checked against the support function.

use std::sync::Arc;

use homolevel::polarity::{conjugate_phf, polar_radius, polar_volume_mc, polar_volume_with};
use homolevel::{Exponent, HomoPoly, Phf, QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);
    let g = Phf::polynomial(HomoPoly::new(2, 4, [(Exponent::new(vec![4, 0]), 1.0), (Exponent::new(vec![0, 4]), 1.0)])?);
    let table = Arc::new(conjugate_phf(&g, None)?);
    println!("degree of the conjugate: {}", table.degree_q());
    for u in [[1.0f64, 0.0], [1.0, 1.0], [0.3, -2.0]] {
        let closed = 3.0 * (u[0].abs().powf(4.0 / 3.0) + u[1].abs().powf(4.0 / 3.0)) / 4f64.powf(4.0 / 3.0);
        println!("g*({:?}) = {:.8} (closed form {closed:.8})", u, table.eval(&u));
    }
    let vol = polar_volume_with(&table, &cfg)?;
    let (mc, se) = polar_volume_mc(&g, 400_000, 11)?;
    println!("polar volume {:.6}, support-function Monte Carlo {mc:.4} ± {se:.4}", vol.volume);
    println!(
        "polar radius on the x-axis {:.6}; 4^(1/4) = {:.6}, 4^(-1/4) = {:.6}",
        polar_radius(&g, &[1.0, 0.0]),
        4f64.powf(0.25),
        4f64.powf(-0.25)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
