//! Volumes of sublevel sets {g <= y} from the non-Gaussian integral ∫ exp(-g).

use homolevel::levelset::{volume_intersection, volume_sublevel};
use homolevel::{HomoPoly, Phf, QuadratureConfig, Result};
use nalgebra::DMatrix;

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);

    // Ellipse {½ xᵀQx <= 1}: compare with 2π/√det Q.
    let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let g = Phf::polynomial(HomoPoly::quadratic_form(&q, 0.5)?);
    let vol = volume_sublevel(&g, 1.0, &cfg)?;
    let expected = 2.0 * std::f64::consts::PI / q.determinant().sqrt();
    println!("ellipse: volume {:.12}, determinant law {:.12}", vol.value, expected);

    // {x⁴ + y⁴ <= 1}: Γ(1/4)²/Γ(1/2) = 3.708149...
    let quartic = Phf::polynomial(HomoPoly::new(
        2,
        4,
        [(homolevel::Exponent::new(vec![4, 0]), 1.0), (homolevel::Exponent::new(vec![0, 4]), 1.0)],
    )?);
    for y in [0.5, 1.0, 2.0] {
        let v = volume_sublevel(&quartic, y, &cfg)?;
        println!("x⁴ + y⁴ <= {y}: volume {:.12}", v.value);
    }

    // Intersection of {(½xᵀQx)² <= 1} with the quartic ball.
    let squared = HomoPoly::quadratic_form(&q, 0.5)?.to_poly().pow(2);
    let ellipse4 = Phf::polynomial(HomoPoly::new(2, 4, squared.terms().map(|(e, c)| (e.clone(), c)))?);
    let both = volume_intersection(&[ellipse4, quartic], 1.0, &cfg)?;
    println!("intersection volume {:.12}", both.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
