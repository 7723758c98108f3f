//! Lebesgue moments of bodies and their moment and localizing matrices.

use homolevel::moments::{lebesgue_moments, localizing_matrix, moment_matrix, BodyK};
use homolevel::{Poly, QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);
    let bodies = [
        ("square", BodyK::cube(2, 1.0)),
        ("disk", BodyK::unit_ball(2)),
        ("triangle", BodyK::Simplex { vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]] }),
    ];
    for (name, body) in &bodies {
        let z = lebesgue_moments(body, 6, &cfg)?;
        let m = moment_matrix(&z, 2)?;
        let u = body.inequalities()?;
        let loc = localizing_matrix(&u[0], &z, 2)?;
        println!(
            "{name}: mass {:.10}, M_2 size {} min eig {:.3e}, localizing min eig {:.3e}",
            z.values()[0],
            m.size(),
            m.min_eigenvalue(),
            loc.min_eigenvalue()
        );
    }

    // A polynomial negative somewhere on the disk has an indefinite localizing matrix.
    let z = lebesgue_moments(&BodyK::unit_ball(2), 6, &cfg)?;
    let p = &Poly::constant(2, 0.25) - &Poly::variable(2, 0).pow(2);
    println!("localizing matrix of 1/4 - x²: min eig {:.3e}", localizing_matrix(&p, &z, 2)?.min_eigenvalue());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
