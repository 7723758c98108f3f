//! Lower bounds ρ_k on the minimum of ∫ exp(-g) over g with {g <= 1} ⊇ K.

use homolevel::minvol::{solve_inner, MinVolProblem};
use homolevel::moments::BodyK;
use homolevel::{QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);
    for (name, body, two_d) in [
        ("disk, 2d = 2", BodyK::unit_ball(2), 2),
        ("square, 2d = 2", BodyK::cube(2, 1.0), 2),
        ("square, 2d = 4", BodyK::cube(2, 1.0), 4),
    ] {
        let prob = MinVolProblem::new(body, two_d)?;
        for k in 1..=3 {
            let sol = solve_inner(&prob, k, &cfg)?;
            println!(
                "{name}, k = {k}: rho {:.8}, vol {:.8}, certificate gap {:.1e}, {} Newton steps",
                sol.rho, sol.vol, sol.cert.rho_identity_gap, sol.newton_steps
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
