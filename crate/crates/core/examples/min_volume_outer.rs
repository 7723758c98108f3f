//! Upper bounds ρ'_k from SOS certificates of 1 - g on K, bracketing the inner bounds.

use homolevel::minvol::{solve_inner, solve_outer, MinVolProblem};
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
        let k0 = prob.d();
        for k in k0..=k0 + 1 {
            let outer = solve_outer(&prob, k, &cfg)?;
            let inner = solve_inner(&prob, k, &cfg)?;
            println!(
                "{name}, k = {k}: inner vol {:.8} <= outer vol {:.8} (equality residual {:.1e})",
                inner.vol, outer.vol, outer.blocks.equality_residual
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
