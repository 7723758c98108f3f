//! Optimality check at the outer optimum: contact points and a multiplier measure.

use homolevel::minvol::{kkt_check, solve_outer, ContactOptions, MinVolProblem, Multiplier};
use homolevel::moments::BodyK;
use homolevel::{QuadratureConfig, Result};

pub fn run() -> Result<()> {
    let cfg = QuadratureConfig::default_for(2);
    let prob = MinVolProblem::new(BodyK::cube(2, 1.0), 2)?;
    let sol = solve_outer(&prob, 1, &cfg)?;
    let rep = kkt_check(&sol.g, &prob, &Multiplier::FitOnContacts, &cfg, &ContactOptions::for_dimension(2))?;
    println!("contact points ({} found, bound {}):", rep.contact_count, rep.contact_bound);
    for p in &rep.contact_points {
        println!("  ({:+.6}, {:+.6})", p[0], p[1]);
    }
    println!("moment residual {:.2e}, complementarity {:.2e}", rep.moment_residual, rep.complementarity_gap);
    for (x, w) in &rep.atoms {
        println!("  atom at ({:+.3}, {:+.3}) weight {w:.6}", x[0], x[1]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
