//! θ_d(Σ) = det(Σ)^k ∫ exp(-k ṽ_dᵀΣṽ_d), its trace identity and a critical Σ.

use homolevel::gausslike::{critical_residual, find_critical_sigma, theta_d, trace_identity_residual, SigmaForm};
use homolevel::{QuadratureConfig, Result};

pub fn run() -> Result<()> {
    for (n, d) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let cfg = QuadratureConfig::default_for(n);
        let sf = SigmaForm::identity(n, d)?;
        println!(
            "n = {n}, d = {d}: θ(I) = {:.10}, trace residual {:.1e}, critical residual {:.2e}",
            theta_d(&sf, &cfg)?,
            trace_identity_residual(&sf, &cfg)?,
            critical_residual(&sf, &cfg)?
        );
    }
    let cfg = QuadratureConfig::default_for(2);
    let found = find_critical_sigma(&SigmaForm::identity(2, 2)?, 200, &cfg)?;
    println!("critical search: {} iterations, residual {:.2e}", found.iterations, found.residual);
    for row in found.sigma.sigma().to_rows() {
        println!("  {:?}", row.iter().map(|v| format!("{v:+.5}")).collect::<Vec<_>>());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
