//! The determinant-weighted integral of an SOS form and its critical points.
//!
//! For Σ ≻ 0 over the degree-d monomials ṽ_d and k = n/(2d·ℓ(d)), with
//! ℓ(d) the number of such monomials,
//! `θ_d(Σ) = det(Σ)^k ∫ exp(-k ṽ_dᵀ Σ ṽ_d) dx`. It is invariant under
//! Σ → λΣ, its d-moment matrix M_d(Σ) satisfies ⟨M_d(Σ), Σ⟩ = ℓ(d), and
//! `∇θ_d = k θ_d (Σ⁻¹ − M_d(Σ))`, so Σ is critical exactly when the
//! normalized d-moments of exp(-g) equal Σ⁻¹.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{exp_moments, QuadratureConfig};
use crate::linalg::{inverse_pd, min_eigenvalue, symmetrize, SymMatrixView};
use crate::phf::{Exponent, HomoPoly, MonomialBasis, Phf, Poly};

/// A positive definite Σ over the pure degree-d basis in n variables.
#[derive(Clone, Debug)]
pub struct SigmaForm {
    d: u32,
    n: usize,
    sigma: SymMatrixView,
    k_const: f64,
}

impl SigmaForm {
    pub fn new(n: usize, d: u32, sigma: DMatrix<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput("need n >= 1 and d >= 1".into()));
        }
        let basis = MonomialBasis::pure(n, d);
        let sigma = SymMatrixView::new(basis, sigma)?;
        let min = sigma.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite(min));
        }
        let l = sigma.size() as f64;
        Ok(SigmaForm { d, n, sigma, k_const: n as f64 / (2.0 * d as f64 * l) })
    }

    pub fn identity(n: usize, d: u32) -> Result<Self> {
        let l = MonomialBasis::expected_len(n, d, true);
        Self::new(n, d, DMatrix::identity(l, l))
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &SymMatrixView {
        &self.sigma
    }

    /// k = n/(2d·ℓ(d)).
    pub fn k_const(&self) -> f64 {
        self.k_const
    }

    /// ℓ(d).
    pub fn ell(&self) -> usize {
        self.sigma.size()
    }

    /// g = k ṽ_dᵀ Σ ṽ_d, homogeneous of degree 2d.
    pub fn form(&self) -> HomoPoly {
        let p = Poly::from_gram(self.sigma.basis(), self.sigma.entries()).scale(self.k_const);
        HomoPoly::try_from(&p).expect("Gram form over a pure basis is homogeneous")
    }

    fn ln_det(&self) -> f64 {
        self.sigma.eigenvalues().iter().map(|v| v.ln()).sum()
    }
}

/// ∫ exp(-g) together with the d-moment matrix, from one quadrature pass.
fn integrals(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<(f64, DMatrix<f64>)> {
    let basis = sf.sigma.basis();
    let high = MonomialBasis::pure(sf.n, 2 * sf.d);
    let mut exps = vec![Exponent::zero(sf.n)];
    exps.extend(high.monomials().iter().cloned());
    let vals = exp_moments(&Phf::polynomial(sf.form()), &exps, cfg)?;
    let z = vals[0];
    let m = DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        let e = basis.get(i).add(basis.get(j));
        vals[1 + high.index_of(&e).expect("degree 2d")] / z
    });
    Ok((z, m))
}

/// θ_d(Σ) = det(Σ)^k ∫ exp(-k ṽ_dᵀ Σ ṽ_d).
pub fn theta_d(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<f64> {
    let (z, _) = integrals(sf, cfg)?;
    Ok((sf.k_const * sf.ln_det()).exp() * z)
}

/// M_d(Σ) = ∫ ṽ_d ṽ_dᵀ exp(-g) / ∫ exp(-g).
pub fn dmoment_matrix(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<SymMatrixView> {
    let (_, m) = integrals(sf, cfg)?;
    SymMatrixView::new(sf.sigma.basis().clone(), m)
}

/// ∇θ_d = k θ_d (Σ⁻¹ − M_d(Σ)), the derivative along each matrix entry.
pub fn theta_gradient(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<DMatrix<f64>> {
    let (z, m) = integrals(sf, cfg)?;
    let theta = (sf.k_const * sf.ln_det()).exp() * z;
    let inv = sigma_inverse(sf)?;
    Ok((inv - m) * (sf.k_const * theta))
}

/// ⟨M_d(Σ), Σ⟩ − ℓ(d).
pub fn trace_identity_residual(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<f64> {
    let m = dmoment_matrix(sf, cfg)?;
    Ok(m.entries().dot(sf.sigma.entries()) - sf.ell() as f64)
}

fn sigma_inverse(sf: &SigmaForm) -> Result<DMatrix<f64>> {
    inverse_pd(sf.sigma.entries()).ok_or(Error::NotPositiveDefinite(sf.sigma.min_eigenvalue()))
}

/// ‖M_d(Σ) − Σ⁻¹‖_F / ‖Σ⁻¹‖_F.
pub fn critical_residual(sf: &SigmaForm, cfg: &QuadratureConfig) -> Result<f64> {
    let (_, m) = integrals(sf, cfg)?;
    let inv = sigma_inverse(sf)?;
    Ok((m - &inv).norm() / inv.norm())
}

#[derive(Clone, Debug)]
pub struct CriticalSearch {
    pub sigma: SigmaForm,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual after each accepted iteration, starting with the initial one.
    pub history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalSummary {
    pub sigma: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl CriticalSearch {
    pub fn summary(&self) -> CriticalSummary {
        CriticalSummary {
            sigma: self.sigma.sigma.to_rows(),
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Residual below which Σ is reported as critical.
pub const CRITICAL_TOL: f64 = 1e-5;

/// Damped fixed-point iteration Σ ← Σ + τ(M_d(Σ)⁻¹ − Σ).
///
/// τ starts at 1, halves when the update loses definiteness or increases
/// the residual, and recovers by doubling after accepted steps. Σ is
/// normalized to trace ℓ(d) since θ_d and the criticality condition are
/// scale invariant. Non-convergence is reported, not raised.
pub fn find_critical_sigma(init: &SigmaForm, max_iters: usize, cfg: &QuadratureConfig) -> Result<CriticalSearch> {
    let normalize = |m: DMatrix<f64>| -> DMatrix<f64> {
        let l = m.nrows() as f64;
        let t = m.trace();
        symmetrize(&m) * (l / t)
    };
    let mut sf = SigmaForm::new(init.n, init.d, normalize(init.sigma.entries().clone()))?;
    let mut residual = critical_residual(&sf, cfg)?;
    let mut history = vec![residual];
    let mut tau: f64 = 1.0;
    let mut iterations = 0;
    while residual > CRITICAL_TOL && iterations < max_iters {
        iterations += 1;
        let (_, m) = integrals(&sf, cfg)?;
        let Some(target) = inverse_pd(&symmetrize(&m)) else {
            return Err(Error::NotPositiveDefinite(min_eigenvalue(&m)));
        };
        let mut accepted = false;
        while tau > 1e-6 {
            let step = sf.sigma.entries() + (&target - sf.sigma.entries()) * tau;
            let cand = normalize(step);
            if min_eigenvalue(&cand) > 0.0 {
                let next = SigmaForm::new(sf.n, sf.d, cand)?;
                let r = critical_residual(&next, cfg)?;
                if r < residual {
                    sf = next;
                    residual = r;
                    accepted = true;
                    tau = (2.0 * tau).min(1.0);
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(residual);
    }
    Ok(CriticalSearch { converged: residual <= CRITICAL_TOL, sigma: sf, residual, iterations, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg(n: usize) -> QuadratureConfig {
        QuadratureConfig::default_for(n)
    }

    fn random_pd(l: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(l, l, |_, _| rng.random::<f64>() - 0.5);
        &a * a.transpose() + DMatrix::identity(l, l) * 0.3
    }

    #[test]
    fn gaussian_case() {
        let sf = SigmaForm::identity(2, 1).unwrap();
        assert_relative_eq!(sf.k_const(), 0.5);
        assert_relative_eq!(theta_d(&sf, &cfg(2)).unwrap(), 2.0 * PI, max_relative = 1e-12);
        let diag = SigmaForm::new(2, 1, DMatrix::from_diagonal(&nalgebra::dvector![2.0, 1.0])).unwrap();
        assert_relative_eq!(theta_d(&diag, &cfg(2)).unwrap(), 2.0 * PI, max_relative = 1e-12);
        let m = dmoment_matrix(&diag, &cfg(2)).unwrap();
        assert_relative_eq!(m.entries()[(0, 0)], 0.5, max_relative = 1e-12);
        assert_relative_eq!(m.entries()[(1, 1)], 1.0, max_relative = 1e-12);
        assert!(m.entries()[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn quartic_identity_baseline_is_node_stable() {
        let sf = SigmaForm::identity(2, 2).unwrap();
        assert_relative_eq!(sf.k_const(), 1.0 / 6.0);
        let vals: Vec<f64> =
            [64, 128, 256].iter().map(|&m| theta_d(&sf, &QuadratureConfig::gauss(m)).unwrap()).collect();
        assert!((vals[0] - vals[2]).abs() < 1e-12 * vals[2] && (vals[1] - vals[2]).abs() < 1e-12 * vals[2]);
        // g = (x⁴ + x²y² + y⁴)/6, so θ = ∫ exp(-g) = Γ(1/2)/4 ∫ (g(θ))^{-1/2} dθ
        assert_relative_eq!(vals[2], 7.318_866_429_686_64, max_relative = 1e-10);
    }

    #[test]
    fn trace_identity_and_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (n, d) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let l = MonomialBasis::expected_len(n, d, true);
            for _ in 0..10 {
                let sf = SigmaForm::new(n, d, random_pd(l, &mut rng)).unwrap();
                assert!(trace_identity_residual(&sf, &cfg(n)).unwrap().abs() <= 1e-5);
                let t = theta_d(&sf, &cfg(n)).unwrap();
                for lam in [0.5, 2.0, 5.0] {
                    let scaled = SigmaForm::new(n, d, sf.sigma().entries() * lam).unwrap();
                    assert_relative_eq!(theta_d(&scaled, &cfg(n)).unwrap(), t, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn gaussian_moments_are_the_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let s = random_pd(2, &mut rng);
            let sf = SigmaForm::new(2, 1, s.clone()).unwrap();
            let m = dmoment_matrix(&sf, &cfg(2)).unwrap();
            let inv = s.try_inverse().unwrap();
            assert!((m.entries() - &inv).amax() <= 1e-10 * inv.amax());
            let found = find_critical_sigma(&sf, 10, &cfg(2)).unwrap();
            assert!(found.converged && found.iterations == 0);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sf = SigmaForm::new(2, 2, random_pd(3, &mut rng)).unwrap();
        let grad = theta_gradient(&sf, &cfg(2)).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            for j in i..3 {
                let shift = |s: f64| {
                    let mut m = sf.sigma().entries().clone();
                    m[(i, j)] += s;
                    if i != j {
                        m[(j, i)] += s;
                    }
                    theta_d(&SigmaForm::new(2, 2, m).unwrap(), &cfg(2)).unwrap()
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                let an = if i == j { grad[(i, j)] } else { 2.0 * grad[(i, j)] };
                assert!((fd - an).abs() <= 1e-3 * grad.amax(), "({i},{j}) fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn scalar_quartic_is_critical_everywhere() {
        // n = 1, d = 2: ℓ = 1, k = 1/4 and σ·m₂(σ) = 4·∫ g e^{-g}/∫ e^{-g} = 1 for every σ.
        for s in [0.3, 1.0, 7.0] {
            let sf = SigmaForm::new(1, 2, DMatrix::from_element(1, 1, s)).unwrap();
            let m = dmoment_matrix(&sf, &cfg(1)).unwrap().entries()[(0, 0)];
            assert_relative_eq!(s * m, 1.0, max_relative = 1e-12);
            // θ₂ = σ^{1/4} ∫ exp(-σx⁴/4) = 2Γ(5/4)·4^{1/4}
            let expected = 2.0 * gamma(1.25) * 4f64.powf(0.25);
            assert_relative_eq!(theta_d(&sf, &cfg(1)).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn rotation_invariant_quartic_is_critical() {
        let s = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, -1.0, 0.0, 8.0, 0.0, -1.0, 0.0, 3.0]);
        let sf = SigmaForm::new(2, 2, s).unwrap();
        assert!(critical_residual(&sf, &cfg(2)).unwrap() < 1e-10);
        let found = find_critical_sigma(&SigmaForm::identity(2, 2).unwrap(), 200, &cfg(2)).unwrap();
        assert!(found.converged, "residual {}", found.residual);
        let grad = theta_gradient(&found.sigma, &cfg(2)).unwrap();
        let theta = theta_d(&found.sigma, &cfg(2)).unwrap();
        assert!(grad.amax() <= 1e-4 * theta);
    }

    #[test]
    fn rejects_indefinite() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(SigmaForm::new(2, 1, s), Err(Error::NotPositiveDefinite(_))));
    }
}
