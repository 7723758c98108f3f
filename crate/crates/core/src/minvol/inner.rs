use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::newton::{add_wall, center, near_wall, wall_value, BarrierOptions, Centering};
use super::objective::{objective_eval, objective_f, require_deterministic};
use super::MinVolProblem;
use crate::error::{Error, Result};
use crate::integrate::QuadratureConfig;
use crate::linalg::{inverse_pd, log_det_pd, min_eigenvalue, SymMatrixView};
use crate::moments::{lebesgue_moments, localizing_matrix, moment_matrix, MomentSeq, MAX_MOMENT_DEGREE};
use crate::phf::{HomoPoly, MonomialBasis, Poly};

/// Dual certificate of an inner solve.
///
/// `delta` = (1/ν) M_k(1 − g, z)⁻¹ and `sigma` = v_kᵀ Δ v_k is the SOS
/// density of the multiplier measure σ dμ.
#[derive(Clone, Debug)]
pub struct KktCertificate {
    pub delta: SymMatrixView,
    pub sigma: Poly,
    /// ∫ σ dμ = ⟨Δ, M_k(z)⟩.
    pub sigma_integral: f64,
    /// ⟨Δ, M_k(1 − g, z)⟩.
    pub complementarity_gap: f64,
    /// max_α |∫ x^α e^{-g} − ⟨Δ, M_k(x^α, z)⟩| over |α| = 2d.
    pub gradient_residual: f64,
    /// |ρ_k − (2d/n) ∫ σ dμ| / ρ_k.
    pub rho_identity_gap: f64,
    pub delta_min_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub k: u32,
    pub rho: f64,
    pub vol: f64,
    pub g: HomoPoly,
    pub cert: KktCertificate,
    pub newton_steps: usize,
    pub stages: usize,
    pub nu: f64,
    pub wall_hit: bool,
}

/// Serializable summary of an inner solve.
#[derive(Clone, Debug, Serialize)]
pub struct InnerSummary {
    pub k: u32,
    pub rho: f64,
    pub vol: f64,
    pub g: crate::phf::PolyRecord,
    pub gradient_residual: f64,
    pub complementarity_gap: f64,
    pub rho_identity_gap: f64,
    pub sigma_integral: f64,
    pub newton_steps: usize,
    pub stages: usize,
    pub wall_hit: bool,
}

impl InnerSolution {
    pub fn summary(&self) -> InnerSummary {
        InnerSummary {
            k: self.k,
            rho: self.rho,
            vol: self.vol,
            g: crate::phf::PolyRecord::from_poly(&self.g),
            gradient_residual: self.cert.gradient_residual,
            complementarity_gap: self.cert.complementarity_gap,
            rho_identity_gap: self.cert.rho_identity_gap,
            sigma_integral: self.cert.sigma_integral,
            newton_steps: self.newton_steps,
            stages: self.stages,
            wall_hit: self.wall_hit,
        }
    }
}

/// ν F(g) − log det(A₀ − Σ c_α A_α) − Σ log(W² − c_α²).
struct InnerBarrier<'a> {
    basis: &'a MonomialBasis,
    a0: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    cfg: &'a QuadratureConfig,
    nu: f64,
    wall: f64,
}

impl InnerBarrier<'_> {
    fn lmi(&self, c: &[f64]) -> DMatrix<f64> {
        let mut l = self.a0.clone();
        for (ci, ai) in c.iter().zip(&self.a) {
            l -= ai * *ci;
        }
        l
    }

    fn poly(&self, c: &[f64]) -> HomoPoly {
        HomoPoly::from_coeffs(self.basis, c).expect("basis and coefficients agree")
    }
}

impl Centering for InnerBarrier<'_> {
    fn value(&self, c: &[f64]) -> Option<f64> {
        let logdet = log_det_pd(&self.lmi(c))?;
        let wall = wall_value(c, self.wall)?;
        let f = objective_f(&self.poly(c), self.cfg);
        f.is_finite().then(|| self.nu * f - logdet + wall)
    }

    fn derivatives(&self, c: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let l = self.lmi(c);
        let logdet = log_det_pd(&l).ok_or(Error::NotPositiveDefinite(min_eigenvalue(&l)))?;
        let linv = inverse_pd(&l).ok_or(Error::NotPositiveDefinite(min_eigenvalue(&l)))?;
        let ev = objective_eval(&self.poly(c), self.cfg)?;
        let m = c.len();
        let b: Vec<DMatrix<f64>> = self.a.iter().map(|ai| &linv * ai).collect();
        let mut f = self.nu * ev.value - logdet;
        let mut g = DVector::from_fn(m, |i, _| self.nu * ev.grad[i] + b[i].trace());
        let mut h = DMatrix::from_fn(m, m, |i, j| self.nu * ev.hess[(i, j)] + b[i].dot(&b[j].transpose()));
        if !add_wall(c, self.wall, &mut f, &mut g, &mut h) {
            return Err(Error::InvalidInput("iterate left the coefficient box".into()));
        }
        Ok((f, g, h))
    }

    fn nu(&self) -> f64 {
        self.nu
    }
}

/// Lower bound ρ_k: minimize F(g) subject to M_k(1 − g, z) ⪰ 0.
pub fn solve_inner(prob: &MinVolProblem, k: u32, cfg: &QuadratureConfig) -> Result<InnerSolution> {
    solve_inner_with(prob, k, cfg, &BarrierOptions::default())
}

pub(crate) fn moments_for(prob: &MinVolProblem, degree: u32, cfg: &QuadratureConfig) -> Result<MomentSeq> {
    match &prob.z {
        Some(z) if z.max_degree() >= degree => Ok(z.clone()),
        Some(z) => Err(Error::InsufficientMoments { needed: degree as usize, have: z.max_degree() as usize }),
        None => {
            if degree > MAX_MOMENT_DEGREE {
                return Err(Error::InvalidInput(format!(
                    "order needs moments of degree {degree}, above the supported {MAX_MOMENT_DEGREE}"
                )));
            }
            lebesgue_moments(&prob.body, degree, cfg)
        }
    }
}

pub fn solve_inner_with(
    prob: &MinVolProblem,
    k: u32,
    cfg: &QuadratureConfig,
    opts: &BarrierOptions,
) -> Result<InnerSolution> {
    require_deterministic(cfg)?;
    prob.check_dimension()?;
    let z = moments_for(prob, 2 * k + prob.two_d, cfg)?;
    let basis = prob.coeff_basis();
    let a0 = moment_matrix(&z, k)?.into_entries();
    let a = basis
        .monomials()
        .iter()
        .map(|e| Ok(localizing_matrix(&Poly::monomial(e.clone(), 1.0), &z, k)?.into_entries()))
        .collect::<Result<Vec<_>>>()?;
    let size = a0.nrows() as f64;

    let mut c = prob.slater_start().coeffs(&basis)?;
    let mut barrier = InnerBarrier { basis: &basis, a0, a, cfg, nu: opts.nu0, wall: opts.coeff_wall };
    if log_det_pd(&barrier.lmi(&c)).is_none() {
        return Err(Error::InfeasibleStart);
    }

    let mut newton_steps = 0;
    let mut stages = 0;
    loop {
        let (next, steps, _) = center(&barrier, &c, opts)?;
        c = next;
        newton_steps += steps;
        stages += 1;
        if size / barrier.nu < opts.gap_tol {
            break;
        }
        barrier.nu *= opts.growth;
    }

    let g = barrier.poly(&c);
    let ev = objective_eval(&g, cfg)?;
    let l = barrier.lmi(&c);
    let delta = inverse_pd(&l).ok_or(Error::NotPositiveDefinite(min_eigenvalue(&l)))? / barrier.nu;
    let gradient_residual = barrier
        .a
        .iter()
        .zip(&ev.moments)
        .map(|(ai, m)| (m - delta.dot(ai)).abs())
        .fold(0.0, f64::max);
    let sigma_integral = delta.dot(&barrier.a0);
    let rho = ev.value;
    let ratio = prob.two_d as f64 / prob.n as f64;
    let cert = KktCertificate {
        sigma: Poly::from_gram(&z_basis(&z, k), &delta),
        sigma_integral,
        complementarity_gap: delta.dot(&l),
        gradient_residual,
        rho_identity_gap: (rho - ratio * sigma_integral).abs() / rho,
        delta_min_eigenvalue: min_eigenvalue(&delta),
        delta: SymMatrixView::new(z_basis(&z, k), delta)?,
    };
    Ok(InnerSolution {
        k,
        rho,
        vol: prob.volume_from_rho(rho),
        g,
        cert,
        newton_steps,
        stages,
        nu: barrier.nu,
        wall_hit: near_wall(&c, opts.coeff_wall),
    })
}

fn z_basis(z: &MomentSeq, k: u32) -> MonomialBasis {
    MonomialBasis::up_to(z.n(), k)
}
