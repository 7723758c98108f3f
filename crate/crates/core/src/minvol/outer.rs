use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::newton::{add_wall, near_wall, wall_value, BarrierOptions, DECREMENT_FLOOR};
use super::objective::{objective_eval, objective_f, require_deterministic};
use super::MinVolProblem;
use crate::error::{Error, Result};
use crate::integrate::QuadratureConfig;
use crate::linalg::{inverse_pd, log_det_pd, min_eigenvalue, smat, svec};
use crate::phf::{HomoPoly, MonomialBasis, Poly};

/// Gram matrices of the certificate `1 − g = v₀ᵀX₀v₀ + Σ_j u_j v_jᵀX_jv_j`.
#[derive(Clone, Debug)]
pub struct GramBlocks {
    pub x: Vec<DMatrix<f64>>,
    pub bases: Vec<MonomialBasis>,
    /// The multiplier of each block: 1 for X₀, then u_j.
    pub weights: Vec<Poly>,
    /// max over coefficients γ of the certificate's residual.
    pub equality_residual: f64,
    pub min_eigenvalues: Vec<f64>,
}

impl GramBlocks {
    /// σ₀ + Σ_j σ_j u_j rebuilt from the blocks.
    pub fn certificate(&self) -> Poly {
        let n = self.weights[0].n();
        self.x.iter().zip(&self.bases).zip(&self.weights).fold(Poly::zero(n), |acc, ((x, b), w)| {
            &acc + &(&Poly::from_gram(b, x) * w)
        })
    }
}

#[derive(Clone, Debug)]
pub struct OuterSolution {
    pub k: u32,
    pub rho: f64,
    pub vol: f64,
    pub g: HomoPoly,
    pub blocks: GramBlocks,
    pub newton_steps: usize,
    pub stages: usize,
    pub t: f64,
    pub wall_hit: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OuterSummary {
    pub k: u32,
    pub rho: f64,
    pub vol: f64,
    pub g: crate::phf::PolyRecord,
    pub equality_residual: f64,
    pub suboptimality_bound: f64,
    pub block_min_eigenvalues: Vec<f64>,
    pub newton_steps: usize,
    pub stages: usize,
    pub wall_hit: bool,
}

impl OuterSolution {
    /// θ/t with θ the total Gram block size: the barrier minimizer exceeds
    /// ρ'_k by at most this much.
    pub fn suboptimality_bound(&self) -> f64 {
        self.blocks.x.iter().map(|x| x.nrows()).sum::<usize>() as f64 / self.t
    }

    pub fn summary(&self) -> OuterSummary {
        OuterSummary {
            k: self.k,
            rho: self.rho,
            vol: self.vol,
            g: crate::phf::PolyRecord::from_poly(&self.g),
            equality_residual: self.blocks.equality_residual,
            suboptimality_bound: self.suboptimality_bound(),
            block_min_eigenvalues: self.blocks.min_eigenvalues.clone(),
            newton_steps: self.newton_steps,
            stages: self.stages,
            wall_hit: self.wall_hit,
        }
    }
}

/// Variable layout: g's coefficients, then svec of every Gram block.
struct Layout {
    coeff_basis: MonomialBasis,
    bases: Vec<MonomialBasis>,
    weights: Vec<Poly>,
    offsets: Vec<usize>,
    len: usize,
}

impl Layout {
    fn new(prob: &MinVolProblem, k: u32) -> Self {
        let n = prob.n;
        let mut bases = vec![MonomialBasis::up_to(n, k)];
        let mut weights = vec![Poly::constant(n, 1.0)];
        for u in &prob.u_list {
            let v = u.degree().div_ceil(2);
            if v <= k {
                bases.push(MonomialBasis::up_to(n, k - v));
                weights.push(u.clone());
            }
        }
        let coeff_basis = prob.coeff_basis();
        let mut offsets = Vec::with_capacity(bases.len());
        let mut len = coeff_basis.len();
        for b in &bases {
            offsets.push(len);
            len += b.len() * (b.len() + 1) / 2;
        }
        Layout { coeff_basis, bases, weights, offsets, len }
    }

    fn ncoeff(&self) -> usize {
        self.coeff_basis.len()
    }

    fn block(&self, x: &[f64], j: usize) -> DMatrix<f64> {
        let s = self.bases[j].len();
        smat(&x[self.offsets[j]..self.offsets[j] + s * (s + 1) / 2], s)
    }

    fn barrier_dim(&self) -> f64 {
        self.bases.iter().map(|b| b.len() as f64).sum()
    }

    /// Rows: coefficients γ, |γ| <= 2k, of g + σ₀ + Σ σ_j u_j.
    fn equalities(&self, k: u32) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.coeff_basis.n();
        let rows = MonomialBasis::up_to(n, 2 * k);
        let mut a = DMatrix::zeros(rows.len(), self.len);
        for (i, e) in self.coeff_basis.monomials().iter().enumerate() {
            a[(rows.index_of(e).expect("2d <= 2k"), i)] = 1.0;
        }
        for (j, basis) in self.bases.iter().enumerate() {
            let s = basis.len();
            let mut col = self.offsets[j];
            for q in 0..s {
                for p in q..s {
                    let factor = if p == q { 1.0 } else { std::f64::consts::SQRT_2 };
                    let ab = basis.get(p).add(basis.get(q));
                    for (delta, coeff) in self.weights[j].terms() {
                        let row = rows.index_of(&ab.add(delta)).expect("degree within 2k");
                        a[(row, col)] += factor * coeff;
                    }
                    col += 1;
                }
            }
        }
        let mut b = DVector::zeros(rows.len());
        b[0] = 1.0;
        (a, b)
    }
}

struct OuterBarrier<'a> {
    layout: &'a Layout,
    cfg: &'a QuadratureConfig,
    t: f64,
    wall: f64,
}

impl OuterBarrier<'_> {
    fn poly(&self, x: &[f64]) -> HomoPoly {
        HomoPoly::from_coeffs(&self.layout.coeff_basis, &x[..self.layout.ncoeff()]).expect("layout")
    }

    fn value(&self, x: &[f64]) -> Option<f64> {
        let mut f = wall_value(&x[..self.layout.ncoeff()], self.wall)?;
        for j in 0..self.layout.bases.len() {
            f -= log_det_pd(&self.layout.block(x, j))?;
        }
        let obj = objective_f(&self.poly(x), self.cfg);
        obj.is_finite().then(|| f + self.t * obj)
    }

    fn derivatives(&self, x: &[f64]) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let nc = self.layout.ncoeff();
        let ev = objective_eval(&self.poly(x), self.cfg)?;
        let mut f = self.t * ev.value;
        let mut g = DVector::zeros(self.layout.len);
        let mut h = DMatrix::zeros(self.layout.len, self.layout.len);
        for i in 0..nc {
            g[i] = self.t * ev.grad[i];
            for j in 0..nc {
                h[(i, j)] = self.t * ev.hess[(i, j)];
            }
        }
        let mut gc = DVector::zeros(nc);
        let mut hc = DMatrix::zeros(nc, nc);
        if !add_wall(&x[..nc], self.wall, &mut f, &mut gc, &mut hc) {
            return Err(Error::InvalidInput("iterate left the coefficient box".into()));
        }
        for i in 0..nc {
            g[i] += gc[i];
            h[(i, i)] += hc[(i, i)];
        }
        for j in 0..self.layout.bases.len() {
            let xj = self.layout.block(x, j);
            let s = xj.nrows();
            f -= log_det_pd(&xj).ok_or(Error::NotPositiveDefinite(min_eigenvalue(&xj)))?;
            let inv = inverse_pd(&xj).ok_or(Error::NotPositiveDefinite(min_eigenvalue(&xj)))?;
            let off = self.layout.offsets[j];
            let m = s * (s + 1) / 2;
            for (p, v) in svec(&inv).into_iter().enumerate() {
                g[off + p] = -v;
            }
            let mut unit = vec![0.0; m];
            for p in 0..m {
                unit[p] = 1.0;
                let e = smat(&unit, s);
                unit[p] = 0.0;
                let col = svec(&(&inv * e * &inv));
                for (q, v) in col.into_iter().enumerate() {
                    h[(off + q, off + p)] = v;
                }
            }
        }
        Ok((f, g, h))
    }
}

fn kkt_step(
    h: &DMatrix<f64>,
    a: &DMatrix<f64>,
    grad: &DVector<f64>,
    primal_res: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>)> {
    let (nv, ne) = (h.nrows(), a.nrows());
    let mut kkt = DMatrix::zeros(nv + ne, nv + ne);
    kkt.view_mut((0, 0), (nv, nv)).copy_from(h);
    kkt.view_mut((0, nv), (nv, ne)).copy_from(&a.transpose());
    kkt.view_mut((nv, 0), (ne, nv)).copy_from(a);
    let mut rhs = DVector::zeros(nv + ne);
    rhs.rows_mut(0, nv).copy_from(&(-grad));
    rhs.rows_mut(nv, ne).copy_from(&(-primal_res));
    // Symmetric diagonal equilibration, then one step of iterative refinement.
    let scale = DVector::from_fn(nv + ne, |i, _| {
        let d = if i < nv { kkt[(i, i)].abs() } else { a.row(i - nv).norm_squared() };
        if d > 0.0 { 1.0 / d.sqrt().sqrt() } else { 1.0 }
    });
    let scaled = DMatrix::from_fn(nv + ne, nv + ne, |i, j| scale[i] * kkt[(i, j)] * scale[j]);
    let lu = scaled.lu();
    let solve = |r: &DVector<f64>| lu.solve(&r.component_mul(&scale)).map(|y| y.component_mul(&scale));
    let mut sol = solve(&rhs)?;
    let resid = &rhs - &kkt * &sol;
    sol += solve(&resid)?;
    Some((sol.rows(0, nv).into_owned(), sol.rows(nv, ne).into_owned()))
}

/// Upper bound ρ'_k: minimize F(g) subject to 1 − g = σ₀ + Σ_j σ_j u_j with
/// SOS σ_j and deg σ_j u_j <= 2k.
///
/// Log-barrier path following on `t F(g) − Σ_j log det X_j` over the Gram
/// matrices X_j, with the coefficient equalities enforced by an
/// infeasible-start Newton method on the KKT system.
pub fn solve_outer(prob: &MinVolProblem, k: u32, cfg: &QuadratureConfig) -> Result<OuterSolution> {
    solve_outer_with(prob, k, cfg, &BarrierOptions::default())
}

pub fn solve_outer_with(
    prob: &MinVolProblem,
    k: u32,
    cfg: &QuadratureConfig,
    opts: &BarrierOptions,
) -> Result<OuterSolution> {
    require_deterministic(cfg)?;
    prob.check_dimension()?;
    if k < prob.d() {
        return Err(Error::InvalidInput(format!(
            "outer order k = {k} cannot represent g of degree {}; need k >= {}",
            prob.two_d,
            prob.d()
        )));
    }
    let layout = Layout::new(prob, k);
    let (a, b) = layout.equalities(k);
    let mut x = vec![0.0; layout.len];
    x[..layout.ncoeff()].copy_from_slice(&prob.slater_start().coeffs(&layout.coeff_basis)?);
    for (j, basis) in layout.bases.iter().enumerate() {
        let id = svec(&DMatrix::identity(basis.len(), basis.len()));
        x[layout.offsets[j]..layout.offsets[j] + id.len()].copy_from_slice(&id);
    }
    let mut dual = DVector::zeros(a.nrows());
    let mut barrier = OuterBarrier { layout: &layout, cfg, t: opts.nu0, wall: opts.coeff_wall };
    if barrier.value(&x).is_none() {
        return Err(Error::InfeasibleStart);
    }
    let theta = layout.barrier_dim();
    let b_scale = 1.0 + b.amax();
    let mut newton_steps = 0;
    let mut stages = 0;
    let mut feasible = false;

    loop {
        let mut centered = false;
        for _ in 0..opts.max_newton_per_stage {
            let xv = DVector::from_column_slice(&x);
            let primal = &a * &xv - &b;
            if primal.amax() <= 1e-10 * b_scale {
                feasible = true;
            }
            let (f, grad, h) = barrier.derivatives(&x)?;
            let (dx, w_new) = kkt_step(&h, &a, &grad, &primal)
                .ok_or_else(|| Error::NoProgress(format!("singular KKT system at t = {:e}", barrier.t)))?;
            newton_steps += 1;
            if feasible {
                let dec = dx.dot(&(&h * &dx));
                if dec / 2.0 <= opts.newton_tol {
                    centered = true;
                    break;
                }
                let slope = grad.dot(&dx);
                let mut s = 1.0;
                let mut accepted = None;
                while s >= 1e-14 {
                    let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(p, q)| p + s * q).collect();
                    if let Some(ft) = barrier.value(&trial) {
                        if ft <= f + opts.armijo * s * slope {
                            accepted = Some((trial, ft));
                            break;
                        }
                    }
                    s *= opts.backtrack;
                }
                match accepted {
                    Some((trial, ft)) => {
                        x = trial;
                        dual = w_new;
                        // Round-off floor: f no longer moves at this scale of t.
                        if dec < DECREMENT_FLOOR && f - ft <= 1e-13 * f.abs() {
                            centered = true;
                            break;
                        }
                    }
                    None if dec < DECREMENT_FLOOR => {
                        centered = true;
                        break;
                    }
                    None => {
                        return Err(Error::NoProgress(format!(
                            "line search failed at t = {:e} (decrement {dec:e})",
                            barrier.t
                        )))
                    }
                }
            } else {
                // Infeasible start: backtrack on the KKT residual norm.
                let dw = &w_new - &dual;
                let residual = |xs: &[f64], w: &DVector<f64>| -> Option<f64> {
                    barrier.value(xs)?;
                    let (_, g2, _) = barrier.derivatives(xs).ok()?;
                    let xv = DVector::from_column_slice(xs);
                    let dual_res = g2 + a.transpose() * w;
                    let primal_res = &a * xv - &b;
                    Some((dual_res.norm_squared() + primal_res.norm_squared()).sqrt())
                };
                let r0 = residual(&x, &dual).ok_or(Error::InfeasibleStart)?;
                let mut s = 1.0;
                let mut accepted = false;
                while s >= 1e-14 {
                    let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(p, q)| p + s * q).collect();
                    let wt = &dual + &dw * s;
                    if let Some(rt) = residual(&trial, &wt) {
                        if rt <= (1.0 - 0.01 * s) * r0 {
                            x = trial;
                            dual = wt;
                            accepted = true;
                            break;
                        }
                    }
                    s *= opts.backtrack;
                }
                if !accepted {
                    return Err(Error::NoProgress("no step reduces the equality residual".into()));
                }
            }
        }
        if !centered {
            return Err(Error::NoProgress(format!("centering did not converge at t = {:e}", barrier.t)));
        }
        stages += 1;
        if theta / barrier.t < opts.gap_tol {
            break;
        }
        barrier.t *= opts.growth;
    }

    let xv = DVector::from_column_slice(&x);
    let equality_residual = (&a * xv - &b).amax();
    let g = barrier.poly(&x);
    let rho = objective_f(&g, cfg);
    let xs: Vec<DMatrix<f64>> = (0..layout.bases.len()).map(|j| layout.block(&x, j)).collect();
    let min_eigenvalues = xs.iter().map(min_eigenvalue).collect();
    Ok(OuterSolution {
        k,
        rho,
        vol: prob.volume_from_rho(rho),
        wall_hit: near_wall(&x[..layout.ncoeff()], opts.coeff_wall),
        g,
        blocks: GramBlocks {
            x: xs,
            bases: layout.bases.clone(),
            weights: layout.weights.clone(),
            equality_residual,
            min_eigenvalues,
        },
        newton_steps,
        stages,
        t: barrier.t,
    })
}
