use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::integrate::{exp_moments, QuadratureConfig};
use crate::linalg::nnls;
use crate::moments::{BodyK, MomentSeq};
use crate::phf::{HomoPoly, MonomialBasis, Phf, Poly};
use crate::special::binomial;

use super::MinVolProblem;

/// The candidate multiplier measure μ on K.
#[derive(Clone, Debug)]
pub enum Multiplier {
    /// Nonnegative atoms on the detected contact points, fitted by NNLS to
    /// the moments ∫ x^α e^{-g}, |α| = 2d.
    FitOnContacts,
    /// Explicit atoms (point, weight).
    Atoms(Vec<(Vec<f64>, f64)>),
    /// σ dν for a polynomial density σ and a measure ν with moments z.
    Sos { sigma: Poly, z: MomentSeq },
}

#[derive(Clone, Debug)]
pub struct ContactOptions {
    /// Grid resolution per axis for the ascent starting points.
    pub grid_per_axis: usize,
    /// |g(x) − 1| below this marks a contact point.
    pub contact_tol: f64,
    /// Contact points closer than this are merged.
    pub merge_radius: f64,
    pub max_ascent_steps: usize,
}

impl ContactOptions {
    pub fn for_dimension(n: usize) -> Self {
        ContactOptions {
            grid_per_axis: match n {
                1 => 201,
                2 => 41,
                _ => 13,
            },
            contact_tol: 1e-4,
            merge_radius: 1e-3,
            max_ascent_steps: 400,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KktReport {
    /// max over |α| = 2d of |∫ x^α e^{-g} − ∫ x^α dμ|.
    pub moment_residual: f64,
    /// The same, divided by max_α |∫ x^α e^{-g}|.
    pub relative_moment_residual: f64,
    /// ⟨1 − g, μ⟩.
    pub complementarity_gap: f64,
    /// Largest value of g found on K; 1 at a feasible optimum.
    pub max_g_on_body: f64,
    pub contact_points: Vec<Vec<f64>>,
    pub contact_count: usize,
    /// C(n + 2d − 1, 2d) + 1.
    pub contact_bound: usize,
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl KktReport {
    pub fn within_contact_bound(&self) -> bool {
        self.contact_count <= self.contact_bound
    }
}

/// Checks the optimality conditions of g for the minimum-volume problem:
/// ∫ x^α e^{-g} = ∫_K x^α dμ for |α| = 2d, ⟨1 − g, μ⟩ = 0, and locates the
/// contact set {x ∈ K : g(x) = 1} by grid search and projected ascent.
pub fn kkt_check(
    g: &HomoPoly,
    prob: &MinVolProblem,
    multiplier: &Multiplier,
    cfg: &QuadratureConfig,
    opts: &ContactOptions,
) -> Result<KktReport> {
    let basis = MonomialBasis::pure(prob.n, prob.two_d);
    let target = exp_moments(&Phf::polynomial(g.clone()), basis.monomials(), cfg)?;
    let (contact_points, max_g_on_body) = contact_points(g, &prob.body, opts);

    let (measure_moments, complementarity_gap, atoms) = match multiplier {
        Multiplier::FitOnContacts => {
            let a = DMatrix::from_fn(basis.len(), contact_points.len(), |i, j| {
                basis.get(i).monomial(&contact_points[j])
            });
            let w = if contact_points.is_empty() {
                DVector::zeros(0)
            } else {
                nnls(&a, &DVector::from_column_slice(&target))
            };
            let atoms: Vec<(Vec<f64>, f64)> =
                contact_points.iter().cloned().zip(w.iter().copied()).filter(|(_, w)| *w > 0.0).collect();
            let (m, gap) = atom_moments(&atoms, &basis, g);
            (m, gap, atoms)
        }
        Multiplier::Atoms(atoms) => {
            let (m, gap) = atom_moments(atoms, &basis, g);
            (m, gap, atoms.clone())
        }
        Multiplier::Sos { sigma, z } => {
            let m = basis
                .monomials()
                .iter()
                .map(|e| z.integrate(&(&Poly::monomial(e.clone(), 1.0) * sigma)))
                .collect::<Result<Vec<_>>>()?;
            let slack = &Poly::constant(prob.n, 1.0) - &g.to_poly();
            let gap = z.integrate(&(&slack * sigma))?;
            (m, gap, Vec::new())
        }
    };

    let moment_residual = target.iter().zip(&measure_moments).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = target.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(KktReport {
        moment_residual,
        relative_moment_residual: moment_residual / scale,
        complementarity_gap,
        max_g_on_body,
        contact_count: contact_points.len(),
        contact_points,
        contact_bound: binomial(prob.n + prob.two_d as usize - 1, prob.two_d as usize) + 1,
        atoms,
    })
}

fn atom_moments(atoms: &[(Vec<f64>, f64)], basis: &MonomialBasis, g: &HomoPoly) -> (Vec<f64>, f64) {
    let m = basis
        .monomials()
        .iter()
        .map(|e| atoms.iter().map(|(x, w)| w * e.monomial(x)).sum())
        .collect();
    let gap = atoms.iter().map(|(x, w)| w * (1.0 - g.value(x))).sum();
    (m, gap)
}

/// Euclidean projection onto the box or ball; false for other bodies.
fn project(body: &BodyK, x: &mut [f64]) -> bool {
    match body {
        BodyK::Box { lo, hi } => {
            for ((v, a), b) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(*a, *b);
            }
            true
        }
        BodyK::Ball { center, radius } => {
            let r = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
            if r > *radius {
                for (v, c) in x.iter_mut().zip(center) {
                    *v = c + (*v - c) * radius / r;
                }
            }
            true
        }
        _ => false,
    }
}

fn ascend(g: &HomoPoly, body: &BodyK, start: &[f64], opts: &ContactOptions) -> Vec<f64> {
    let (lo, hi) = body.bounding_box();
    let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let mut x = start.to_vec();
    let mut gx = g.value(&x);
    let mut step = 0.05 * diam;
    for _ in 0..opts.max_ascent_steps {
        let grad = g.grad(&x).expect("dimension checked");
        let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        loop {
            let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a + step * b / norm).collect();
            let inside = project(body, &mut trial) || body.contains(&trial);
            let gt = g.value(&trial);
            if inside && gt > gx + 1e-15 {
                x = trial;
                gx = gt;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-12 * diam {
                return x;
            }
        }
    }
    x
}

fn contact_points(g: &HomoPoly, body: &BodyK, opts: &ContactOptions) -> (Vec<Vec<f64>>, f64) {
    let grid = body.grid_points(opts.grid_per_axis);
    let grid_max = grid.iter().map(|x| g.value(x)).fold(f64::NEG_INFINITY, f64::max);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut max_g = grid_max;
    for x0 in grid.iter().filter(|x| g.value(x) >= 0.5 * grid_max) {
        let x = ascend(g, body, x0, opts);
        let gx = g.value(&x);
        max_g = max_g.max(gx);
        if (gx - 1.0).abs() > opts.contact_tol {
            continue;
        }
        let dup = found.iter().any(|y| y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < opts.merge_radius);
        if !dup {
            found.push(x);
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    (found, max_g)
}
