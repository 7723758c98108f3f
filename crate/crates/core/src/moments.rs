//! Compact bodies, their Lebesgue moments, and moment / localizing matrices.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{QuadratureConfig, QuadratureMethod, DEFAULT_MC_SAMPLES};
use crate::linalg::SymMatrixView;
use crate::phf::{Exponent, MonomialBasis, Poly};
use crate::special::{factorial, gamma};

/// Largest moment degree stored.
pub const MAX_MOMENT_DEGREE: u32 = 12;

/// A compact set with nonempty interior.
///
/// Text form: `{"kind": "box", "lo": [...], "hi": [...]}`,
/// `{"kind": "ball", "center": [...], "radius": r}`,
/// `{"kind": "simplex", "vertices": [[...], ...]}` or
/// `{"kind": "semialgebraic", "n": n, "constraints": [poly, ...]}` with
/// constraints `u_j(x) >= 0`, one of which must be `M - ‖x‖²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodyK {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { vertices: Vec<Vec<f64>> },
    Semialgebraic { n: usize, constraints: Vec<Poly> },
}

impl BodyK {
    pub fn cube(n: usize, half: f64) -> Self {
        BodyK::Box { lo: vec![-half; n], hi: vec![half; n] }
    }

    pub fn unit_ball(n: usize) -> Self {
        BodyK::Ball { center: vec![0.0; n], radius: 1.0 }
    }

    pub fn n(&self) -> usize {
        match self {
            BodyK::Box { lo, .. } => lo.len(),
            BodyK::Ball { center, .. } => center.len(),
            BodyK::Simplex { vertices } => vertices.first().map_or(0, |v| v.len()),
            BodyK::Semialgebraic { n, .. } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidInput("body dimension must be at least 1".into()));
        }
        match self {
            BodyK::Box { lo, hi } => {
                if hi.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: hi.len() });
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
                    return Err(Error::InvalidInput("box needs finite lo < hi on every axis".into()));
                }
            }
            BodyK::Ball { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("ball needs a finite center and positive radius".into()));
                }
            }
            BodyK::Simplex { vertices } => {
                if vertices.len() != n + 1 {
                    return Err(Error::InvalidInput(format!("simplex in dimension {n} needs {} vertices", n + 1)));
                }
                if let Some(v) = vertices.iter().find(|v| v.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
                let det = self.simplex_edges().expect("simplex").determinant();
                if !(det.abs() > 1e-12) {
                    return Err(Error::InvalidInput("simplex vertices are affinely dependent".into()));
                }
            }
            BodyK::Semialgebraic { constraints, .. } => {
                if let Some(c) = constraints.iter().find(|c| c.n() != n) {
                    return Err(Error::DimensionMismatch { expected: n, got: c.n() });
                }
                if self.archimedean_radius_sq().is_none() {
                    return Err(Error::InvalidInput(
                        "semialgebraic body needs a ball constraint M - |x|^2 >= 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn simplex_edges(&self) -> Option<DMatrix<f64>> {
        let BodyK::Simplex { vertices } = self else { return None };
        let n = self.n();
        Some(DMatrix::from_fn(n, n, |r, c| vertices[c + 1][r] - vertices[0][r]))
    }

    /// M when one of the constraints is exactly `M - ‖x‖²`.
    fn archimedean_radius_sq(&self) -> Option<f64> {
        let BodyK::Semialgebraic { n, constraints } = self else { return None };
        constraints.iter().find_map(|c| ball_constraint_radius_sq(c, *n))
    }

    /// An upper bound on ‖x‖² over the body, attained on the body for the
    /// box, ball and simplex kinds.
    pub fn max_norm_sq(&self) -> f64 {
        match self {
            BodyK::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (a * a).max(b * b)).sum(),
            BodyK::Ball { center, radius } => {
                let c = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                (c + radius).powi(2)
            }
            BodyK::Simplex { vertices } => {
                vertices.iter().map(|v| v.iter().map(|a| a * a).sum::<f64>()).fold(0.0, f64::max)
            }
            BodyK::Semialgebraic { .. } => self.archimedean_radius_sq().unwrap_or(f64::INFINITY),
        }
    }

    /// Max of ‖x‖^{2d} over the body.
    pub fn max_norm_power(&self, d: u32) -> f64 {
        self.max_norm_sq().powi(d as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            BodyK::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *v >= a - EPS && *v <= b + EPS),
            BodyK::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() <= radius * radius * (1.0 + EPS)
            }
            BodyK::Simplex { vertices } => {
                let a = self.simplex_edges().expect("simplex");
                let rhs = DVector::from_iterator(x.len(), x.iter().zip(&vertices[0]).map(|(v, o)| v - o));
                match a.lu().solve(&rhs) {
                    Some(lam) => lam.iter().all(|&l| l >= -EPS) && lam.sum() <= 1.0 + EPS,
                    None => false,
                }
            }
            BodyK::Semialgebraic { constraints, .. } => constraints.iter().all(|c| c.eval(x) >= -EPS),
        }
    }

    /// Axis-aligned box containing the body.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        match self {
            BodyK::Box { lo, hi } => (lo.clone(), hi.clone()),
            BodyK::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            BodyK::Simplex { vertices } => {
                let lo = (0..n).map(|i| vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..n).map(|i| vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            }
            BodyK::Semialgebraic { .. } => {
                let r = self.max_norm_sq().sqrt();
                (vec![-r; n], vec![r; n])
            }
        }
    }

    /// Points of a regular grid over the bounding box that lie in the body.
    pub fn grid_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounding_box();
        let n = self.n();
        let per_axis = per_axis.max(2);
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<f64> = (0..n)
                .map(|i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (per_axis - 1) as f64)
                .collect();
            if self.contains(&x) {
                out.push(x);
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    return out;
                }
                idx[pos] += 1;
                if idx[pos] < per_axis {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Defining inequalities u_j >= 0, the first one always `M - ‖x‖²`.
    pub fn inequalities(&self) -> Result<Vec<Poly>> {
        self.validate()?;
        let n = self.n();
        let norm_sq = (0..n).fold(Poly::zero(n), |acc, i| &acc + &Poly::monomial(Exponent::unit(n, i, 2), 1.0));
        let ball = |m: f64| &Poly::constant(n, m) - &norm_sq;
        let mut out = Vec::new();
        match self {
            BodyK::Box { lo, hi } => {
                out.push(ball(self.max_norm_sq()));
                for i in 0..n {
                    let x = Poly::variable(n, i);
                    let left = &x - &Poly::constant(n, lo[i]);
                    let right = &Poly::constant(n, hi[i]) - &x;
                    out.push(&left * &right);
                }
            }
            BodyK::Ball { center, radius } => {
                let centered = center.iter().all(|c| *c == 0.0);
                if !centered {
                    out.push(ball(self.max_norm_sq()));
                }
                let shifted = (0..n).fold(Poly::zero(n), |acc, i| {
                    let t = &Poly::variable(n, i) - &Poly::constant(n, center[i]);
                    &acc + &(&t * &t)
                });
                out.push(&Poly::constant(n, radius * radius) - &shifted);
            }
            BodyK::Simplex { vertices } => {
                out.push(ball(self.max_norm_sq()));
                // barycentric coordinates λ = A⁻¹(x − v₀), λ₀ = 1 − Σλ_i
                let inv = self.simplex_edges().expect("simplex").try_inverse().expect("validated");
                let mut sum = Poly::zero(n);
                for i in 0..n {
                    let mut lam = Poly::zero(n);
                    for j in 0..n {
                        let t = &Poly::variable(n, j) - &Poly::constant(n, vertices[0][j]);
                        lam = &lam + &t.scale(inv[(i, j)]);
                    }
                    sum = &sum + &lam;
                    out.push(lam);
                }
                out.insert(1, &Poly::constant(n, 1.0) - &sum);
            }
            BodyK::Semialgebraic { constraints, .. } => {
                let k = constraints.iter().position(|c| ball_constraint_radius_sq(c, n).is_some()).expect("validated");
                out.push(constraints[k].clone());
                out.extend(constraints.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| c.clone()));
            }
        }
        Ok(out)
    }
}

fn ball_constraint_radius_sq(c: &Poly, n: usize) -> Option<f64> {
    let m = c.coeff(&Exponent::zero(n));
    if !(m > 0.0) {
        return None;
    }
    let mut count = 1;
    for i in 0..n {
        if c.coeff(&Exponent::unit(n, i, 2)) != -1.0 {
            return None;
        }
        count += 1;
    }
    (c.terms().count() == count).then_some(m)
}

pub fn parse_body(text: &str) -> Result<BodyK> {
    let body: BodyK = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("body file: {e}")))?;
    body.validate()?;
    Ok(body)
}

pub fn body_to_string(body: &BodyK) -> String {
    serde_json::to_string_pretty(body).expect("bodies always serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    MonteCarlo { seed: u64, samples: usize },
}

/// Moments z_α for all |α| <= max_degree, stored over the graded basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSeq {
    basis: MonomialBasis,
    vals: Vec<f64>,
    std_errors: Option<Vec<f64>>,
    provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRecord {
    pub exps: Vec<u32>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

impl MomentSeq {
    pub fn from_values(n: usize, max_degree: u32, vals: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let basis = MonomialBasis::up_to(n, max_degree);
        if vals.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: vals.len() });
        }
        if !(vals[0] > 0.0) {
            return Err(Error::InvalidInput("mass z_0 must be positive".into()));
        }
        Ok(MomentSeq { basis, vals, std_errors: None, provenance })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    pub fn max_degree(&self) -> u32 {
        self.basis.max_degree()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn std_errors(&self) -> Option<&[f64]> {
        self.std_errors.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn get(&self, e: &Exponent) -> Result<f64> {
        self.basis
            .index_of(e)
            .map(|i| self.vals[i])
            .ok_or(Error::InsufficientMoments { needed: e.total() as usize, have: self.max_degree() as usize })
    }

    pub fn std_error(&self, e: &Exponent) -> f64 {
        match (&self.std_errors, self.basis.index_of(e)) {
            (Some(s), Some(i)) => s[i],
            _ => 0.0,
        }
    }

    /// ∫ p dμ = Σ_γ p_γ z_γ.
    pub fn integrate(&self, p: &Poly) -> Result<f64> {
        p.terms().map(|(e, c)| self.get(e).map(|z| c * z)).sum()
    }

    pub fn records(&self) -> Vec<MomentRecord> {
        self.basis
            .monomials()
            .iter()
            .enumerate()
            .map(|(i, e)| MomentRecord {
                exps: e.as_slice().to_vec(),
                value: self.vals[i],
                std_error: self.std_errors.as_ref().map(|s| s[i]),
            })
            .collect()
    }
}

/// ∫_{B(0,1)} u^κ du for the unit ball in ℝⁿ.
fn unit_ball_monomial(kappa: &[u32]) -> f64 {
    if kappa.iter().any(|k| k % 2 == 1) {
        return 0.0;
    }
    let n = kappa.len() as f64;
    let total: u32 = kappa.iter().sum();
    let half: Vec<f64> = kappa.iter().map(|&k| (k as f64 + 1.0) / 2.0).collect();
    let sphere = 2.0 * half.iter().map(|&h| gamma(h)).product::<f64>() / gamma(half.iter().sum());
    sphere / (n + total as f64)
}

/// ∫ over the standard simplex {λ >= 0, Σλ <= 1} of λ^κ.
fn standard_simplex_monomial(kappa: &[u32]) -> f64 {
    let n = kappa.len() as u32;
    let total: u32 = kappa.iter().sum();
    kappa.iter().map(|&k| factorial(k)).product::<f64>() / factorial(n + total)
}

/// Expands x^β under x_j = offset_j + Σ_i A_{ji} u_i into a polynomial in u.
fn affine_powers(offset: &[f64], a: &DMatrix<f64>, max_degree: u32) -> Vec<Vec<Poly>> {
    let n = offset.len();
    (0..n)
        .map(|j| {
            let mut lin = Poly::constant(n, offset[j]);
            for i in 0..n {
                lin = &lin + &Poly::variable(n, i).scale(a[(j, i)]);
            }
            let mut pows = vec![Poly::constant(n, 1.0)];
            for k in 1..=max_degree as usize {
                let next = &pows[k - 1] * &lin;
                pows.push(next);
            }
            pows
        })
        .collect()
}

fn affine_moments<F>(basis: &MonomialBasis, offset: &[f64], a: &DMatrix<f64>, jac: f64, reference: F) -> Vec<f64>
where
    F: Fn(&[u32]) -> f64 + Sync,
{
    let pows = affine_powers(offset, a, basis.max_degree());
    basis
        .monomials()
        .par_iter()
        .map(|beta| {
            let mut p = Poly::constant(offset.len(), 1.0);
            for (j, &b) in beta.as_slice().iter().enumerate() {
                if b > 0 {
                    p = &p * &pows[j][b as usize];
                }
            }
            jac * p.terms().map(|(e, c)| c * reference(e.as_slice())).sum::<f64>()
        })
        .collect()
}

/// Lebesgue moments of K: closed forms for box, ball and simplex; Monte
/// Carlo rejection sampling inside the Archimedean ball's bounding box for
/// semialgebraic bodies (`cfg.nodes` samples when `cfg` is Monte Carlo,
/// 10⁶ otherwise).
pub fn lebesgue_moments(body: &BodyK, max_degree: u32, cfg: &QuadratureConfig) -> Result<MomentSeq> {
    body.validate()?;
    if max_degree > MAX_MOMENT_DEGREE {
        return Err(Error::InvalidInput(format!("moment degree {max_degree} exceeds {MAX_MOMENT_DEGREE}")));
    }
    let n = body.n();
    let basis = MonomialBasis::up_to(n, max_degree);
    let vals: Vec<f64> = match body {
        BodyK::Box { lo, hi } => basis
            .monomials()
            .iter()
            .map(|e| {
                e.as_slice()
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&k, (a, b))| {
                        let k1 = k as i32 + 1;
                        (b.powi(k1) - a.powi(k1)) / k1 as f64
                    })
                    .product()
            })
            .collect(),
        BodyK::Ball { center, radius } => {
            let a = DMatrix::identity(n, n) * *radius;
            affine_moments(&basis, center, &a, radius.powi(n as i32), unit_ball_monomial)
        }
        BodyK::Simplex { vertices } => {
            let a = body.simplex_edges().expect("simplex");
            let jac = a.determinant().abs();
            affine_moments(&basis, &vertices[0], &a, jac, standard_simplex_monomial)
        }
        BodyK::Semialgebraic { .. } => return mc_moments(body, basis, cfg),
    };
    Ok(MomentSeq { basis, vals, std_errors: None, provenance: Provenance::Analytic })
}

const MOMENT_CHUNK: usize = 8192;

fn mc_moments(body: &BodyK, basis: MonomialBasis, cfg: &QuadratureConfig) -> Result<MomentSeq> {
    let samples = if cfg.method == QuadratureMethod::MonteCarlo { cfg.nodes } else { DEFAULT_MC_SAMPLES };
    if samples < 2 {
        return Err(Error::InvalidInput("at least 2 samples are needed".into()));
    }
    let n = body.n();
    let (lo, hi) = body.bounding_box();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let m = basis.len();
    let chunks = samples.div_ceil(MOMENT_CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let count = MOMENT_CHUNK.min(samples - c * MOMENT_CHUNK);
            let mut s = vec![0.0; m];
            let mut s2 = vec![0.0; m];
            let mut x = vec![0.0; n];
            for _ in 0..count {
                for i in 0..n {
                    x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
                }
                if !body.contains(&x) {
                    continue;
                }
                for (k, v) in basis.evaluate(&x).into_iter().enumerate() {
                    s[k] += v;
                    s2[k] += v * v;
                }
            }
            (s, s2)
        })
        .collect();
    let mut s = vec![0.0; m];
    let mut s2 = vec![0.0; m];
    for (a, b) in &partial {
        for k in 0..m {
            s[k] += a[k];
            s2[k] += b[k];
        }
    }
    let cnt = samples as f64;
    let vals: Vec<f64> = s.iter().map(|v| box_vol * v / cnt).collect();
    let errs = s
        .iter()
        .zip(&s2)
        .map(|(a, b)| {
            let mean = a / cnt;
            let var = ((b / cnt - mean * mean) * cnt / (cnt - 1.0)).max(0.0);
            box_vol * (var / cnt).sqrt()
        })
        .collect();
    if !(vals[0] > 0.0) {
        return Err(Error::InvalidInput("no samples landed in the body".into()));
    }
    Ok(MomentSeq {
        basis,
        vals,
        std_errors: Some(errs),
        provenance: Provenance::MonteCarlo { seed: cfg.seed, samples },
    })
}

/// M_k(y)[α, β] = y_{α+β}, |α|, |β| <= k.
pub fn moment_matrix(y: &MomentSeq, k: u32) -> Result<SymMatrixView> {
    localizing_matrix(&Poly::constant(y.n(), 1.0), y, k)
}

/// M_k(p, z)[α, β] = Σ_γ p_γ z_{α+β+γ}.
pub fn localizing_matrix(p: &Poly, z: &MomentSeq, k: u32) -> Result<SymMatrixView> {
    if p.n() != z.n() {
        return Err(Error::DimensionMismatch { expected: z.n(), got: p.n() });
    }
    let needed = 2 * k + p.degree();
    if needed > z.max_degree() {
        return Err(Error::InsufficientMoments { needed: needed as usize, have: z.max_degree() as usize });
    }
    let basis = MonomialBasis::up_to(z.n(), k);
    let s = basis.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let ab = basis.get(i).add(basis.get(j));
            let mut v = 0.0;
            for (g, c) in p.terms() {
                v += c * z.get(&ab.add(g))?;
            }
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrixView::new(basis, m)
}
