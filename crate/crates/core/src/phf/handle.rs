use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::poly::HomoPoly;
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How a [`Phf`] is evaluated.
#[derive(Clone)]
pub enum PhfKind {
    Polynomial(HomoPoly),
    /// Pointwise maximum of handles sharing one degree.
    MaxOf(Vec<Phf>),
    /// coeff · ‖x‖^degree.
    NormPower { coeff: f64 },
    /// A constant weight (degree 0), e.g. h = 1.
    Constant(f64),
    /// max(±inner, 0).
    Part { inner: Box<Phf>, positive: bool },
    Scaled { factor: f64, inner: Box<Phf> },
    Custom(Evaluator),
}

/// A positively homogeneous function `f(λx) = λ^degree f(x)`, λ > 0.
///
/// Values may be `+∞` (extended-value functions); integration treats
/// `exp(-∞)` as 0.
#[derive(Clone)]
pub struct Phf {
    n: usize,
    degree: f64,
    kind: PhfKind,
}

impl fmt::Debug for Phf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            PhfKind::Polynomial(p) => format!("Polynomial({:?})", p.terms()),
            PhfKind::MaxOf(v) => format!("MaxOf({v:?})"),
            PhfKind::NormPower { coeff } => format!("NormPower({coeff})"),
            PhfKind::Constant(c) => format!("Constant({c})"),
            PhfKind::Part { inner, positive } => format!("Part({inner:?}, positive={positive})"),
            PhfKind::Scaled { factor, inner } => format!("Scaled({factor}, {inner:?})"),
            PhfKind::Custom(_) => "Custom".to_string(),
        };
        write!(f, "Phf {{ n: {}, degree: {}, kind: {} }}", self.n, self.degree, kind)
    }
}

/// Number of random (x, λ) pairs used to validate a custom evaluator.
const HOMOGENEITY_CHECKS: usize = 20;

impl Phf {
    pub fn polynomial(p: HomoPoly) -> Self {
        Phf { n: p.n(), degree: p.degree() as f64, kind: PhfKind::Polynomial(p) }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Phf { n, degree: 0.0, kind: PhfKind::Constant(c) }
    }

    /// coeff · ‖x‖^degree.
    pub fn norm_power(n: usize, degree: f64, coeff: f64) -> Result<Self> {
        if n == 0 || !degree.is_finite() || !coeff.is_finite() {
            return Err(Error::InvalidInput("norm power needs n >= 1 and finite parameters".into()));
        }
        Ok(Phf { n, degree, kind: PhfKind::NormPower { coeff } })
    }

    /// ψ = max_k g_k. All children must share n and the degree.
    pub fn max_of(children: Vec<Phf>) -> Result<Self> {
        let first = children
            .first()
            .ok_or_else(|| Error::InvalidInput("max-of needs at least one function".into()))?;
        let (n, degree) = (first.n, first.degree);
        for c in &children[1..] {
            if c.n != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.n });
            }
            if (c.degree - degree).abs() > 1e-12 * degree.abs().max(1.0) {
                return Err(Error::MixedDegrees(degree, c.degree));
            }
        }
        Ok(Phf { n, degree, kind: PhfKind::MaxOf(children) })
    }

    /// Wraps a closure with a declared degree after a seeded statistical
    /// homogeneity check.
    pub fn custom<F>(n: usize, degree: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if n == 0 || !degree.is_finite() {
            return Err(Error::InvalidInput("custom handle needs n >= 1 and a finite degree".into()));
        }
        let handle = Phf { n, degree, kind: PhfKind::Custom(Arc::new(f)) };
        let worst = handle.homogeneity_residual(HOMOGENEITY_CHECKS, 0x5eed);
        if worst > 1e-10 {
            return Err(Error::NotHomogeneous(worst));
        }
        Ok(handle)
    }

    /// Same as [`Phf::custom`] without the homogeneity check.
    pub(crate) fn custom_unchecked(n: usize, degree: f64, f: Evaluator) -> Self {
        Phf { n, degree, kind: PhfKind::Custom(f) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn kind(&self) -> &PhfKind {
        &self.kind
    }

    pub fn as_poly(&self) -> Option<&HomoPoly> {
        match &self.kind {
            PhfKind::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation; `x.len()` must equal `n`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            PhfKind::Polynomial(p) => p.value(x),
            PhfKind::MaxOf(v) => v.iter().map(|c| c.value(x)).fold(f64::NEG_INFINITY, f64::max),
            PhfKind::NormPower { coeff } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                coeff * r.powf(self.degree)
            }
            PhfKind::Constant(c) => *c,
            PhfKind::Part { inner, positive } => {
                let v = inner.value(x);
                if *positive {
                    v.max(0.0)
                } else {
                    (-v).max(0.0)
                }
            }
            PhfKind::Scaled { factor, inner } => factor * inner.value(x),
            PhfKind::Custom(f) => f(x),
        }
    }

    /// s · f, same degree.
    pub fn scaled(&self, s: f64) -> Phf {
        let kind = match &self.kind {
            PhfKind::Polynomial(p) => PhfKind::Polynomial(p.scaled(s)),
            PhfKind::NormPower { coeff } => PhfKind::NormPower { coeff: coeff * s },
            PhfKind::Constant(c) => PhfKind::Constant(c * s),
            _ => PhfKind::Scaled { factor: s, inner: Box::new(self.clone()) },
        };
        Phf { n: self.n, degree: self.degree, kind }
    }

    /// max(f, 0).
    pub fn positive_part(&self) -> Phf {
        Phf { n: self.n, degree: self.degree, kind: PhfKind::Part { inner: Box::new(self.clone()), positive: true } }
    }

    /// max(-f, 0), so that f = f⁺ − f⁻.
    pub fn negative_part(&self) -> Phf {
        Phf { n: self.n, degree: self.degree, kind: PhfKind::Part { inner: Box::new(self.clone()), positive: false } }
    }

    /// Worst relative deviation from `f(λx) = λ^d f(x)` over `count` seeded
    /// random pairs with λ ∈ (0, 10].
    pub fn homogeneity_residual(&self, count: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut x = vec![0.0; self.n];
        let mut lx = vec![0.0; self.n];
        for _ in 0..count {
            for xi in x.iter_mut() {
                *xi = rng.sample(StandardNormal);
            }
            let lambda = 10.0 * (1.0 - rng.random::<f64>());
            for (a, b) in lx.iter_mut().zip(&x) {
                *a = lambda * b;
            }
            let expected = lambda.powf(self.degree) * self.value(&x);
            let got = self.value(&lx);
            if expected.is_infinite() && got == expected {
                continue;
            }
            let r = (got - expected).abs() / (1.0 + expected.abs());
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
        worst
    }
}

impl From<HomoPoly> for Phf {
    fn from(p: HomoPoly) -> Self {
        Phf::polynomial(p)
    }
}

/// Outcome of the sampled test for a bounded sublevel set.
#[derive(Clone, Debug, PartialEq)]
pub enum Boundedness {
    /// Minimum over the sampled sphere directions.
    Bounded { min: f64 },
    /// `g(witness) <= 0`, so the ray through `witness` stays in the set.
    Unbounded { witness: Vec<f64>, value: f64 },
    Indeterminate { min: f64 },
}

impl Boundedness {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Boundedness::Bounded { .. })
    }
}

const BOUNDED_TOL: f64 = 1e-9;

/// Deterministic unit directions: an even circle grid for n = 2, ±1 for n = 1,
/// and seeded Gaussian directions plus the coordinate axes otherwise.
pub fn sphere_directions(n: usize, samples: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..samples.max(1))
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / samples.max(1) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut dirs = Vec::with_capacity(samples + 2 * n);
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    dirs.push(e);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0xb0d);
            while dirs.len() < samples + 2 * n {
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if r > 1e-12 {
                    dirs.push(v.into_iter().map(|a| a / r).collect());
                }
            }
            dirs
        }
    }
}

/// Samples g on the unit sphere and classifies `{g <= 1}`.
///
/// A minimum above 1e-9 is `Bounded`, below -1e-9 is `Unbounded` with the
/// minimizing direction as witness, and anything between is `Indeterminate`.
pub fn check_sublevel_bounded(g: &Phf, sphere_samples: usize) -> Result<Boundedness> {
    if sphere_samples == 0 {
        return Err(Error::InvalidInput("sphere_samples must be at least 1".into()));
    }
    if g.degree() == 0.0 {
        return Err(Error::InvalidInput("degree 0 functions have no bounded sublevel set".into()));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for theta in sphere_directions(g.n(), sphere_samples) {
        let v = g.value(&theta);
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if best.as_ref().is_none_or(|(m, _)| v < *m) {
            best = Some((v, theta));
        }
    }
    let (min, witness) = best.expect("at least one direction");
    Ok(if min > BOUNDED_TOL {
        Boundedness::Bounded { min }
    } else if min < -BOUNDED_TOL {
        Boundedness::Unbounded { witness, value: min }
    } else {
        Boundedness::Indeterminate { min }
    })
}
