//! Integrals of `h · exp(-g)` over ℝⁿ and of `h` over sublevel sets.
//!
//! The radial direction is done in closed form,
//! `∫₀^∞ r^{n+p-1} exp(-r^d g(θ)) dr = Γ((n+p)/d) / (d g(θ)^{(n+p)/d})`,
//! so only an integral over the unit sphere is numerical.

mod gauss;
mod sphere;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gauss::{gauss_legendre, gauss_legendre_on};
pub use sphere::SphereRule;

use crate::error::{Error, Result};
use crate::phf::{Exponent, Phf};
use crate::special::gamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    SphereProductGauss,
    MonteCarlo,
}

impl QuadratureMethod {
    pub fn name(&self) -> &'static str {
        match self {
            QuadratureMethod::SphereProductGauss => "sphere-product-gauss",
            QuadratureMethod::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for QuadratureMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere-product-gauss" | "gauss" => Ok(QuadratureMethod::SphereProductGauss),
            "monte-carlo" | "mc" => Ok(QuadratureMethod::MonteCarlo),
            other => Err(Error::InvalidInput(format!("unknown quadrature method {other:?}"))),
        }
    }
}

/// `nodes` is the azimuthal node count for the product rule and the sample
/// count for Monte Carlo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub method: QuadratureMethod,
    pub nodes: usize,
    pub seed: u64,
    pub tol: f64,
}

pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

impl QuadratureConfig {
    /// Defaults: product rule with 256 / 128 / 64 azimuthal nodes for
    /// n = 2 / 3 / 4, Monte Carlo with 10⁶ samples above n = 4.
    pub fn default_for(n: usize) -> Self {
        let (method, nodes) = match n {
            0..=2 => (QuadratureMethod::SphereProductGauss, 256),
            3 => (QuadratureMethod::SphereProductGauss, 128),
            4 => (QuadratureMethod::SphereProductGauss, 64),
            _ => (QuadratureMethod::MonteCarlo, DEFAULT_MC_SAMPLES),
        };
        QuadratureConfig { method, nodes, seed: 0, tol: 1e-10 }
    }

    pub fn gauss(nodes: usize) -> Self {
        QuadratureConfig { method: QuadratureMethod::SphereProductGauss, nodes, seed: 0, tol: 1e-10 }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureConfig { method: QuadratureMethod::MonteCarlo, nodes: samples, seed, tol: 1e-10 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidInput(format!("nodes must be at least 2, got {}", self.nodes)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    /// The sphere point set this configuration describes.
    pub fn sphere_rule(&self, n: usize) -> Result<SphereRule> {
        self.validate()?;
        match self.method {
            QuadratureMethod::SphereProductGauss if n > 4 => Err(Error::InvalidInput(format!(
                "product Gauss rule supports n <= 4, got n = {n}; use monte-carlo"
            ))),
            QuadratureMethod::SphereProductGauss => Ok(SphereRule::product_gauss(n, self.nodes)),
            QuadratureMethod::MonteCarlo => Ok(SphereRule::monte_carlo(n, self.nodes, self.seed)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub nodes_used: usize,
}

/// Relative floor below which a sphere value counts as non-positive.
const COERCIVE_REL: f64 = 1e-12;

/// g evaluated on the nodes of a rule, validated as strictly positive.
///
/// `+∞` is allowed (it contributes nothing to `∫ exp(-g)`).
#[derive(Clone, Debug)]
pub struct SphereValues {
    pub rule: SphereRule,
    pub g: Vec<f64>,
}

impl SphereValues {
    pub fn new(g: &Phf, cfg: &QuadratureConfig) -> Result<Self> {
        let rule = cfg.sphere_rule(g.n())?;
        Self::on_rule(g, rule)
    }

    pub fn on_rule(g: &Phf, rule: SphereRule) -> Result<Self> {
        if g.degree() <= 0.0 {
            return Err(Error::NotCoercive { min: f64::NAN, max: f64::NAN });
        }
        let vals = rule.map(|x| g.value(x));
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        for &v in &vals {
            if v.is_nan() {
                return Err(Error::NotCoercive { min: f64::NAN, max });
            }
            min = min.min(v);
            if v.is_finite() {
                max = max.max(v);
            }
        }
        if !(min > 0.0) || max == 0.0 || min < COERCIVE_REL * max {
            return Err(Error::NotCoercive { min, max });
        }
        Ok(SphereValues { rule, g: vals })
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Σ_i w_i f(θ_i, g(θ_i)), in node order.
    pub fn integrate<F>(&self, f: F) -> IntegralEstimate
    where
        F: Fn(&[f64], f64) -> f64 + Sync,
    {
        let vals: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.rule.point(i), self.g[i]))
            .collect();
        let (value, std_error) = self.rule.reduce(&vals);
        IntegralEstimate { value, std_error, nodes_used: self.len() }
    }

    /// ∫ h exp(-g) given the homogeneity degree `p` of h.
    pub fn nongauss<F>(&self, degree_g: f64, p: f64, h: F) -> Result<IntegralEstimate>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = self.rule.n() as f64;
        if n + p <= 0.0 {
            return Err(Error::RadialDivergence(n + p));
        }
        let a = (n + p) / degree_g;
        let c = gamma(a) / degree_g;
        let mut est = self.integrate(|theta, gv| if gv.is_infinite() { 0.0 } else { h(theta) * gv.powf(-a) });
        est.value *= c;
        est.std_error *= c;
        Ok(est)
    }

    /// ∫ x^γ exp(-g) for each γ.
    pub fn exp_moments(&self, degree_g: f64, exps: &[Exponent]) -> Vec<f64> {
        let n = self.rule.n() as f64;
        let ws = self.rule.weights();
        // Per node, g^{-(n+p)/d} depends on p = |γ| only.
        let mut by_total: std::collections::BTreeMap<u32, Vec<f64>> = Default::default();
        for e in exps {
            by_total.entry(e.total()).or_insert_with(|| {
                let a = (n + e.total() as f64) / degree_g;
                let c = gamma(a) / degree_g;
                self.g
                    .iter()
                    .zip(ws)
                    .map(|(gv, w)| if gv.is_infinite() { 0.0 } else { c * w * gv.powf(-a) })
                    .collect()
            });
        }
        exps.par_iter()
            .map(|e| {
                let radial = &by_total[&e.total()];
                (0..self.len()).map(|i| radial[i] * e.monomial(self.rule.point(i))).sum()
            })
            .collect()
    }
}

fn check_pair(h: &Phf, g: &Phf) -> Result<()> {
    if h.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: h.n() });
    }
    if g.degree() == 0.0 {
        return Err(Error::InvalidInput("g must have nonzero degree".into()));
    }
    Ok(())
}

/// ∫_{ℝⁿ} h exp(-g) dx = Γ((n+p)/d)/d · ∫_{S^{n-1}} h(θ) g(θ)^{-(n+p)/d} dσ.
pub fn nongauss_integral(h: &Phf, g: &Phf, cfg: &QuadratureConfig) -> Result<IntegralEstimate> {
    check_pair(h, g)?;
    let n = g.n() as f64;
    if n + h.degree() <= 0.0 {
        return Err(Error::RadialDivergence(n + h.degree()));
    }
    let sv = SphereValues::new(g, cfg)?;
    sv.nongauss(g.degree(), h.degree(), |x| h.value(x))
}

/// ∫ x^γ exp(-g) dx for a batch of exponents, sharing one pass over g.
pub fn exp_moments(g: &Phf, exps: &[Exponent], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    for e in exps {
        if e.n() != g.n() {
            return Err(Error::DimensionMismatch { expected: g.n(), got: e.n() });
        }
    }
    let sv = SphereValues::new(g, cfg)?;
    Ok(sv.exp_moments(g.degree(), exps))
}

/// Radial Gauss–Legendre points used by [`sublevel_integral_direct`].
const DIRECT_RADIAL_NODES: usize = 48;

/// ∫_{g <= y} h dx in polar coordinates, with h evaluated at the actual
/// points rθ and the radial integral over [0, (y/g(θ))^{1/d}] done by
/// Gauss–Legendre.
pub fn sublevel_integral_direct(h: &Phf, g: &Phf, y: f64, cfg: &QuadratureConfig) -> Result<IntegralEstimate> {
    check_pair(h, g)?;
    if !(y > 0.0) {
        return Err(Error::InvalidInput(format!("level y must be positive, got {y}")));
    }
    if g.degree() < 0.0 {
        return Err(Error::NotCoercive { min: f64::NAN, max: f64::NAN });
    }
    let n = g.n();
    if n as f64 + h.degree() <= 0.0 {
        return Err(Error::RadialDivergence(n as f64 + h.degree()));
    }
    let sv = SphereValues::new(g, cfg)?;
    let (t, w) = gauss_legendre_on(DIRECT_RADIAL_NODES, 0.0, 1.0);
    let d = g.degree();
    Ok(sv.integrate(|theta, gv| {
        if gv.is_infinite() {
            return 0.0;
        }
        let r_max = (y / gv).powf(1.0 / d);
        let mut x = vec![0.0; n];
        let mut acc = 0.0;
        for (ti, wi) in t.iter().zip(&w) {
            let r = r_max * ti;
            for (xj, th) in x.iter_mut().zip(theta) {
                *xj = r * th;
            }
            acc += wi * r.powi(n as i32 - 1) * h.value(&x);
        }
        acc * r_max
    }))
}

/// Uniform sampling of `1{g <= y} h` over the box [-w, w]ⁿ with `cfg.nodes`
/// samples and `cfg.seed`.
pub fn mc_indicator_integral(
    h: &Phf,
    g: &Phf,
    y: f64,
    box_halfwidth: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralEstimate> {
    check_pair(h, g)?;
    cfg.validate()?;
    if !(box_halfwidth > 0.0) {
        return Err(Error::InvalidInput(format!("box half-width must be positive, got {box_halfwidth}")));
    }
    let n = g.n();
    let samples = cfg.nodes;
    let chunks = samples.div_ceil(sphere::MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let count = sphere::MC_CHUNK.min(samples - c * sphere::MC_CHUNK);
            let mut x = vec![0.0; n];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = box_halfwidth * (2.0 * rng.random::<f64>() - 1.0);
                }
                let v = if g.value(&x) <= y { h.value(&x) } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = samples as f64;
    let vol = (2.0 * box_halfwidth).powi(n as i32);
    let mean = s / m;
    let var = ((s2 / m - mean * mean) * m / (m - 1.0)).max(0.0);
    Ok(IntegralEstimate { value: vol * mean, std_error: vol * (var / m).sqrt(), nodes_used: samples })
}
