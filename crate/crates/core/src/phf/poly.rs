use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use super::exponent::{Exponent, MonomialBasis};
use crate::error::{Error, Result};

/// A sparse real polynomial in n variables, not necessarily homogeneous.
///
/// Used for localizing weights such as `1 - g`, for the inequalities that
/// describe a body, and for sum-of-squares multipliers.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "super::format::GeneralPolyRecord", into = "super::format::GeneralPolyRecord")]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(Exponent::zero(n), c)
    }

    pub fn monomial(e: Exponent, c: f64) -> Self {
        let n = e.n();
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(e, c);
        }
        Poly { n, terms }
    }

    /// x_i as a polynomial.
    pub fn variable(n: usize, i: usize) -> Self {
        Self::monomial(Exponent::unit(n, i, 1), 1.0)
    }

    /// Builds from (exponent, coefficient) pairs, merging repeats.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Result<Self> {
        let mut out = Poly::zero(n);
        for (e, c) in terms {
            if e.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.n() });
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, e: Exponent, c: f64) {
        let entry = self.terms.entry(e.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::total).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        self.terms.iter().map(|(e, c)| c * e.monomial(x)).sum()
    }

    pub fn scale(&self, s: f64) -> Poly {
        if s == 0.0 {
            return Poly::zero(self.n);
        }
        Poly { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(self.n, 1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `v(x)ᵀ G v(x)` for a Gram matrix indexed by `basis`.
    pub fn from_gram(basis: &MonomialBasis, gram: &DMatrix<f64>) -> Poly {
        let mut out = Poly::zero(basis.n());
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let c = gram[(i, j)];
                if c != 0.0 {
                    out.add_term(basis.get(i).add(basis.get(j)), c);
                }
            }
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

/// A homogeneous polynomial: every stored exponent has total equal to the
/// degree, and no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct HomoPoly {
    n: usize,
    degree: u32,
    terms: Vec<(Exponent, f64)>,
}

impl HomoPoly {
    pub fn new(n: usize, degree: u32, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if degree == 0 {
            return Err(Error::InvalidInput("homogeneous polynomial degree must be at least 1".into()));
        }
        let mut merged: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (e, c) in terms {
            if e.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.n() });
            }
            if e.total() != degree {
                return Err(Error::InvalidInput(format!(
                    "term {:?} has total degree {} but the polynomial has degree {}",
                    e,
                    e.total(),
                    degree
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient for {e:?}")));
            }
            *merged.entry(e).or_insert(0.0) += c;
        }
        let terms = merged.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(HomoPoly { n, degree, terms })
    }

    /// Polynomial with coefficient vector `coeffs` over a pure basis.
    pub fn from_coeffs(basis: &MonomialBasis, coeffs: &[f64]) -> Result<Self> {
        if !basis.is_pure() {
            return Err(Error::InvalidInput("coefficient basis must be pure".into()));
        }
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: coeffs.len() });
        }
        Self::new(basis.n(), basis.max_degree(), basis.monomials().iter().cloned().zip(coeffs.iter().copied()))
    }

    /// c · x^α.
    pub fn monomial(e: Exponent, c: f64) -> Result<Self> {
        let n = e.n();
        let d = e.total();
        Self::new(n, d, [(e, c)])
    }

    /// ‖x‖^{2k} = (x₁² + … + xₙ²)^k, expanded.
    pub fn norm_power(n: usize, k: u32) -> Self {
        let sq = (0..n).fold(Poly::zero(n), |acc, i| &acc + &Poly::monomial(Exponent::unit(n, i, 2), 1.0));
        let p = sq.pow(k);
        HomoPoly::try_from(&p).expect("power of a homogeneous quadratic is homogeneous")
    }

    /// scale · xᵀ Q x for a symmetric matrix Q.
    pub fn quadratic_form(q: &DMatrix<f64>, scale: f64) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.ncols() });
        }
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut e = vec![0u32; n];
                e[i] += 1;
                e[j] += 1;
                terms.push((Exponent::new(e), scale * q[(i, j)]));
            }
        }
        Self::new(n, 2, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(Exponent, f64)] {
        &self.terms
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.iter().find(|(t, _)| t == e).map(|(_, c)| *c).unwrap_or(0.0)
    }

    /// Coefficient vector over a pure basis of the same degree.
    pub fn coeffs(&self, basis: &MonomialBasis) -> Result<Vec<f64>> {
        if !basis.is_pure() || basis.max_degree() != self.degree || basis.n() != self.n {
            return Err(Error::InvalidInput("basis does not match polynomial degree".into()));
        }
        let mut v = vec![0.0; basis.len()];
        for (e, c) in &self.terms {
            let i = basis.index_of(e).expect("pure basis covers all exponents of its degree");
            v[i] = *c;
        }
        Ok(v)
    }

    /// Σ_α p_α x^α.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.value(x))
    }

    /// Unchecked evaluation for hot loops; `x.len()` must equal `n`.
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.monomial(x)).sum()
    }

    /// Exact gradient.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut g = vec![0.0; self.n];
        for (e, c) in &self.terms {
            let ex = e.as_slice();
            for i in 0..self.n {
                if ex[i] == 0 {
                    continue;
                }
                let mut term = c * ex[i] as f64;
                for (j, (&a, &xj)) in ex.iter().zip(x).enumerate() {
                    let p = if j == i { a - 1 } else { a };
                    if p > 0 {
                        term *= xj.powi(p as i32);
                    }
                }
                g[i] += term;
            }
        }
        Ok(g)
    }

    pub fn scaled(&self, s: f64) -> HomoPoly {
        HomoPoly::new(self.n, self.degree, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
            .expect("scaling preserves homogeneity")
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_terms(self.n, self.terms.iter().cloned()).expect("dimensions already checked")
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }
}

impl TryFrom<&Poly> for HomoPoly {
    type Error = Error;
    fn try_from(p: &Poly) -> Result<HomoPoly> {
        let d = p.degree();
        HomoPoly::new(p.n(), d, p.terms().map(|(e, c)| (e.clone(), c)))
    }
}
