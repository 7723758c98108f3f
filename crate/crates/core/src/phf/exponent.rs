use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::special::binomial;

/// A multi-index α ∈ ℕⁿ.
///
/// Ordering is graded: lower total degree first, and within one degree the
/// lexicographically larger tuple first (`x1^2` before `x1 x2` before `x2^2`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(exps: Vec<u32>) -> Self {
        Exponent(exps)
    }

    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    /// The exponent of the single variable `x_i^power`.
    pub fn unit(n: usize, i: usize, power: u32) -> Self {
        let mut e = vec![0; n];
        e[i] = power;
        Exponent(e)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.n(), other.n());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// x^α at a point.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .fold(1.0, |acc, (&a, &xi)| if a == 0 { acc } else { acc * xi.powi(a as i32) })
    }

    /// True when every entry is even.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|a| a % 2 == 0)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All exponents of total degree exactly `degree`, in graded order.
pub fn exponents_of_degree(n: usize, degree: u32) -> Vec<Exponent> {
    fn rec(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == n {
            prefix.push(remaining);
            out.push(Exponent(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            rec(n, remaining - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, degree, &mut Vec::with_capacity(n), &mut out);
    out
}

/// An ordered list of monomials used to index vectors and matrices.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    n: usize,
    max_degree: u32,
    pure: bool,
    monomials: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl PartialEq for MonomialBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.max_degree == other.max_degree && self.pure == other.pure
    }
}

impl MonomialBasis {
    /// Monomials of total degree ≤ k; C(n+k, n) entries.
    pub fn up_to(n: usize, k: u32) -> Self {
        let monomials: Vec<Exponent> = (0..=k).flat_map(|t| exponents_of_degree(n, t)).collect();
        Self::from_list(n, k, false, monomials)
    }

    /// Monomials of total degree exactly k; ℓ(k) = C(n+k-1, k) entries.
    pub fn pure(n: usize, k: u32) -> Self {
        Self::from_list(n, k, true, exponents_of_degree(n, k))
    }

    fn from_list(n: usize, max_degree: u32, pure: bool, monomials: Vec<Exponent>) -> Self {
        let index = monomials.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        MonomialBasis { n, max_degree, pure, monomials, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.monomials[i]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Expected size from the closed forms.
    pub fn expected_len(n: usize, k: u32, pure: bool) -> usize {
        let k = k as usize;
        if pure {
            binomial(n + k - 1, k)
        } else {
            binomial(n + k, n)
        }
    }

    /// The vector (x^α)_α evaluated at a point.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|e| e.monomial(x)).collect()
    }
}
