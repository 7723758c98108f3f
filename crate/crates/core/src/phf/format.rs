//! Text format for homogeneous polynomials:
//! `{"n": 2, "degree": 2, "terms": [{"coeff": 1.0, "exps": [2, 0]}, ...]}`.

use serde::{Deserialize, Serialize};

use super::exponent::Exponent;
use super::poly::{HomoPoly, Poly};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<TermRecord>,
}

impl PolyRecord {
    /// Canonical record: terms in graded-lex order, zeros dropped.
    pub fn from_poly(p: &HomoPoly) -> Self {
        PolyRecord {
            n: p.n(),
            degree: p.degree(),
            terms: p
                .terms()
                .iter()
                .map(|(e, c)| TermRecord { coeff: *c, exps: e.as_slice().to_vec() })
                .collect(),
        }
    }

    pub fn to_poly(&self) -> Result<HomoPoly> {
        for t in &self.terms {
            if t.exps.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: t.exps.len() });
            }
        }
        HomoPoly::new(self.n, self.degree, self.terms.iter().map(|t| (Exponent::new(t.exps.clone()), t.coeff)))
    }
}

/// A polynomial that need not be homogeneous: `{"n": 2, "terms": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPolyRecord {
    pub n: usize,
    pub terms: Vec<TermRecord>,
}

impl From<Poly> for GeneralPolyRecord {
    fn from(p: Poly) -> Self {
        GeneralPolyRecord {
            n: p.n(),
            terms: p.terms().map(|(e, c)| TermRecord { coeff: c, exps: e.as_slice().to_vec() }).collect(),
        }
    }
}

impl TryFrom<GeneralPolyRecord> for Poly {
    type Error = Error;
    fn try_from(r: GeneralPolyRecord) -> Result<Poly> {
        for t in &r.terms {
            if t.exps.len() != r.n {
                return Err(Error::DimensionMismatch { expected: r.n, got: t.exps.len() });
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
        }
        Poly::from_terms(r.n, r.terms.into_iter().map(|t| (Exponent::new(t.exps), t.coeff)))
    }
}

pub fn parse_poly(text: &str) -> Result<HomoPoly> {
    let rec: PolyRecord =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("polynomial file: {e}")))?;
    rec.to_poly()
}

pub fn poly_to_string(p: &HomoPoly) -> String {
    serde_json::to_string_pretty(&PolyRecord::from_poly(p)).expect("records always serialize")
}
