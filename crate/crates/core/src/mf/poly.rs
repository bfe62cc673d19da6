//! Real polynomials in `p` variables with exact partial derivatives.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::check_dims;
use crate::io::{PolyWire, TermWire};

/// `f = Σ c_α x^α`, keyed by exponent multi-index. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyWire", into = "PolyWire")]
pub struct PolyFunction {
    p: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolyFunction {
    /// Builds from `(exponents, coefficient)` pairs; repeated monomials are
    /// summed.
    pub fn new<I>(p: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        if p == 0 {
            return Err(Error::InvalidPolynomial("at least one variable is required".into()));
        }
        let mut map = BTreeMap::new();
        for (exp, coef) in terms {
            if exp.len() != p {
                return Err(Error::InvalidPolynomial(format!(
                    "exponent {exp:?} has length {}, expected {p}",
                    exp.len()
                )));
            }
            if !coef.is_finite() {
                return Err(Error::InvalidPolynomial(format!(
                    "coefficient of {exp:?} is not finite"
                )));
            }
            *map.entry(exp).or_insert(0.0) += coef;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { p, terms: map })
    }

    pub fn zero(p: usize) -> Self {
        Self {
            p,
            terms: BTreeMap::new(),
        }
    }

    /// `½ Σ c_i x_i²`.
    pub fn half_diagonal_quadratic(coefs: &[f64]) -> Result<Self> {
        let p = coefs.len();
        Self::new(
            p,
            coefs.iter().enumerate().map(|(i, &c)| {
                let mut e = vec![0; p];
                e[i] = 2;
                (e, 0.5 * c)
            }),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.p, other.p)?;
        Self::new(
            self.p,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (e.clone(), *c)),
        )
    }

    /// `∂f/∂x_var` (0-based `var`).
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.p {
            return Err(Error::InvalidPolynomial(format!(
                "variable index {} out of range for p = {}",
                var + 1,
                self.p
            )));
        }
        let terms = self.terms.iter().filter(|(e, _)| e[var] > 0).map(|(e, &c)| {
            let mut d = e.clone();
            d[var] -= 1;
            (d, c * e[var] as f64)
        });
        Self::new(self.p, terms)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dims(self.p, x.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum())
    }
}

impl TryFrom<PolyWire> for PolyFunction {
    type Error = Error;
    fn try_from(w: PolyWire) -> Result<Self> {
        PolyFunction::new(w.p, w.terms.into_iter().map(|t| (t.exp, t.coef)))
    }
}

impl From<PolyFunction> for PolyWire {
    fn from(f: PolyFunction) -> Self {
        PolyWire {
            p: f.p,
            terms: f.terms.into_iter().map(|(exp, coef)| TermWire { exp, coef }).collect(),
        }
    }
}
