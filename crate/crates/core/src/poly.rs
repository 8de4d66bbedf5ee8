//! Sparse multivariate polynomials of total degree at most 4.

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coef: f64,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    var_count: usize,
    monomials: Vec<Monomial>,
}

impl SparsePolynomial {
    /// Validates exponent lengths, total degree at most 4, and finite coefficients.
    pub fn new(var_count: usize, monomials: Vec<Monomial>) -> Result<Self> {
        Self::with_degree(var_count, monomials, MAX_DEGREE)
    }

    fn with_degree(var_count: usize, monomials: Vec<Monomial>, max: u32) -> Result<Self> {
        for (k, m) in monomials.iter().enumerate() {
            if m.exponents.len() != var_count {
                return Err(Error::InvalidPolynomial(format!(
                    "monomial {k} has {} exponents, expected {var_count}",
                    m.exponents.len()
                )));
            }
            if m.degree() > max {
                return Err(Error::InvalidPolynomial(format!(
                    "monomial {k} has degree {} > {max}",
                    m.degree()
                )));
            }
            if !m.coef.is_finite() {
                return Err(Error::InvalidPolynomial(format!("monomial {k} has coefficient {}", m.coef)));
            }
        }
        Ok(SparsePolynomial { var_count, monomials })
    }

    /// Builds from `(exponents, coefficient)` pairs.
    pub fn from_terms(var_count: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Self::new(
            var_count,
            terms
                .iter()
                .map(|(e, c)| Monomial {
                    exponents: e.to_vec(),
                    coef: *c,
                })
                .collect(),
        )
    }

    pub fn zero(var_count: usize) -> Self {
        SparsePolynomial {
            var_count,
            monomials: Vec::new(),
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x)).sum()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.monomials.iter().fold(0.0, |m, t| m.max(t.coef.abs()))
    }

    /// Every coefficient is bounded in magnitude by one over the monomial count.
    pub fn is_normalized(&self) -> bool {
        let s = self.monomials.len();
        s >= 1 && self.max_abs_coef() * s as f64 <= 1.0
    }

    /// Merges monomials with equal exponents (first occurrence keeps its
    /// position) and drops zero coefficients.
    pub fn merged(&self) -> SparsePolynomial {
        let mut out: Vec<Monomial> = Vec::new();
        for m in &self.monomials {
            match out.iter_mut().find(|o| o.exponents == m.exponents) {
                Some(o) => o.coef += m.coef,
                None => out.push(m.clone()),
            }
        }
        out.retain(|m| m.coef != 0.0);
        SparsePolynomial {
            var_count: self.var_count,
            monomials: out,
        }
    }

    fn check_vars(&self, other: &SparsePolynomial) -> Result<()> {
        if self.var_count == other.var_count {
            Ok(())
        } else {
            Err(Error::InvalidPolynomial(format!(
                "variable counts differ: {} vs {}",
                self.var_count, other.var_count
            )))
        }
    }

    fn product_unchecked(&self, other: &SparsePolynomial) -> SparsePolynomial {
        let mut monomials = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                monomials.push(Monomial {
                    exponents: a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect(),
                    coef: a.coef * b.coef,
                });
            }
        }
        SparsePolynomial {
            var_count: self.var_count,
            monomials,
        }
        .merged()
    }

    pub fn scaled(&self, c: f64) -> SparsePolynomial {
        SparsePolynomial {
            var_count: self.var_count,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    exponents: m.exponents.clone(),
                    coef: m.coef * c,
                })
                .collect(),
        }
    }
}

/// Scales coefficients uniformly so that `max |c| <= 1/s`, `s` the number
/// of monomials after merging duplicates. Already normalized input is
/// returned unchanged. The zero polynomial is rejected.
pub fn normalize_poly(p: &SparsePolynomial) -> Result<SparsePolynomial> {
    let q = p.merged();
    let s = q.monomials.len();
    if s == 0 {
        return Err(Error::InvalidPolynomial("zero polynomial".into()));
    }
    let m = q.max_abs_coef();
    if m * s as f64 <= 1.0 {
        return Ok(q);
    }
    let mut out = q.scaled(1.0 / (s as f64 * m));
    // guard the bound against rounding in 1/(s m)
    while out.max_abs_coef() * s as f64 > 1.0 {
        out = out.scaled(1.0 - f64::EPSILON);
    }
    Ok(out)
}

/// Splits into positive and (sign-flipped) negative parts, `p = p+ - p-`.
pub fn split_poly(p: &SparsePolynomial) -> (SparsePolynomial, SparsePolynomial) {
    let pick = |pos: bool| SparsePolynomial {
        var_count: p.var_count,
        monomials: p
            .monomials
            .iter()
            .filter(|m| (m.coef > 0.0) == pos && m.coef != 0.0)
            .map(|m| Monomial {
                exponents: m.exponents.clone(),
                coef: m.coef.abs(),
            })
            .collect(),
    };
    (pick(true), pick(false))
}

/// `sum_i p_i^2` for a system of polynomials of degree at most 2. The
/// result vanishes exactly where every `p_i` does. An empty system gives
/// the zero polynomial (in zero variables).
pub fn quad_to_quartic(system: &[SparsePolynomial]) -> Result<SparsePolynomial> {
    let Some(first) = system.first() else {
        return Ok(SparsePolynomial::zero(0));
    };
    let mut acc = SparsePolynomial::zero(first.var_count);
    for (k, p) in system.iter().enumerate() {
        first.check_vars(p)?;
        if p.degree() > 2 {
            return Err(Error::InvalidPolynomial(format!(
                "system polynomial {k} has degree {} > 2",
                p.degree()
            )));
        }
        let sq = p.product_unchecked(p);
        acc.monomials.extend(sq.monomials);
    }
    Ok(acc.merged())
}
