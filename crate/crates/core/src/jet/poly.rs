use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::multi_index::MultiIndex;
use crate::cplx::{cpow, C64, ZERO};
use crate::error::{Error, Result};

/// Sparse multivariate polynomial with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyScalar {
    dim: usize,
    terms: BTreeMap<MultiIndex, C64>,
}

impl PolyScalar {
    pub fn zero(dim: usize) -> Self {
        PolyScalar {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::unit(dim, i), C64::new(1.0, 0.0));
        p
    }

    pub fn monomial(exp: MultiIndex, c: C64) -> Self {
        let mut p = Self::zero(exp.dim());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, C64)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &MultiIndex) -> C64 {
        self.terms.get(e).copied().unwrap_or(ZERO)
    }

    /// Accumulate `c * z^e`. Exact zeros are never stored.
    pub fn add_term(&mut self, e: MultiIndex, c: C64) {
        if c == ZERO {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == ZERO {
                    slot.remove();
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.degree()).max()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop every term with magnitude below `tol`.
    pub fn normalize(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    pub fn normalized(mut self, tol: f64) -> Self {
        self.normalize(tol);
        self
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.norm() < tol)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul_trunc(&self, other: &PolyScalar, max_deg: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > max_deg {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + eb.degree() <= max_deg {
                    out.add_term(ea.add(eb), ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.dim, C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if let Some(lower) = e.lower(var) {
                out.add_term(lower, c * e.0[var] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<PolyScalar> {
        (0..self.dim).map(|v| self.derivative(v)).collect()
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        let mut acc = ZERO;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (zi, &k) in z.iter().zip(&e.0) {
                if k > 0 {
                    t *= cpow(*zi, k);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn homogeneous_part(&self, deg: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e.degree() == deg {
                out.add_term(e.clone(), *c);
            }
        }
        out
    }

    pub fn truncate(&self, max_deg: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e.degree() <= max_deg {
                out.add_term(e.clone(), *c);
            }
        }
        out
    }

    /// True when every term above `tol` has total degree `deg`.
    pub fn is_homogeneous(&self, deg: usize, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|(e, c)| e.degree() == deg || c.norm() < tol)
    }

    /// Largest coefficient difference to `other`.
    pub fn max_diff(&self, other: &PolyScalar) -> f64 {
        (self - other).max_abs()
    }

    /// Reinterpret a polynomial decoded without a known dimension.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if self.terms.is_empty() {
            self.dim = dim;
            return Ok(self);
        }
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(self)
    }
}

impl Add for &PolyScalar {
    type Output = PolyScalar;
    fn add(self, rhs: &PolyScalar) -> PolyScalar {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &PolyScalar {
    type Output = PolyScalar;
    fn sub(self, rhs: &PolyScalar) -> PolyScalar {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Neg for &PolyScalar {
    type Output = PolyScalar;
    fn neg(self) -> PolyScalar {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &PolyScalar {
    type Output = PolyScalar;
    fn mul(self, rhs: &PolyScalar) -> PolyScalar {
        self.mul_trunc(rhs, usize::MAX)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: MultiIndex,
    c: C64,
}

impl Serialize for PolyScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr {
                exp: e.clone(),
                c: *c,
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<TermRepr>::deserialize(d)?;
        let dim = v.first().map_or(0, |t| t.exp.dim());
        PolyScalar::from_terms(dim, v.into_iter().map(|t| (t.exp, t.c)))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::re;

    #[test]
    fn product_eval() {
        // z1 * z2 at (2, 3)
        let p = &PolyScalar::var(2, 0) * &PolyScalar::var(2, 1);
        assert_eq!(p.eval(&[re(2.0), re(3.0)]).unwrap(), re(6.0));
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = PolyScalar::var(2, 0);
        assert!(matches!(
            p.eval(&[re(1.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derivative_and_cancellation() {
        let x = PolyScalar::var(2, 0);
        let y = PolyScalar::var(2, 1);
        let p = &(&x * &x) * &y; // x^2 y
        let dx = p.derivative(0);
        assert_eq!(dx.coeff(&MultiIndex(vec![1, 1])), re(2.0));
        let zero = &p - &p;
        assert!(zero.is_empty());
    }

    #[test]
    fn json_shape() {
        let p = PolyScalar::monomial(MultiIndex(vec![1, 2]), re(3.0));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"[{"exp":[1,2],"c":[3.0,0.0]}]"#);
        let back: PolyScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
