use std::sync::Arc;

use super::multi_index::MultiIndex;
use super::poly::PolyScalar;
use super::table::MonomialTable;
use crate::cplx::{C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Dense truncated power series over a shared monomial table.
#[derive(Debug, Clone)]
pub struct Series {
    table: Arc<MonomialTable>,
    coeffs: Vec<C64>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.table.dim() == other.table.dim()
            && self.table.order() == other.table.order()
            && self.coeffs == other.coeffs
    }
}

impl Series {
    pub fn zero(table: &Arc<MonomialTable>) -> Self {
        Series {
            table: table.clone(),
            coeffs: vec![ZERO; table.len()],
        }
    }

    pub fn constant(table: &Arc<MonomialTable>, c: C64) -> Self {
        let mut s = Self::zero(table);
        s.coeffs[0] = c;
        s
    }

    pub fn var(table: &Arc<MonomialTable>, var: usize) -> Self {
        let mut s = Self::zero(table);
        if table.order() >= 1 {
            s.coeffs[table.var_index(var)] = ONE;
        }
        s
    }

    pub fn table(&self) -> &Arc<MonomialTable> {
        &self.table
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn constant_term(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, e: &MultiIndex) -> C64 {
        self.table
            .index_of(e)
            .map_or(ZERO, |i| self.coeffs[i])
    }

    /// Sparse polynomial holding every nonzero coefficient.
    pub fn to_poly(&self) -> PolyScalar {
        let mut p = PolyScalar::zero(self.table.dim());
        for (i, c) in self.coeffs.iter().enumerate() {
            p.add_term(self.table.monomial(i).clone(), *c);
        }
        p
    }

    pub fn from_poly(table: &Arc<MonomialTable>, p: &PolyScalar) -> Result<Self> {
        if p.dim() != table.dim() && !p.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: table.dim(),
                found: p.dim(),
            });
        }
        let mut s = Self::zero(table);
        for (e, c) in p.terms() {
            match table.index_of(e) {
                Some(i) => s.coeffs[i] += c,
                None => {
                    return Err(Error::OrderExceeded {
                        requested: e.degree(),
                        order: table.order(),
                    })
                }
            }
        }
        Ok(s)
    }

    /// Like `from_poly`, silently dropping terms above the truncation order.
    pub fn from_poly_truncated(table: &Arc<MonomialTable>, p: &PolyScalar) -> Self {
        let mut s = Self::zero(table);
        for (e, c) in p.terms() {
            if let Some(i) = table.index_of(e) {
                s.coeffs[i] += c;
            }
        }
        s
    }

    pub fn add_assign(&mut self, other: &Series) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &Series) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
    }

    pub fn add_scaled(&mut self, other: &Series, s: C64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn scale(&self, s: C64) -> Series {
        Series {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        let mut out = self.clone();
        out.sub_assign(other);
        out
    }

    /// Truncated product.
    pub fn mul(&self, other: &Series) -> Series {
        let mut out = vec![ZERO; self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for &(j, k) in self.table.row(i) {
                let b = other.coeffs[j as usize];
                if b != ZERO {
                    out[k as usize] += a * b;
                }
            }
        }
        Series {
            table: self.table.clone(),
            coeffs: out,
        }
    }

    /// Partial derivative; the top-degree slots of the result are zero.
    pub fn derivative(&self, var: usize) -> Series {
        let mut out = Series::zero(&self.table);
        for &(i, j, e) in self.table.derivs(var) {
            out.coeffs[j] += self.coeffs[i] * e;
        }
        out
    }

    /// Keep only the monomials of total degree `d`.
    pub fn homogeneous(&self, d: usize) -> Series {
        let mut out = Series::zero(&self.table);
        let range = self.table.degree_range(d);
        out.coeffs[range.clone()].copy_from_slice(&self.coeffs[range]);
        out
    }

    /// Zero out every monomial above degree `d`.
    pub fn truncated(&self, d: usize) -> Series {
        let mut out = self.clone();
        if d < self.table.order() {
            let start = self.table.degree_range(d + 1).start;
            for c in &mut out.coeffs[start..] {
                *c = ZERO;
            }
        }
        out
    }

    /// Same coefficients in a table of a (possibly) different order.
    pub fn retable(&self, table: &Arc<MonomialTable>) -> Series {
        let mut out = Series::zero(table);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_degree(&self, d: usize) -> f64 {
        self.coeffs[self.table.degree_range(d)]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, w: &[C64]) -> C64 {
        let vals = monomial_values(&self.table, w);
        self.coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum()
    }

    /// `sum_k a_k s^k` by Horner in the series ring.
    pub fn horner(a: &[C64], s: &Series) -> Series {
        let mut acc = Series::zero(&s.table);
        for c in a.iter().rev() {
            acc = acc.mul(s);
            acc.coeffs[0] += c;
        }
        acc
    }
}

/// Values of every monomial of the table at `w`.
pub(crate) fn monomial_values(table: &MonomialTable, w: &[C64]) -> Vec<C64> {
    let mut vals = vec![ONE; table.len()];
    for i in 1..table.len() {
        let (p, v) = table.parent(i);
        vals[i] = vals[p] * w[v];
    }
    vals
}

/// Substitute the series `args` into each monomial of the table: returns
/// `prod_k args_k^{e_k}` for every exponent `e` of `outer`.
pub(crate) fn monomial_series(outer: &MonomialTable, args: &[Series]) -> Vec<Series> {
    let inner = args[0].table.clone();
    let mut out: Vec<Series> = Vec::with_capacity(outer.len());
    out.push(Series::constant(&inner, ONE));
    for i in 1..outer.len() {
        let (p, v) = outer.parent(i);
        let next = out[p].mul(&args[v]);
        out.push(next);
    }
    out
}
