use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::PolyScalar;
use super::series::{monomial_series, monomial_values, Series};
use super::table::MonomialTable;
use crate::cplx::{self, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default relative tolerance for matching an inner image against an outer base.
pub const BASE_TOL: f64 = 1e-9;

/// Condition bound used by [`jet_invert`].
pub const INVERT_COND: f64 = 1e12;

/// A degree-`order` Taylor truncation of a self-map of `C^{2n}` at `base`,
/// stored in local coordinates `w = z - base`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMap {
    base: Vec<C64>,
    order: usize,
    components: Vec<Series>,
}

impl JetMap {
    pub fn table(dim: usize, order: usize) -> Arc<MonomialTable> {
        MonomialTable::get(dim, order)
    }

    pub fn identity(base: &[C64], order: usize) -> Self {
        let t = Self::table(base.len(), order);
        let components = (0..base.len())
            .map(|i| {
                let mut s = Series::var(&t, i);
                s.coeffs_mut()[0] = base[i];
                s
            })
            .collect();
        JetMap {
            base: base.to_vec(),
            order,
            components,
        }
    }

    /// The affine jet `w -> image + A w`.
    pub fn affine(base: &[C64], image: &[C64], a: &CMat, order: usize) -> Result<Self> {
        let dim = base.len();
        if image.len() != dim || a.nrows() != dim || a.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: image.len().max(a.nrows()),
            });
        }
        let t = Self::table(dim, order);
        let components = (0..dim)
            .map(|i| {
                let mut s = Series::constant(&t, image[i]);
                if order >= 1 {
                    for k in 0..dim {
                        s.coeffs_mut()[t.var_index(k)] = a[(i, k)];
                    }
                }
                s
            })
            .collect();
        Ok(JetMap {
            base: base.to_vec(),
            order,
            components,
        })
    }

    pub fn linear(a: &CMat, order: usize) -> Result<Self> {
        let zero = vec![ZERO; a.nrows()];
        Self::affine(&zero, &zero, a, order)
    }

    /// Build from polynomial components in local coordinates.
    pub fn from_polys(base: &[C64], order: usize, comps: &[PolyScalar]) -> Result<Self> {
        let dim = base.len();
        if comps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: comps.len(),
            });
        }
        let t = Self::table(dim, order);
        let components = comps
            .iter()
            .map(|p| Series::from_poly(&t, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetMap {
            base: base.to_vec(),
            order,
            components,
        })
    }

    /// Truncate polynomial components (local coordinates) at `order`.
    pub fn from_polys_truncated(base: &[C64], order: usize, comps: &[PolyScalar]) -> Result<Self> {
        let dim = base.len();
        if comps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: comps.len(),
            });
        }
        let t = Self::table(dim, order);
        let components = comps
            .iter()
            .map(|p| Series::from_poly_truncated(&t, p))
            .collect();
        Ok(JetMap {
            base: base.to_vec(),
            order,
            components,
        })
    }

    pub(crate) fn from_series(base: Vec<C64>, order: usize, components: Vec<Series>) -> Self {
        JetMap {
            base,
            order,
            components,
        }
    }

    pub fn base(&self) -> &[C64] {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn component_polys(&self) -> Vec<PolyScalar> {
        self.components.iter().map(Series::to_poly).collect()
    }

    /// The image of the base point.
    pub fn image(&self) -> Vec<C64> {
        self.components.iter().map(Series::constant_term).collect()
    }

    pub fn truncate(&self, order: usize) -> JetMap {
        let order = order.min(self.order);
        let t = Self::table(self.dim(), order);
        JetMap {
            base: self.base.clone(),
            order,
            components: self.components.iter().map(|s| s.retable(&t)).collect(),
        }
    }

    /// Evaluate the stored truncation at the ambient point `z`.
    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        let w = cplx::sub(z, &self.base);
        let t = self.components[0].table();
        let vals = monomial_values(t, &w);
        Ok(self
            .components
            .iter()
            .map(|s| s.coeffs().iter().zip(&vals).map(|(c, v)| c * v).sum())
            .collect())
    }

    /// Largest coefficient difference over the common truncation.
    pub fn max_diff(&self, other: &JetMap) -> f64 {
        let order = self.order.min(other.order);
        let a = self.truncate(order);
        let b = other.truncate(order);
        a.components
            .iter()
            .zip(&b.components)
            .map(|(x, y)| x.sub(y).max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient of `self - identity` of total degree `d`.
    pub fn deviation_from_identity(&self, d: usize) -> f64 {
        let id = JetMap::identity(&self.base, self.order);
        self.components
            .iter()
            .zip(&id.components)
            .map(|(x, y)| x.sub(y).max_abs_degree(d))
            .fold(0.0, f64::max)
    }
}

/// Compose two jets with the default base tolerance.
pub fn jet_compose(outer: &JetMap, inner: &JetMap) -> Result<JetMap> {
    jet_compose_tol(outer, inner, BASE_TOL)
}

/// `outer ∘ inner`; `inner`'s image must match `outer`'s base within `tol`
/// (relative to the size of the base point).
pub fn jet_compose_tol(outer: &JetMap, inner: &JetMap, tol: f64) -> Result<JetMap> {
    if outer.dim() != inner.dim() {
        return Err(Error::DimensionMismatch {
            expected: outer.dim(),
            found: inner.dim(),
        });
    }
    let image = inner.image();
    let distance = cplx::dist(&image, &outer.base);
    if distance > tol * (1.0 + cplx::norm(&outer.base)) {
        return Err(Error::BaseMismatch { distance });
    }
    let order = outer.order.min(inner.order);
    let dim = outer.dim();
    let t = JetMap::table(dim, order);
    let args: Vec<Series> = inner
        .components
        .iter()
        .zip(&outer.base)
        .map(|(s, q)| {
            let mut s = s.retable(&t);
            s.coeffs_mut()[0] -= q;
            s
        })
        .collect();
    let powers = monomial_series(&t, &args);
    let components = outer
        .components
        .iter()
        .map(|g| {
            let g = g.retable(&t);
            let mut acc = Series::zero(&t);
            for (c, p) in g.coeffs().iter().zip(&powers) {
                if *c != ZERO {
                    acc.add_scaled(p, *c);
                }
            }
            acc
        })
        .collect();
    Ok(JetMap {
        base: inner.base.clone(),
        order,
        components,
    })
}

/// Substitute the series `args` into the sparse polynomial `p`.
pub(crate) fn poly_of_series(p: &PolyScalar, args: &[Series]) -> Series {
    let t = args[0].table().clone();
    let mut acc = Series::zero(&t);
    let mut cache: Vec<Vec<Series>> = args
        .iter()
        .map(|a| vec![Series::constant(&t, ONE), a.clone()])
        .collect();
    for (e, c) in p.terms() {
        let mut term = Series::constant(&t, *c);
        for (v, &k) in e.0.iter().enumerate() {
            if k == 0 {
                continue;
            }
            while cache[v].len() <= k as usize {
                let next = cache[v].last().unwrap().mul(&args[v]);
                cache[v].push(next);
            }
            term = term.mul(&cache[v][k as usize]);
        }
        acc.add_assign(&term);
    }
    acc
}

/// Inverse jet anchored at `F`'s image.
pub fn jet_invert(f: &JetMap) -> Result<JetMap> {
    let dim = f.dim();
    let l = linear_part(f);
    let linv = linalg::inverse(&l, INVERT_COND)?;
    let t = JetMap::table(dim, f.order);
    let q = f.image();
    // Nonlinear remainder of F as a polynomial in w.
    let nonlinear: Vec<Series> = f
        .components
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for d in 0..=1.min(f.order) {
                for c in &mut s.coeffs_mut()[t.degree_range(d)] {
                    *c = ZERO;
                }
            }
            s
        })
        .collect();
    let id: Vec<Series> = (0..dim).map(|i| Series::var(&t, i)).collect();
    let apply_linv = |rhs: &[Series]| -> Vec<Series> {
        (0..dim)
            .map(|i| {
                let mut acc = Series::zero(&t);
                for (k, r) in rhs.iter().enumerate() {
                    acc.add_scaled(r, linv[(i, k)]);
                }
                acc
            })
            .collect()
    };
    let mut g = apply_linv(&id);
    for _ in 1..f.order {
        let powers = monomial_series(&t, &g);
        let rhs: Vec<Series> = (0..dim)
            .map(|i| {
                let mut acc = id[i].clone();
                for (c, p) in nonlinear[i].coeffs().iter().zip(&powers) {
                    if *c != ZERO {
                        acc.add_scaled(p, -*c);
                    }
                }
                acc
            })
            .collect();
        g = apply_linv(&rhs);
    }
    for (s, p) in g.iter_mut().zip(&f.base) {
        s.coeffs_mut()[0] += p;
    }
    Ok(JetMap {
        base: q,
        order: f.order,
        components: g,
    })
}

/// Degree-`r` terms of every component, in local coordinates.
pub fn homogeneous_part(f: &JetMap, r: usize) -> Result<Vec<PolyScalar>> {
    if r > f.order {
        return Err(Error::OrderExceeded {
            requested: r,
            order: f.order,
        });
    }
    Ok(f.components
        .iter()
        .map(|s| s.homogeneous(r).to_poly())
        .collect())
}

/// Jacobian of the truncation at the base point.
pub fn linear_part(f: &JetMap) -> CMat {
    let dim = f.dim();
    if f.order == 0 {
        return CMat::zeros(dim, dim);
    }
    let t = f.components[0].table();
    CMat::from_fn(dim, dim, |i, k| f.components[i].coeffs()[t.var_index(k)])
}

/// Evaluate a sparse polynomial or a jet at a point.
pub fn poly_eval(p: &PolyScalar, z: &[C64]) -> Result<C64> {
    p.eval(z)
}

#[derive(Serialize, Deserialize)]
struct JetRepr {
    base: Vec<C64>,
    order: usize,
    components: Vec<PolyScalar>,
}

impl Serialize for JetMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JetRepr {
            base: self.base.clone(),
            order: self.order,
            components: self.component_polys(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JetMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = JetRepr::deserialize(d)?;
        let dim = r.base.len();
        let comps = r
            .components
            .into_iter()
            .map(|p| p.with_dim(dim))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        JetMap::from_polys(&r.base, r.order, &comps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::{c, re};
    use crate::jet::MultiIndex;

    fn mono(e: &[u32], k: f64) -> PolyScalar {
        PolyScalar::monomial(MultiIndex(e.to_vec()), re(k))
    }

    fn jet2(order: usize, a: PolyScalar, b: PolyScalar) -> JetMap {
        JetMap::from_polys_truncated(&[ZERO, ZERO], order, &[a, b]).unwrap()
    }

    #[test]
    fn identity_eval() {
        let id = JetMap::identity(&[ZERO; 4], 3);
        let z = [c(1.0, 2.0), re(-3.0), c(0.0, 0.5), re(7.0)];
        assert_eq!(id.eval(&z).unwrap(), z.to_vec());
    }

    #[test]
    fn identity_compose_is_neutral() {
        let f = jet2(3, &mono(&[1, 0], 1.0) + &mono(&[0, 2], 1.0), mono(&[0, 1], 1.0));
        let id = JetMap::identity(&[ZERO, ZERO], 3);
        assert_eq!(jet_compose(&id, &f).unwrap().max_diff(&f), 0.0);
        assert_eq!(jet_compose(&f, &id).unwrap().max_diff(&f), 0.0);
    }

    #[test]
    fn linear_jets_multiply() {
        let a = linalg::from_rows(&[vec![re(1.0), re(2.0)], vec![re(0.0), re(1.0)]]).unwrap();
        let b = linalg::from_rows(&[vec![re(1.0), re(0.0)], vec![re(3.0), re(1.0)]]).unwrap();
        let comp = jet_compose(&JetMap::linear(&a, 2).unwrap(), &JetMap::linear(&b, 2).unwrap())
            .unwrap();
        assert!(linalg::max_abs(&(linear_part(&comp) - &a * &b)) < 1e-15);
    }

    #[test]
    fn quadratic_composite_by_hand() {
        // (z1 + z2^2, z2) ∘ (z1, z2 + z1^2) = (z1 + z2^2, z2 + z1^2) + O(3)
        let outer = jet2(2, &mono(&[1, 0], 1.0) + &mono(&[0, 2], 1.0), mono(&[0, 1], 1.0));
        let inner = jet2(2, mono(&[1, 0], 1.0), &mono(&[0, 1], 1.0) + &mono(&[2, 0], 1.0));
        let want = jet2(
            2,
            &mono(&[1, 0], 1.0) + &mono(&[0, 2], 1.0),
            &mono(&[0, 1], 1.0) + &mono(&[2, 0], 1.0),
        );
        assert!(jet_compose(&outer, &inner).unwrap().max_diff(&want) < 1e-15);

        // at order 4 the cross terms 2 z1^2 z2 and z1^4 appear
        let outer = jet2(4, &mono(&[1, 0], 1.0) + &mono(&[0, 2], 1.0), mono(&[0, 1], 1.0));
        let inner = jet2(4, mono(&[1, 0], 1.0), &mono(&[0, 1], 1.0) + &mono(&[2, 0], 1.0));
        let first = jet_compose(&outer, &inner).unwrap().component_polys()[0].clone();
        assert_eq!(first.coeff(&MultiIndex(vec![2, 1])), re(2.0));
        assert_eq!(first.coeff(&MultiIndex(vec![4, 0])), re(1.0));
    }

    #[test]
    fn invert_quadratic_shear() {
        let f = jet2(4, &mono(&[1, 0], 1.0) + &mono(&[0, 2], 1.0), mono(&[0, 1], 1.0));
        let g = jet_invert(&f).unwrap();
        let want = jet2(4, &mono(&[1, 0], 1.0) - &mono(&[0, 2], 1.0), mono(&[0, 1], 1.0));
        assert!(g.max_diff(&want) < 1e-15);
        let id = JetMap::identity(&[ZERO, ZERO], 4);
        assert!(jet_compose(&g, &f).unwrap().max_diff(&id) < 1e-15);
        assert!(jet_compose(&f, &g).unwrap().max_diff(&id) < 1e-15);
    }

    #[test]
    fn invert_at_shifted_base() {
        let base = [re(1.0), re(-2.0)];
        let comps = [
            &(&mono(&[1, 0], 2.0) + &mono(&[1, 1], 1.0)) + &PolyScalar::constant(2, re(3.0)),
            &mono(&[0, 1], 0.5) + &mono(&[3, 0], 1.0),
        ];
        let f = JetMap::from_polys(&base, 3, &comps).unwrap();
        let g = jet_invert(&f).unwrap();
        assert_eq!(g.base(), f.image().as_slice());
        let round = jet_compose(&g, &f).unwrap();
        assert!(round.max_diff(&JetMap::identity(&base, 3)) < 1e-13);
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let f = jet2(2, mono(&[1, 0], 1.0), mono(&[1, 0], 1.0));
        assert!(matches!(jet_invert(&f), Err(Error::Singular { .. })));
    }

    #[test]
    fn base_mismatch_is_rejected() {
        let f = JetMap::identity(&[re(1.0), ZERO], 2);
        let g = JetMap::identity(&[ZERO, ZERO], 2);
        assert!(matches!(jet_compose(&g, &f), Err(Error::BaseMismatch { .. })));
    }

    #[test]
    fn homogeneous_parts() {
        let id = JetMap::identity(&[ZERO, ZERO], 3);
        let p1 = homogeneous_part(&id, 1).unwrap();
        assert_eq!(p1[0], PolyScalar::var(2, 0));
        assert!(homogeneous_part(&id, 2).unwrap().iter().all(|p| p.is_empty()));
        assert!(matches!(
            homogeneous_part(&id, 4),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let f = JetMap::from_polys(
            &[re(1.0), re(2.0)],
            2,
            &[mono(&[1, 0], 1.0), &mono(&[0, 1], 1.0) + &mono(&[1, 1], 3.0)],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with(r#"{"base":[[1.0,0.0],[2.0,0.0]],"order":2,"components":"#));
        let back: JetMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
