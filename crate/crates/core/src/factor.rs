//! Factorization of symplectic matrices into transvections and elementary
//! symplectic matrices, and the shears realizing each factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::cplx::{self, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::jet::UniPoly;
use crate::linalg::{self, CMat};
use crate::shear::{Shear, Word};
use crate::symplectic::SympMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "u")]
    Upper,
    #[serde(rename = "l")]
    Lower,
}

/// `E^u(α Ẽ_ij)` or `E^l(α Ẽ_ij)`, with 1-based `i <= j <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElemFactor {
    pub side: Side,
    pub i: usize,
    pub j: usize,
    pub alpha: C64,
}

/// `x ↦ x + α (xᵀJv) v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transvection {
    pub v: Vec<C64>,
    pub alpha: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LinearFactor {
    Transvection(Transvection),
    Elem(ElemFactor),
}

/// Ordered matrix product `factors[0] · factors[1] · …`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FactorWord {
    pub factors: Vec<LinearFactor>,
}

impl Transvection {
    pub fn matrix(&self) -> CMat {
        let dim = self.v.len();
        let jv = cplx::j_apply(&self.v);
        CMat::from_fn(dim, dim, |i, k| {
            let id = if i == k { ONE } else { ZERO };
            id + self.alpha * self.v[i] * jv[k]
        })
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let s = self.alpha * cplx::lambda(x, &self.v);
        x.iter().zip(&self.v).map(|(a, b)| a + s * b).collect()
    }

    pub fn inverse(&self) -> Transvection {
        Transvection {
            v: self.v.clone(),
            alpha: -self.alpha,
        }
    }
}

fn check_indices(i: usize, j: usize, n: usize) -> Result<()> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::IndexOutOfRange(format!(
            "indices ({i}, {j}) must lie in 1..={n}"
        )));
    }
    Ok(())
}

/// `Ẽ_ij` (1-based): `E_ij + E_ji + E_ii + E_jj` for `i != j`, `E_ii` otherwise.
pub fn sym_basis(i: usize, j: usize, n: usize) -> Result<CMat> {
    check_indices(i, j, n)?;
    let mut m = CMat::zeros(n, n);
    let (a, b) = (i - 1, j - 1);
    if a == b {
        m[(a, a)] = ONE;
    } else {
        m[(a, b)] = ONE;
        m[(b, a)] = ONE;
        m[(a, a)] = ONE;
        m[(b, b)] = ONE;
    }
    Ok(m)
}

/// `[[I, A], [0, I]]` or `[[I, 0], [A, I]]`.
pub fn block_matrix(side: Side, a: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::identity(2 * n, 2 * n);
    let (r0, c0) = match side {
        Side::Upper => (0, n),
        Side::Lower => (n, 0),
    };
    m.view_mut((r0, c0), (n, n)).copy_from(a);
    m
}

pub fn elem_matrix(f: &ElemFactor, n: usize) -> Result<SympMatrix> {
    let a = sym_basis(f.i, f.j, n)? * f.alpha;
    Ok(SympMatrix::new(block_matrix(f.side, &a), f64::INFINITY).expect("block matrix"))
}

impl LinearFactor {
    pub fn matrix(&self, n: usize) -> Result<CMat> {
        match self {
            LinearFactor::Transvection(t) => {
                if t.v.len() != 2 * n {
                    return Err(Error::DimensionMismatch {
                        expected: 2 * n,
                        found: t.v.len(),
                    });
                }
                Ok(t.matrix())
            }
            LinearFactor::Elem(e) => Ok(elem_matrix(e, n)?.into_matrix()),
        }
    }
}

impl FactorWord {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn product(&self, n: usize) -> Result<CMat> {
        let mut m = CMat::identity(2 * n, 2 * n);
        for f in &self.factors {
            m *= f.matrix(n)?;
        }
        Ok(m)
    }
}

/// Coordinates of a symmetric `A` in the `Ẽ_ij` basis, one factor per
/// nonzero coordinate.
pub fn split_symmetric_block(side: Side, a: &CMat, tol: f64) -> Result<Vec<ElemFactor>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let asym = linalg::max_abs(&(a - a.transpose()));
    if asym > tol * (1.0 + linalg::max_abs(a)) {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (a + a.transpose()) * cplx::re(0.5);
    let mut out = Vec::new();
    for i in 0..n {
        let off: C64 = (0..n).filter(|&j| j != i).map(|j| sym[(i, j)]).sum();
        let diag = sym[(i, i)] - off;
        if diag != ZERO {
            out.push(ElemFactor {
                side,
                i: i + 1,
                j: i + 1,
                alpha: diag,
            });
        }
        for j in i + 1..n {
            if sym[(i, j)] != ZERO {
                out.push(ElemFactor {
                    side,
                    i: i + 1,
                    j: j + 1,
                    alpha: sym[(i, j)],
                });
            }
        }
    }
    Ok(out)
}

/// Relative size of `ω(u, w)` below which a direct transvection is avoided.
const DIRECT_RATIO: f64 = 0.2;

struct Reducer {
    dim: usize,
    c: CMat,
    steps: Vec<Transvection>,
}

impl Reducer {
    fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.c[(i, k)]).collect()
    }

    /// Left-multiply by the transvection that maps `u` to `w`.
    fn push(&mut self, u: &[C64], w: &[C64]) {
        let om = cplx::lambda(u, w);
        let t = Transvection {
            v: cplx::sub(w, u),
            alpha: ONE / om,
        };
        self.c = t.matrix() * &self.c;
        self.steps.push(t);
    }
}

fn quality(u: &[C64], y: &[C64], w: &[C64]) -> f64 {
    let a = cplx::lambda(u, y).norm() / (cplx::norm(u) * cplx::norm(y));
    let b = cplx::lambda(y, w).norm() / (cplx::norm(y) * cplx::norm(w));
    a.min(b)
}

/// Write `M` as a product of transvections (one hyperbolic pair at a time).
pub fn factor_sp(m: &SympMatrix, seed: u64, cfg: &Config) -> Result<FactorWord> {
    let n = m.half_dim();
    let dim = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut red = Reducer {
        dim,
        c: m.matrix().clone(),
        steps: Vec::new(),
    };
    let scale = 1.0 + linalg::max_abs(m.matrix());
    let close = |a: &[C64], b: &[C64]| cplx::dist(a, b) <= 1e-14 * scale;

    for i in 0..n {
        // first vector of the pair: C e_i -> e_i
        let u = red.column(i);
        let w = cplx::unit(dim, i);
        if !close(&u, &w) {
            let direct = cplx::lambda(&u, &w).norm() / cplx::norm(&u);
            if direct >= DIRECT_RATIO {
                red.push(&u, &w);
            } else {
                let y = witness(&u, &w, i, n, &mut rng, direct);
                match y {
                    Some(y) => {
                        red.push(&u, &y);
                        red.push(&y, &w);
                    }
                    None if direct > 0.0 => red.push(&u, &w),
                    None => {
                        return Err(Error::FactorCapExceeded {
                            cap: cfg.factor_cap,
                            detail: format!("no witness for basis vector {}", i + 1),
                        })
                    }
                }
            }
        }
        // second vector: C e_{n+i} -> e_{n+i}, keeping e_i fixed
        let u = red.column(n + i);
        let w = cplx::unit(dim, n + i);
        if !close(&u, &w) {
            let direct = cplx::lambda(&u, &w).norm() / cplx::norm(&u);
            if direct >= DIRECT_RATIO {
                red.push(&u, &w);
            } else {
                let mut y = cplx::unit(dim, i);
                y[n + i] = ONE;
                red.push(&u, &y);
                red.push(&y, &w);
            }
        }
        if red.steps.len() > cfg.factor_cap {
            return Err(Error::FactorCapExceeded {
                cap: cfg.factor_cap,
                detail: format!("after reducing pair {}", i + 1),
            });
        }
    }

    let factors: Vec<LinearFactor> = red
        .steps
        .iter()
        .map(|t| LinearFactor::Transvection(t.inverse()))
        .collect();
    let word = FactorWord { factors };
    let prod = word.product(n)?;
    let rel = linalg::frobenius(&(&prod - m.matrix())) / linalg::frobenius(m.matrix());
    if rel > 1e2 * cfg.tol {
        return Err(Error::Verification(format!(
            "factorization reconstructs with relative residual {rel:.3e}"
        )));
    }
    Ok(word)
}

/// A vector `y` in the span of the pairs `k >= i` with `ω(u, y)` and `ω(y, w)`
/// both comfortably nonzero.
fn witness(
    u: &[C64],
    w: &[C64],
    i: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    floor: f64,
) -> Option<Vec<C64>> {
    let dim = 2 * n;
    let mut candidates: Vec<Vec<C64>> = Vec::new();
    for k in i..n {
        candidates.push(cplx::unit(dim, k));
        candidates.push(cplx::unit(dim, n + k));
        let mut y = cplx::unit(dim, k);
        y[n + k] = ONE;
        candidates.push(y);
        let mut y = cplx::unit(dim, k);
        y[n + k] = -ONE;
        candidates.push(y);
    }
    for _ in 0..16 {
        let mut y = vec![ZERO; dim];
        for k in i..n {
            y[k] = cplx::re(rng.random_range(-2i32..=2) as f64);
            y[n + k] = cplx::re(rng.random_range(-2i32..=2) as f64);
        }
        if cplx::norm(&y) > 0.0 {
            candidates.push(y);
        }
    }
    let mut best: Option<(f64, Vec<C64>)> = None;
    for y in candidates {
        let q = quality(u, &y, w);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, y));
        }
    }
    match best {
        Some((q, y)) if q > floor && q > 1e-12 => Some(y),
        _ => None,
    }
}

/// The shear whose linear part is the given factor.
pub fn shear_of_factor(f: &LinearFactor, n: usize) -> Shear {
    let dim = 2 * n;
    match f {
        LinearFactor::Transvection(t) => Shear::new(t.v.clone(), UniPoly::linear(t.alpha)),
        LinearFactor::Elem(e) => {
            let mut v = vec![ZERO; dim];
            match e.side {
                Side::Upper => {
                    v[e.i - 1] -= ONE;
                    if e.j != e.i {
                        v[e.j - 1] -= ONE;
                    }
                    Shear::new(v, UniPoly::linear(-e.alpha))
                }
                Side::Lower => {
                    v[n + e.i - 1] += ONE;
                    if e.j != e.i {
                        v[n + e.j - 1] += ONE;
                    }
                    Shear::new(v, UniPoly::linear(e.alpha))
                }
            }
        }
    }
}

/// The shear word realizing a factorization, in the same order.
pub fn word_of_factors(w: &FactorWord, n: usize) -> Word {
    Word::new(
        w.factors
            .iter()
            .map(|f| shear_of_factor(f, n).into())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::re;
    use crate::jet::linear_part;
    use crate::shear::word_jet;

    fn rows(r: &[&[f64]]) -> CMat {
        linalg::from_rows(
            &r.iter()
                .map(|row| row.iter().map(|x| re(*x)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_elementary() {
        let f = ElemFactor {
            side: Side::Upper,
            i: 1,
            j: 1,
            alpha: re(3.0),
        };
        assert_eq!(*elem_matrix(&f, 1).unwrap().matrix(), rows(&[&[1.0, 3.0], &[0.0, 1.0]]));
        assert_eq!(sym_basis(1, 2, 2).unwrap(), rows(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert!(matches!(sym_basis(0, 2, 2), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(sym_basis(1, 3, 2), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn split_worked_example() {
        let a = rows(&[&[1.0, 2.0], &[2.0, 0.0]]);
        let fs = split_symmetric_block(Side::Upper, &a, 1e-12).unwrap();
        assert_eq!(fs.len(), 3);
        let coords: Vec<(usize, usize, C64)> = fs.iter().map(|f| (f.i, f.j, f.alpha)).collect();
        assert!(coords.contains(&(1, 2, re(2.0))));
        assert!(coords.contains(&(1, 1, re(-1.0))));
        assert!(coords.contains(&(2, 2, re(-2.0))));
        let mut prod = CMat::identity(4, 4);
        for f in &fs {
            prod *= elem_matrix(f, 2).unwrap().matrix();
        }
        assert_eq!(prod, block_matrix(Side::Upper, &a));
        assert!(split_symmetric_block(Side::Lower, &CMat::zeros(2, 2), 1e-12)
            .unwrap()
            .is_empty());
        assert_eq!(split_symmetric_block(Side::Lower, &rows(&[&[5.0]]), 1e-12).unwrap().len(), 1);
        assert!(matches!(
            split_symmetric_block(Side::Upper, &rows(&[&[1.0, 2.0], &[0.0, 1.0]]), 1e-9),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn factor_identity_and_unipotent() {
        let cfg = Config::default();
        assert!(factor_sp(&SympMatrix::identity(2), 0, &cfg).unwrap().is_empty());
        let m = SympMatrix::new(rows(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-12).unwrap();
        let w = factor_sp(&m, 0, &cfg).unwrap();
        assert_eq!(w.len(), 1);
        assert!(linalg::max_abs(&(w.product(1).unwrap() - m.matrix())) < 1e-15);
        // the same matrix as the transvection along e1 with α = −1
        let t = Transvection {
            v: vec![ONE, ZERO],
            alpha: -ONE,
        };
        assert_eq!(t.matrix(), *m.matrix());
    }

    #[test]
    fn rotation_as_three_elementary_factors() {
        let up = |a: f64| elem_matrix(&ElemFactor { side: Side::Upper, i: 1, j: 1, alpha: re(a) }, 1)
            .unwrap()
            .into_matrix();
        let lo = elem_matrix(&ElemFactor { side: Side::Lower, i: 1, j: 1, alpha: re(1.0) }, 1)
            .unwrap()
            .into_matrix();
        let r = rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(up(-1.0) * lo * up(-1.0), r);
        let m = SympMatrix::new(r.clone(), 1e-12).unwrap();
        let w = factor_sp(&m, 5, &Config::default()).unwrap();
        assert!(linalg::max_abs(&(w.product(1).unwrap() - r)) < 1e-14);
    }

    #[test]
    fn non_symplectic_input_is_rejected() {
        assert!(matches!(
            SympMatrix::new(rows(&[&[2.0, 0.0], &[0.0, 2.0]]), 1e-9),
            Err(Error::NotSymplectic(_))
        ));
    }

    #[test]
    fn shears_of_factors() {
        let t = LinearFactor::Transvection(Transvection {
            v: vec![ONE, ZERO],
            alpha: re(2.5),
        });
        let s = shear_of_factor(&t, 1);
        let jet = word_jet(&Word::new(vec![s.into()]), &[ZERO, ZERO], 1).unwrap();
        assert_eq!(linear_part(&jet), rows(&[&[1.0, -2.5], &[0.0, 1.0]]));

        let e = LinearFactor::Elem(ElemFactor {
            side: Side::Upper,
            i: 1,
            j: 1,
            alpha: re(0.75),
        });
        let s = shear_of_factor(&e, 1);
        assert_eq!(s.v, vec![-ONE, ZERO]);
        let jet = word_jet(&Word::new(vec![s.into()]), &[ZERO, ZERO], 1).unwrap();
        assert_eq!(linear_part(&jet), rows(&[&[1.0, 0.75], &[0.0, 1.0]]));

        for side in [Side::Upper, Side::Lower] {
            for (i, j) in [(1, 2), (2, 2), (1, 1)] {
                let f = LinearFactor::Elem(ElemFactor {
                    side,
                    i,
                    j,
                    alpha: cplx::c(0.3, -1.1),
                });
                let jet = word_jet(&Word::new(vec![shear_of_factor(&f, 2).into()]), &[ZERO; 4], 1)
                    .unwrap();
                assert!(linalg::max_abs(&(linear_part(&jet) - f.matrix(2).unwrap())) < 1e-15);
            }
        }
    }

    #[test]
    fn json_shape() {
        let w = FactorWord {
            factors: vec![
                LinearFactor::Transvection(Transvection {
                    v: vec![ONE, ZERO],
                    alpha: -ONE,
                }),
                LinearFactor::Elem(ElemFactor {
                    side: Side::Lower,
                    i: 1,
                    j: 1,
                    alpha: ONE,
                }),
            ],
        };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(
            s,
            r#"{"factors":[{"kind":"transvection","v":[[1.0,0.0],[0.0,0.0]],"alpha":[-1.0,-0.0]},{"kind":"elem","side":"l","i":1,"j":1,"alpha":[1.0,0.0]}]}"#
        );
        let back: FactorWord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
