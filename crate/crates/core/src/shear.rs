//! Symplectic shears, gradient shears and finite words of them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cplx::{self, C64, ZERO};
use crate::error::{Error, Result};
use crate::jet::{poly_of_series, JetMap, PolyScalar, Series, UniPoly};
use crate::linalg::{self, CMat};
use crate::symplectic::pullback_defect;

/// `z ↦ z + f(λ_v(z)) v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shear {
    pub v: Vec<C64>,
    pub f: UniPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    /// `(z, w) ↦ (z + ∇f(w), w)`
    First,
    /// `(z, w) ↦ (z, w + ∇g(z))`
    Second,
}

/// Gradient shear with a potential in `n` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradShear {
    pub side: Block,
    pub potential: PolyScalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    Shear(Shear),
    #[serde(rename = "gradshear")]
    Grad(GradShear),
}

/// A composition of factors; `factors[0]` is applied last.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Word {
    pub factors: Vec<Factor>,
}

impl Shear {
    pub fn new(v: Vec<C64>, f: UniPoly) -> Self {
        Shear { v, f }
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.v.len(), z.len())?;
        Ok(self.apply_unchecked(z))
    }

    fn apply_unchecked(&self, z: &[C64]) -> Vec<C64> {
        let s = self.f.eval(cplx::lambda(z, &self.v));
        if s == ZERO {
            return z.to_vec();
        }
        z.iter().zip(&self.v).map(|(zi, vi)| zi + s * vi).collect()
    }

    pub fn inverse(&self) -> Shear {
        Shear {
            v: self.v.clone(),
            f: self.f.neg(),
        }
    }

    fn jacobian(&self, z: &[C64]) -> CMat {
        let dim = z.len();
        let d = self.f.derivative_at(cplx::lambda(z, &self.v));
        let jv = cplx::j_apply(&self.v);
        CMat::from_fn(dim, dim, |i, k| {
            let id = if i == k { cplx::ONE } else { ZERO };
            id + d * self.v[i] * jv[k]
        })
    }

    fn apply_jet(&self, comps: &mut [Series], m: usize) {
        let jv = cplx::j_apply(&self.v);
        let mut l = Series::zero(comps[0].table());
        for (c, x) in comps.iter().zip(&jv) {
            if *x != ZERO {
                l.add_scaled(c, *x);
            }
        }
        // same rounding as point evaluation, so roots of f are hit exactly
        let base: Vec<C64> = comps.iter().map(Series::constant_term).collect();
        let z0 = cplx::lambda(&base, &self.v);
        l.coeffs_mut()[0] = ZERO;
        let a = self.f.taylor_at(z0, m);
        let fl = Series::horner(&a, &l);
        for (c, vi) in comps.iter_mut().zip(&self.v) {
            if *vi != ZERO {
                c.add_scaled(&fl, *vi);
            }
        }
    }
}

impl GradShear {
    pub fn new(side: Block, potential: PolyScalar) -> Self {
        GradShear { side, potential }
    }

    fn blocks(&self) -> (usize, usize) {
        match self.side {
            Block::First => (0, 1),
            Block::Second => (1, 0),
        }
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        if self.potential.is_empty() {
            return Ok(z.to_vec());
        }
        let n = self.potential.dim();
        check_dim(2 * n, z.len())?;
        let (moved, source) = self.blocks();
        let arg = &z[source * n..(source + 1) * n];
        let mut out = z.to_vec();
        for i in 0..n {
            out[moved * n + i] += self.potential.derivative(i).eval_unchecked(arg);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> GradShear {
        GradShear {
            side: self.side,
            potential: -&self.potential,
        }
    }

    fn jacobian(&self, z: &[C64]) -> CMat {
        if self.potential.is_empty() {
            return CMat::identity(z.len(), z.len());
        }
        let n = self.potential.dim();
        let (moved, source) = self.blocks();
        let arg = &z[source * n..(source + 1) * n];
        let mut jac = CMat::identity(2 * n, 2 * n);
        for i in 0..n {
            let di = self.potential.derivative(i);
            for k in 0..n {
                jac[(moved * n + i, source * n + k)] = di.derivative(k).eval_unchecked(arg);
            }
        }
        jac
    }

    fn apply_jet(&self, comps: &mut [Series]) {
        if self.potential.is_empty() {
            return;
        }
        let n = self.potential.dim();
        let (moved, source) = self.blocks();
        let args: Vec<Series> = comps[source * n..(source + 1) * n].to_vec();
        for i in 0..n {
            let d = poly_of_series(&self.potential.derivative(i), &args);
            comps[moved * n + i].add_assign(&d);
        }
    }
}

impl Factor {
    /// Ambient dimension; `None` for a gradient shear with zero potential,
    /// which acts as the identity in every dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Factor::Shear(s) => Some(s.v.len()),
            Factor::Grad(g) if g.potential.is_empty() => None,
            Factor::Grad(g) => Some(2 * g.potential.dim()),
        }
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        match self {
            Factor::Shear(s) => s.apply(z),
            Factor::Grad(g) => g.apply(z),
        }
    }

    pub fn inverse(&self) -> Factor {
        match self {
            Factor::Shear(s) => Factor::Shear(s.inverse()),
            Factor::Grad(g) => Factor::Grad(g.inverse()),
        }
    }

    pub fn jacobian(&self, z: &[C64]) -> CMat {
        match self {
            Factor::Shear(s) => s.jacobian(z),
            Factor::Grad(g) => g.jacobian(z),
        }
    }

    fn apply_jet(&self, comps: &mut [Series], m: usize) {
        match self {
            Factor::Shear(s) => s.apply_jet(comps, m),
            Factor::Grad(g) => g.apply_jet(comps),
        }
    }
}

impl From<Shear> for Factor {
    fn from(s: Shear) -> Self {
        Factor::Shear(s)
    }
}

impl From<GradShear> for Factor {
    fn from(g: GradShear) -> Self {
        Factor::Grad(g)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl Word {
    pub fn new(factors: Vec<Factor>) -> Self {
        Word { factors }
    }

    pub fn empty() -> Self {
        Word::default()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Factors in the order they act on a point.
    pub fn applied(&self) -> impl Iterator<Item = &Factor> {
        self.factors.iter().rev()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Word) -> Word {
        let mut factors = self.factors.clone();
        factors.extend(inner.factors.iter().cloned());
        Word { factors }
    }

    /// Prepend `outer`: returns `outer ∘ self`.
    pub fn then(&self, outer: &Word) -> Word {
        outer.after(self)
    }
}

pub fn shear_apply(s: &Factor, z: &[C64]) -> Result<Vec<C64>> {
    s.apply(z)
}

pub fn word_apply(w: &Word, z: &[C64]) -> Result<Vec<C64>> {
    let mut x = z.to_vec();
    for f in w.applied() {
        x = f.apply(&x)?;
    }
    Ok(x)
}

pub fn word_inverse(w: &Word) -> Word {
    Word {
        factors: w.factors.iter().rev().map(Factor::inverse).collect(),
    }
}

/// Degree-`m` Taylor truncation of the word at `p`.
pub fn word_jet(w: &Word, p: &[C64], m: usize) -> Result<JetMap> {
    for f in &w.factors {
        if let Some(d) = f.dim() {
            check_dim(d, p.len())?;
        }
    }
    let id = JetMap::identity(p, m);
    let mut comps: Vec<Series> = id.components().to_vec();
    for f in w.applied() {
        f.apply_jet(&mut comps, m);
    }
    Ok(JetMap::from_series(p.to_vec(), m, comps))
}

/// Jacobian of the word at `z` by the chain rule.
pub fn word_jacobian(w: &Word, z: &[C64]) -> Result<CMat> {
    let dim = z.len();
    let mut x = z.to_vec();
    let mut g = CMat::identity(dim, dim);
    for f in w.applied() {
        if let Some(d) = f.dim() {
            check_dim(d, dim)?;
        }
        g = f.jacobian(&x) * g;
        x = f.apply(&x)?;
    }
    Ok(g)
}

/// What [`word_verify`] should check.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyRequest {
    /// Points at which the Jacobian is tested for symplecticity.
    pub samples: Vec<Vec<C64>>,
    /// Order of the jet whose pullback defect is computed at the first sample.
    pub defect_order: usize,
    /// Points that must be fixed exactly.
    pub fixpoints: Vec<Vec<C64>>,
    /// `(a, N)`: the word must agree with the identity to order `N − 1` at `a`.
    pub flats: Vec<(Vec<C64>, usize)>,
    /// Target jets; the word's jet at each base is compared coefficientwise.
    pub jets: Vec<JetMap>,
    /// `(point, image)` pairs.
    pub maps: Vec<(Vec<C64>, Vec<C64>)>,
    /// Jets at each point must equal a translation up to the given order.
    pub translations: Vec<(Vec<C64>, usize)>,
}

impl VerifyRequest {
    /// Seeded Gaussian sample points of the given radius scale.
    pub fn random_samples(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, radius).expect("valid normal");
        (0..count)
            .map(|_| {
                (0..dim)
                    .map(|_| cplx::c(normal.sample(&mut rng), normal.sample(&mut rng)))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub symplectic_residual: f64,
    pub defect_max: f64,
    pub fixpoint_residuals: Vec<f64>,
    pub flat_residuals: Vec<f64>,
    pub jet_residuals: Vec<f64>,
    pub map_residuals: Vec<f64>,
    pub translation_residuals: Vec<f64>,
}

impl VerificationRecord {
    pub fn worst(&self) -> f64 {
        [
            self.symplectic_residual,
            self.defect_max,
            max_of(&self.fixpoint_residuals),
            max_of(&self.flat_residuals),
            max_of(&self.jet_residuals),
            max_of(&self.map_residuals),
            max_of(&self.translation_residuals),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// Numeric and jet-level checks of a word. Never fails on bad numbers; only
/// dimension errors are reported as `Err`.
pub fn word_verify(w: &Word, req: &VerifyRequest) -> Result<VerificationRecord> {
    let mut rec = VerificationRecord::default();
    for z in &req.samples {
        let g = word_jacobian(w, z)?;
        let res = linalg::symplectic_residual(&g) / (1.0 + linalg::max_abs(&g).powi(2));
        rec.symplectic_residual = rec.symplectic_residual.max(res);
    }
    if req.defect_order >= 1 {
        if let Some(p) = req.samples.first() {
            let jet = word_jet(w, p, req.defect_order)?;
            rec.defect_max = pullback_defect(&jet).max_abs();
        }
    }
    for c in &req.fixpoints {
        let img = word_apply(w, c)?;
        rec.fixpoint_residuals.push(cplx::dist(&img, c));
    }
    for (a, n) in &req.flats {
        let jet = word_jet(w, a, n.saturating_sub(1))?;
        let dev = (0..*n)
            .map(|d| jet.deviation_from_identity(d))
            .fold(0.0, f64::max);
        rec.flat_residuals.push(dev);
    }
    for target in &req.jets {
        let jet = word_jet(w, target.base(), target.order())?;
        rec.jet_residuals.push(jet.max_diff(target));
    }
    for (p, q) in &req.maps {
        rec.map_residuals.push(cplx::dist(&word_apply(w, p)?, q));
    }
    for (p, m) in &req.translations {
        let jet = word_jet(w, p, *m)?;
        let dev = (1..=*m)
            .map(|d| jet.deviation_from_identity(d))
            .fold(0.0, f64::max);
        rec.translation_residuals.push(dev);
    }
    Ok(rec)
}
