//! Tame discrete sets: gradient interpolation, Lagrangian projections,
//! plane embeddings, the determinant-projection bound and a generator for
//! shell-structured unavoidable sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::cplx::{self, re, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::jet::{poly_of_series, JetMap, MultiIndex, PolyScalar};
use crate::linalg::{self, CMat, CVec};
use crate::shear::{Block, GradShear, Word};
use crate::symplectic::pullback_defect;

/// Finitely many pairwise distinct points of `C^{2n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct DiscreteSet {
    pub points: Vec<Vec<C64>>,
}

#[derive(Deserialize)]
struct RawSet {
    points: Vec<Vec<C64>>,
}

impl TryFrom<RawSet> for DiscreteSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        DiscreteSet::new(raw.points)
    }
}

impl DiscreteSet {
    pub fn new(points: Vec<Vec<C64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            let dim = first.len();
            if dim == 0 || dim % 2 != 0 {
                return Err(Error::Input(format!("ambient dimension {dim} is not even")));
            }
            for p in &points {
                if p.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.len(),
                    });
                }
            }
        }
        for (i, p) in points.iter().enumerate() {
            if points[i + 1..].contains(p) {
                return Err(Error::DuplicatePoints(format!("point {i} repeats")));
            }
        }
        Ok(DiscreteSet { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Half the ambient dimension, 0 for the empty set.
    pub fn half_dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len() / 2)
    }

    fn blocks(&self, k: usize) -> (&[C64], &[C64]) {
        let n = self.half_dim();
        self.points[k].split_at(n)
    }
}

fn check_distinct(points: &[Vec<C64>], what: &str) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        if points[i + 1..].contains(p) {
            return Err(Error::DuplicatePoints(format!("{what} {i} repeats")));
        }
    }
    Ok(())
}

fn monomials(n: usize, max_deg: usize) -> Vec<MultiIndex> {
    (1..=max_deg)
        .flat_map(|d| MultiIndex::all_of_degree(n, d))
        .collect()
}

/// `∂_i u^α` at `u`.
fn monomial_partial(e: &MultiIndex, i: usize, u: &[C64]) -> C64 {
    let Some(lower) = e.lower(i) else {
        return ZERO;
    };
    let mut acc = re(e.0[i] as f64);
    for (x, k) in u.iter().zip(&lower.0) {
        acc *= cplx::cpow(*x, *k);
    }
    acc
}

/// Gradient of `p` at `z`.
pub fn gradient_at(p: &PolyScalar, z: &[C64]) -> Result<Vec<C64>> {
    (0..z.len()).map(|i| p.derivative(i).eval(z)).collect()
}

/// A polynomial `f` on `C^n` with `∇f(points[k]) = targets[k]`.
///
/// The degree grows until a minimum-norm solve in the monomial basis meets
/// the targets; the points are rescaled into the unit ball first.
pub fn gradient_interpolant(points: &[Vec<C64>], targets: &[Vec<C64>], cfg: &Config) -> Result<PolyScalar> {
    if points.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: targets.len(),
        });
    }
    let Some(first) = points.first() else {
        return Err(Error::Input("gradient interpolation needs at least one point".into()));
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::Input("points live in C^0".into()));
    }
    for p in points.iter().chain(targets) {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
    }
    check_distinct(points, "point")?;

    let gmax = targets.iter().map(|g| cplx::max_abs(g)).fold(0.0, f64::max);
    if gmax == 0.0 {
        return Ok(PolyScalar::zero(n));
    }
    let s = points.iter().map(|p| cplx::norm(p)).fold(1.0, f64::max);
    let scaled: Vec<Vec<C64>> = points.iter().map(|p| cplx::scale(p, re(1.0 / s))).collect();
    let rhs = CVec::from_iterator(
        n * points.len(),
        targets.iter().flat_map(|g| g.iter().map(|x| x * s)),
    );
    let tol = cfg.tol * (1.0 + gmax * s);
    let cap = (points.len() + 1).min(cfg.max_degree.max(1));
    let mut best = f64::INFINITY;
    for deg in 1..=cap {
        let basis = monomials(n, deg);
        let m = CMat::from_fn(n * points.len(), basis.len(), |row, col| {
            monomial_partial(&basis[col], row % n, &scaled[row / n])
        });
        let sol = linalg::lstsq(&m, &rhs, 1e-14)?;
        let res = (&m * &sol - &rhs).iter().map(|x| x.norm()).fold(0.0, f64::max);
        best = best.min(res);
        if res > tol {
            continue;
        }
        let f = PolyScalar::from_terms(
            n,
            basis
                .iter()
                .zip(sol.iter())
                .map(|(e, c)| (e.clone(), c / s.powi(e.degree() as i32))),
        )?;
        return Ok(f.normalized(0.0));
    }
    Err(Error::IllConditioned { residual: best })
}

/// Two gradient shears sending the k-th point `(z_k, w_k)` of `set` to
/// `k·e₁` (k counted from 1), for sets whose `w`-coordinates are distinct.
pub fn lagrangian_tame_word(set: &DiscreteSet, cfg: &Config) -> Result<Word> {
    if set.is_empty() {
        return Ok(Word::empty());
    }
    let n = set.half_dim();
    let ws: Vec<Vec<C64>> = (0..set.len()).map(|k| set.blocks(k).1.to_vec()).collect();
    for (i, w) in ws.iter().enumerate() {
        if let Some(j) = ws[i + 1..].iter().position(|x| x == w) {
            return Err(Error::Precondition(format!(
                "points {i} and {} share their second block; separate the fibers first",
                i + j + 1
            )));
        }
    }
    let lattice: Vec<Vec<C64>> = (1..=set.len())
        .map(|k| cplx::scale(&cplx::unit(n, 0), re(k as f64)))
        .collect();
    let to_lattice: Vec<Vec<C64>> = (0..set.len())
        .map(|k| cplx::sub(&lattice[k], set.blocks(k).0))
        .collect();
    let f = gradient_interpolant(&ws, &to_lattice, cfg)?;
    let back: Vec<Vec<C64>> = ws.iter().map(|w| cplx::scale(w, -ONE)).collect();
    let g = gradient_interpolant(&lattice, &back, cfg)?;
    Ok(Word::new(vec![
        GradShear::new(Block::Second, g).into(),
        GradShear::new(Block::First, f).into(),
    ]))
}

/// Output of [`fiber_separation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSeparation {
    /// Distinct `w`-values in order of first appearance.
    pub fibers: Vec<Vec<C64>>,
    /// Point indices of each fiber.
    pub members: Vec<Vec<usize>>,
    pub offsets: Vec<Vec<C64>>,
    /// `R_1 < R_2 < …`, one more than there are fibers.
    pub radii: Vec<f64>,
    pub word: Word,
}

/// Offsets `b_k` with `R_k < |z_{k,j} + b_k| < R_{k+1}` and the gradient
/// shear `(z + ∇f(w), w)` realizing them; afterwards the first-block
/// projection of the set is injective.
pub fn fiber_separation(set: &DiscreteSet, cfg: &Config) -> Result<FiberSeparation> {
    let n = set.half_dim();
    let mut fibers: Vec<Vec<C64>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for k in 0..set.len() {
        let w = set.blocks(k).1;
        match fibers.iter().position(|x| x == w) {
            Some(i) => members[i].push(k),
            None => {
                fibers.push(w.to_vec());
                members.push(vec![k]);
            }
        }
    }
    let e1 = if n > 0 { cplx::unit(n, 0) } else { Vec::new() };
    let mut radii = vec![0.0];
    let mut offsets = Vec::with_capacity(fibers.len());
    for idx in &members {
        let r = *radii.last().expect("nonempty");
        let zs: Vec<&[C64]> = idx.iter().map(|&k| set.blocks(k).0).collect();
        let min = zs.iter().map(|z| cplx::norm(z)).fold(f64::INFINITY, f64::min);
        let max = zs.iter().map(|z| cplx::norm(z)).fold(0.0, f64::max);
        let b = if min > r {
            vec![ZERO; n]
        } else {
            cplx::scale(&e1, re(r + max + 1.0))
        };
        let top = zs
            .iter()
            .map(|z| cplx::norm(&cplx::add(z, &b)))
            .fold(0.0, f64::max);
        radii.push(top + 1.0);
        offsets.push(b);
    }
    let word = if fibers.is_empty() || offsets.iter().all(|b| cplx::max_abs(b) == 0.0) {
        Word::empty()
    } else {
        let f = gradient_interpolant(&fibers, &offsets, cfg)?;
        Word::new(vec![GradShear::new(Block::First, f).into()])
    };
    Ok(FiberSeparation {
        fibers,
        members,
        offsets,
        radii,
        word,
    })
}

/// `E₁ = {|z| ≥ |w|}` and `E₂ = {|z| < |w|}` for points `(z, w)`.
pub fn set_split(set: &DiscreteSet) -> (DiscreteSet, DiscreteSet) {
    let (a, b): (Vec<_>, Vec<_>) = (0..set.len()).partition(|&k| {
        let (z, w) = set.blocks(k);
        cplx::norm(z) >= cplx::norm(w)
    });
    let pick = |idx: Vec<usize>| DiscreteSet {
        points: idx.into_iter().map(|k| set.points[k].clone()).collect(),
    };
    (pick(a), pick(b))
}

/// A polynomial map `Φ` of `C²` acting on the coordinates `(z_j, z_{n+j})`
/// of `C^{2n}`; `j` counts from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneMap {
    pub n: usize,
    pub j: usize,
    pub phi: [PolyScalar; 2],
}

impl PlaneMap {
    fn coords(&self) -> (usize, usize) {
        (self.j - 1, self.n + self.j - 1)
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: z.len(),
            });
        }
        let (a, b) = self.coords();
        let arg = [z[a], z[b]];
        let mut out = z.to_vec();
        out[a] = self.phi[0].eval(&arg)?;
        out[b] = self.phi[1].eval(&arg)?;
        Ok(out)
    }

    pub fn jet(&self, base: &[C64], order: usize) -> Result<JetMap> {
        let id = JetMap::identity(base, order);
        let (a, b) = self.coords();
        let mut comps = id.components().to_vec();
        let args = [comps[a].clone(), comps[b].clone()];
        comps[a] = poly_of_series(&self.phi[0], &args);
        comps[b] = poly_of_series(&self.phi[1], &args);
        Ok(JetMap::from_series(base.to_vec(), order, comps))
    }

    /// Largest pullback-defect coefficient of the order-`order` jets at the
    /// given points.
    pub fn symplectic_defect(&self, samples: &[Vec<C64>], order: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for z in samples {
            worst = worst.max(pullback_defect(&self.jet(z, order)?).max_abs());
        }
        Ok(worst)
    }
}

/// `det DΦ − 1` as a polynomial.
pub fn jacobian_defect(phi: &[PolyScalar; 2]) -> PolyScalar {
    let det = &(&phi[0].derivative(0) * &phi[1].derivative(1))
        - &(&phi[0].derivative(1) * &phi[1].derivative(0));
    &det - &PolyScalar::constant(2, ONE)
}

/// Embed `Φ` into `C^{2n}` at plane `j`; `Φ` must have Jacobian determinant
/// identically one.
pub fn plane_embed(phi: [PolyScalar; 2], j: usize, n: usize, cfg: &Config) -> Result<PlaneMap> {
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange(format!("plane {j} of {n}")));
    }
    let phi = [phi[0].clone().with_dim(2)?, phi[1].clone().with_dim(2)?];
    let dev = jacobian_defect(&phi).max_abs();
    if dev > cfg.tol {
        return Err(Error::NonUnitJacobian(dev));
    }
    Ok(PlaneMap { n, j, phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|A⁻¹u|` against `‖PA‖^k` for `det A = 1`, `P` an orthogonal projection
/// of rank `k` and `u` a unit vector in its kernel.
pub fn projection_bound_check(a: &CMat, p: &CMat, u: &[C64], tol: f64) -> Result<ProjectionBound> {
    let n = a.nrows();
    if a.ncols() != n || p.nrows() != n || p.ncols() != n {
        return Err(Error::Input("A and P must be square of the same size".into()));
    }
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    let det = a.clone().determinant();
    if (det - ONE).norm() > tol {
        return Err(Error::Precondition(format!("det A = {det} is not 1")));
    }
    let idem = linalg::max_abs(&(p * p - p));
    let herm = linalg::max_abs(&(p - p.adjoint()));
    if idem > tol || herm > tol {
        return Err(Error::Precondition("P is not an orthogonal projection".into()));
    }
    let k = p.trace().re.round() as usize;
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!("rank {k} outside 1..{n}")));
    }
    let uv = CVec::from_column_slice(u);
    if ((p * &uv).norm() > tol) || (uv.norm() - 1.0).abs() > tol {
        return Err(Error::Precondition("u is not a unit vector in ker P".into()));
    }
    let lhs = linalg::solve(a, &uv)?.norm();
    let rhs = linalg::operator_norm(&(p * a)).powi(k as i32);
    Ok(ProjectionBound {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9) + tol,
    })
}

/// Outcome of a seeded Monte-Carlo run of [`projection_bound_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionAudit {
    pub trials: usize,
    pub passed: usize,
    /// Smallest `rhs / lhs` seen.
    pub min_ratio: f64,
    pub by_shape: Vec<ShapeTally>,
}

/// Trials and passes for one `(n, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeTally {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub passed: usize,
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| {
        cplx::c(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    })
}

/// Random `A` with `det A = 1`, rank-`k` orthogonal `P` and unit `u ∈ ker P`
/// for `n` in `2..=n_max`.
pub fn projection_audit(trials: usize, n_max: usize, seed: u64, tol: f64) -> Result<ProjectionAudit> {
    if n_max < 2 {
        return Err(Error::Input("the bound needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passed = 0;
    let mut min_ratio = f64::INFINITY;
    let mut by_shape: Vec<ShapeTally> = (2..=n_max)
        .flat_map(|n| (1..n).map(move |k| ShapeTally { n, k, trials: 0, passed: 0 }))
        .collect();
    for _ in 0..trials {
        let n = rng.random_range(2..=n_max);
        let k = rng.random_range(1..n);
        let mut a = gaussian_matrix(&mut rng, n, n);
        let det = a.clone().determinant();
        a /= det.powf(1.0 / n as f64);
        let q = gaussian_matrix(&mut rng, n, n).qr().q();
        let qk = q.columns(0, k).into_owned();
        let p = &qk * qk.adjoint();
        let x = gaussian_matrix(&mut rng, n, 1);
        let mut u = &x - &p * &x;
        u /= re(u.norm());
        let b = projection_bound_check(&a, &p, u.as_slice(), tol)?;
        let tally = by_shape
            .iter_mut()
            .find(|t| t.n == n && t.k == k)
            .expect("shape listed");
        tally.trials += 1;
        if b.holds {
            passed += 1;
            tally.passed += 1;
        }
        min_ratio = min_ratio.min(b.rhs / b.lhs);
    }
    Ok(ProjectionAudit {
        trials,
        passed,
        min_ratio,
        by_shape,
    })
}

/// `(k/r)^k ((a₂ − a₁)/(k+1))^{k+1}`.
pub fn rr_delta(a1: f64, a2: f64, r: f64, k: u32) -> Result<f64> {
    if !(a1 > 0.0 && a2 >= a1 && r > 0.0) || k == 0 {
        return Err(Error::Input(format!(
            "need 0 < a1 <= a2, r > 0, k >= 1 (got {a1}, {a2}, {r}, {k})"
        )));
    }
    let k = k as i32;
    Ok((k as f64 / r).powi(k) * ((a2 - a1) / (k + 1) as f64).powi(k + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellConstants {
    /// `a_1, a_2, …` with `a_{k+1} = a_k + 1/k²`.
    pub a: Vec<f64>,
    /// `a₁ + π²/6`.
    pub limit: f64,
    /// `δ_1, δ_2, …` with `δ_j` from `a_{j+1}, a_{j+2}`, `r = j + 2`, `k = 2`.
    pub delta: Vec<f64>,
}

/// The radii `a_k` and shell widths `δ_j` for `j = 1..=shells`.
pub fn shell_constants(a1: f64, shells: usize) -> Result<ShellConstants> {
    if !(a1 > 1.0) {
        return Err(Error::Precondition(format!("a1 = {a1} must exceed 1")));
    }
    let mut a = vec![a1];
    for k in 1..shells + 2 {
        let last = a[k - 1];
        a.push(last + 1.0 / (k * k) as f64);
    }
    let delta = (1..=shells)
        .map(|j| rr_delta(a[j], a[j + 1], (j + 2) as f64, 2))
        .collect::<Result<_>>()?;
    Ok(ShellConstants {
        a,
        limit: a1 + std::f64::consts::PI.powi(2) / 6.0,
        delta,
    })
}

/// `a₁ + Σ_{k=1}^{terms} 1/k²` summed smallest first, with the tail bound
/// `1/terms` on the distance to the limit.
pub fn a_partial(a1: f64, terms: usize) -> (f64, f64) {
    let s: f64 = (1..=terms).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
    (a1 + s, if terms == 0 { f64::INFINITY } else { 1.0 / terms as f64 })
}

/// A cubic lattice `origin + spacing·(i_1, …, i_d)`, `0 <= i < per_axis`,
/// in the real coordinates of `C^{d/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicLattice {
    pub real_dim: usize,
    pub origin: f64,
    pub spacing: f64,
    pub per_axis: usize,
}

impl CubicLattice {
    pub fn len(&self) -> usize {
        self.per_axis.pow(self.real_dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `idx`-th lattice point as a complex vector.
    pub fn point(&self, mut idx: usize) -> Vec<C64> {
        let mut x = Vec::with_capacity(self.real_dim);
        for _ in 0..self.real_dim {
            x.push(self.origin + self.spacing * (idx % self.per_axis) as f64);
            idx /= self.per_axis;
        }
        x.chunks(2).map(|p| cplx::c(p[0], p[1])).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<C64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance(&self, z: &[C64]) -> f64 {
        let mut acc = 0.0;
        for x in z.iter().flat_map(|c| [c.re, c.im]) {
            let i = if self.spacing > 0.0 {
                ((x - self.origin) / self.spacing).round().clamp(0.0, (self.per_axis - 1) as f64)
            } else {
                0.0
            };
            let d = x - (self.origin + self.spacing * i);
            acc += d * d;
        }
        acc.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCertificate {
    pub samples: usize,
    pub max_distance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellCounts {
    pub sphere: usize,
    pub lattice: usize,
    pub product: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub j: usize,
    pub delta_j: f64,
    pub resolution: usize,
    pub counts: ShellCounts,
    /// `E_j′` on the sphere of radius `j` in `C²`.
    pub sphere_net: Vec<[C64; 2]>,
    /// `E_j″` in the box of `C^{2n−2}`.
    pub lattice: CubicLattice,
    pub certificate: CoveringCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSet {
    pub n: usize,
    pub a1: f64,
    pub j_max: usize,
    pub box_radius: f64,
    pub shells: Vec<Shell>,
    pub note: String,
}

impl ShellSet {
    /// `(j, |π′(E) ∩ ∂(jB₂)|)` for every shell.
    pub fn projection_counts(&self) -> Vec<(usize, usize)> {
        self.shells.iter().map(|s| (s.j, s.sphere_net.len())).collect()
    }

    /// Largest `| |π′(e)| − j |` over the sphere nets.
    pub fn sphere_deviation(&self) -> f64 {
        self.shells
            .iter()
            .flat_map(|s| {
                s.sphere_net
                    .iter()
                    .map(move |p| ((p[0].norm_sqr() + p[1].norm_sqr()).sqrt() - s.j as f64).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Parameters of [`unavoidable_set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRequest {
    pub n: usize,
    pub j_max: usize,
    pub a1: f64,
    pub resolution: usize,
    pub box_radius: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    10_000
}

/// Largest lattice the generator is willing to describe.
const LATTICE_CAP: usize = 1 << 26;

/// Angular net on the sphere of radius `j` in `C²`:
/// `j(cos θ e^{iφ₁}, sin θ e^{iφ₂})` on a `resolution`-step grid, with the
/// degenerate circles at `θ = 0, π/2` taken once per angle.
fn sphere_net(j: f64, resolution: usize) -> Vec<[C64; 2]> {
    let m = resolution;
    let mut out = Vec::new();
    let phase = |b: usize| std::f64::consts::TAU * b as f64 / m as f64;
    for a in 0..=m {
        let theta = std::f64::consts::FRAC_PI_2 * a as f64 / m as f64;
        let (s, c) = if a == 0 {
            (0.0, 1.0)
        } else if a == m {
            (1.0, 0.0)
        } else {
            theta.sin_cos()
        };
        for b1 in 0..m {
            for b2 in 0..m {
                if (a == 0 && b2 > 0) || (a == m && b1 > 0) {
                    continue;
                }
                out.push([
                    C64::from_polar(j * c, phase(b1)),
                    C64::from_polar(j * s, phase(b2)),
                ]);
            }
        }
    }
    out
}

/// Shells `E_j = E_j′ × E_j″` for `j = 1..=j_max`: an angular net on the
/// sphere of radius `j` in `C²` times a cubic lattice of spacing below
/// `2δ_j/√(4n−4)` in the box `[−R, R]^{4n−4}`, whose covering radius is then
/// below `δ_j`; the covering is certified by seeded sampling of the box.
pub fn unavoidable_set(req: &ShellRequest) -> Result<ShellSet> {
    if req.n < 2 {
        return Err(Error::Precondition("the construction needs n >= 2".into()));
    }
    if req.resolution == 0 {
        return Err(Error::Input("sphere resolution must be positive".into()));
    }
    if !(req.box_radius >= 0.0) {
        return Err(Error::Input("box radius must be nonnegative".into()));
    }
    let consts = shell_constants(req.a1, req.j_max)?;
    let d = 4 * req.n - 4;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut shells = Vec::with_capacity(req.j_max);
    for j in 1..=req.j_max {
        let delta = consts.delta[j - 1];
        let h_max = 2.0 * delta / (d as f64).sqrt();
        let r = req.box_radius;
        let cells = if r == 0.0 {
            0
        } else {
            (2.0 * r / h_max).floor() as usize + 1
        };
        let per_axis = cells + 1;
        let total = (per_axis as f64).powi(d as i32);
        if total > LATTICE_CAP as f64 {
            return Err(Error::Input(format!(
                "shell {j}: lattice of {total:.3e} points for box radius {r} and delta {delta:.3e}"
            )));
        }
        let lattice = CubicLattice {
            real_dim: d,
            origin: -r,
            spacing: if cells == 0 { 0.0 } else { 2.0 * r / cells as f64 },
            per_axis,
        };
        let mut max_distance: f64 = 0.0;
        for _ in 0..req.samples {
            let z: Vec<C64> = (0..d / 2)
                .map(|_| {
                    let x = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
                    let y = if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
                    cplx::c(x, y)
                })
                .collect();
            max_distance = max_distance.max(lattice.distance(&z));
        }
        let net = sphere_net(j as f64, req.resolution);
        let counts = ShellCounts {
            sphere: net.len(),
            lattice: lattice.len(),
            product: net.len() as u128 * lattice.len() as u128,
        };
        let certificate = CoveringCertificate {
            samples: req.samples,
            max_distance,
            passed: max_distance < delta,
        };
        if !certificate.passed {
            return Err(Error::Verification(format!(
                "shell {j}: sampled point at distance {max_distance:.3e} >= delta {delta:.3e}"
            )));
        }
        shells.push(Shell {
            j,
            delta_j: delta,
            resolution: req.resolution,
            counts,
            sphere_net: net,
            lattice,
            certificate,
        });
    }
    Ok(ShellSet {
        n: req.n,
        a1: req.a1,
        j_max: req.j_max,
        box_radius: req.box_radius,
        shells,
        note: "E_j' is a deterministic angular net on the sphere of radius j standing in for \
               the Rosay-Rudin set E(a_j, a_{j+1}, j, j+1, 1); only its geometry is certified. \
               E_j'' is truncated to the box and covers it at radius delta_j."
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::c;
    use crate::shear::word_apply;

    fn pt(v: &[(f64, f64)]) -> Vec<C64> {
        v.iter().map(|&(a, b)| c(a, b)).collect()
    }

    #[test]
    fn gradient_single_point_is_linear() {
        let v = pt(&[(1.0, 2.0), (-0.5, 0.0)]);
        let f = gradient_interpolant(&[vec![ZERO, ZERO]], &[v.clone()], &Config::default()).unwrap();
        assert_eq!(f.degree(), Some(1));
        assert!(cplx::dist(&gradient_at(&f, &[ZERO, ZERO]).unwrap(), &v) < 1e-12);
    }

    #[test]
    fn gradient_two_points_gives_square() {
        let f = gradient_interpolant(&[vec![ZERO], vec![ONE]], &[vec![ZERO], vec![re(2.0)]], &Config::default())
            .unwrap();
        let sq = PolyScalar::monomial(MultiIndex(vec![2]), ONE);
        assert!(f.max_diff(&sq) < 1e-10, "{f:?}");
    }

    #[test]
    fn gradient_zero_targets() {
        let pts = vec![vec![ONE, ZERO], vec![ZERO, ONE]];
        let f = gradient_interpolant(&pts, &[vec![ZERO; 2], vec![ZERO; 2]], &Config::default()).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn gradient_rejects_duplicates() {
        let pts = vec![vec![ONE], vec![ONE]];
        assert!(matches!(
            gradient_interpolant(&pts, &[vec![ONE], vec![ZERO]], &Config::default()),
            Err(Error::DuplicatePoints(_))
        ));
    }

    #[test]
    fn lagrangian_word_reaches_lattice() {
        let points: Vec<Vec<C64>> = (1..=5)
            .map(|k| {
                let k = k as f64;
                pt(&[(k * k, 0.0), (0.5, -k), (k, 0.0), (0.0, 0.3 * k)])
            })
            .collect();
        let set = DiscreteSet::new(points).unwrap();
        let w = lagrangian_tame_word(&set, &Config::default()).unwrap();
        for (k, p) in set.points.iter().enumerate() {
            let target = cplx::scale(&cplx::unit(4, 0), re((k + 1) as f64));
            assert!(cplx::dist(&word_apply(&w, p).unwrap(), &target) < 1e-8);
        }
    }

    #[test]
    fn lagrangian_word_rejects_shared_fiber() {
        let set = DiscreteSet::new(vec![pt(&[(1.0, 0.0), (2.0, 0.0)]), pt(&[(3.0, 0.0), (2.0, 0.0)])]).unwrap();
        assert!(matches!(
            lagrangian_tame_word(&set, &Config::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fibers_nest_in_annuli() {
        // fiber sizes 2, 1, 3
        let w = [(0.0, 0.0), (1.0, 1.0), (-2.0, 0.5)];
        let zs = [
            vec![(0.5, 0.0), (-0.5, 0.0)],
            vec![(0.1, 0.0)],
            vec![(3.0, 0.0), (0.0, 3.0), (1.0, 1.0)],
        ];
        let mut points = Vec::new();
        for (wk, fz) in w.iter().zip(&zs) {
            for z in fz {
                points.push(pt(&[*z, *wk]));
            }
        }
        let set = DiscreteSet::new(points).unwrap();
        let sep = fiber_separation(&set, &Config::default()).unwrap();
        assert!(sep.radii.windows(2).all(|r| r[0] < r[1]));
        for (k, idx) in sep.members.iter().enumerate() {
            for &i in idx {
                let img = word_apply(&sep.word, &set.points[i]).unwrap();
                let m = img[0].norm();
                assert!(sep.radii[k] < m && m < sep.radii[k + 1]);
            }
        }
        let moved: Vec<Vec<C64>> = set
            .points
            .iter()
            .map(|p| word_apply(&sep.word, p).unwrap()[..1].to_vec())
            .collect();
        assert!(check_distinct(&moved, "image").is_ok());
    }

    #[test]
    fn singleton_fibers_need_no_offsets() {
        let set = DiscreteSet::new(vec![pt(&[(1.0, 0.0), (0.0, 0.0)]), pt(&[(5.0, 0.0), (1.0, 0.0)])]).unwrap();
        let sep = fiber_separation(&set, &Config::default()).unwrap();
        assert!(sep.offsets.iter().all(|b| cplx::max_abs(b) == 0.0));
        assert!(sep.word.is_empty());
    }

    #[test]
    fn split_ties_go_first() {
        let set = DiscreteSet::new(vec![
            pt(&[(1.0, 0.0), (0.0, 0.0)]),
            pt(&[(0.0, 0.0), (2.0, 0.0)]),
            pt(&[(0.0, 1.0), (1.0, 0.0)]),
            pt(&[(3.0, 0.0), (0.0, 1.0)]),
            pt(&[(0.0, 0.0), (0.0, -1.0)]),
            pt(&[(0.5, 0.0), (0.6, 0.0)]),
        ])
        .unwrap();
        let (e1, e2) = set_split(&set);
        assert_eq!(e1.points, vec![set.points[0].clone(), set.points[2].clone(), set.points[3].clone()]);
        assert_eq!(e2.len(), 3);
    }

    #[test]
    fn plane_embed_moves_its_plane_only() {
        let x = PolyScalar::var(2, 0);
        let y = PolyScalar::var(2, 1);
        let phi = [&x + &y.pow(2), y.clone()];
        let m = plane_embed(phi, 1, 2, &Config::default()).unwrap();
        let z = pt(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        assert_eq!(m.apply(&z).unwrap(), pt(&[(10.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]));
        let samples = crate::shear::VerifyRequest::random_samples(4, 3, 1.0, 2);
        assert!(m.symplectic_defect(&samples, 4).unwrap() < 1e-12);
    }

    #[test]
    fn plane_embed_rejects_nonunit_jacobian() {
        let x = PolyScalar::var(2, 0);
        let y = PolyScalar::var(2, 1);
        assert!(matches!(
            plane_embed([x.scale(re(2.0)), y], 1, 2, &Config::default()),
            Err(Error::NonUnitJacobian(_))
        ));
    }

    #[test]
    fn projection_bound_identity() {
        let a = CMat::identity(2, 2);
        let mut p = CMat::zeros(2, 2);
        p[(1, 1)] = ONE;
        let b = projection_bound_check(&a, &p, &[ONE, ZERO], 1e-12).unwrap();
        assert_eq!((b.lhs, b.rhs, b.holds), (1.0, 1.0, true));
    }

    #[test]
    fn projection_bound_diagonal_is_tight() {
        for t in [0.5, 2.0, 10.0] {
            let mut a = CMat::zeros(2, 2);
            a[(0, 0)] = re(t);
            a[(1, 1)] = re(1.0 / t);
            let mut p = CMat::zeros(2, 2);
            p[(1, 1)] = ONE;
            let b = projection_bound_check(&a, &p, &[ONE, ZERO], 1e-12).unwrap();
            assert!((b.lhs - 1.0 / t).abs() < 1e-12 && (b.rhs - 1.0 / t).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_bound_fails_in_codimension_two() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = ONE;
        a[(1, 1)] = re(2.0);
        a[(2, 2)] = re(0.5);
        let mut p = CMat::zeros(3, 3);
        p[(2, 2)] = ONE;
        let b = projection_bound_check(&a, &p, &[ONE, ZERO, ZERO], 1e-12).unwrap();
        assert_eq!((b.lhs, b.rhs, b.holds), (1.0, 0.5, false));
    }

    #[test]
    fn projection_bound_holds_in_codimension_one() {
        let audit = projection_audit(300, 4, 17, 1e-9).unwrap();
        for t in audit.by_shape.iter().filter(|t| t.k + 1 == t.n) {
            assert_eq!(t.passed, t.trials, "{t:?}");
        }
    }

    #[test]
    fn shell_constants_recursion() {
        let s = shell_constants(1.5, 2).unwrap();
        assert_eq!(&s.a[..3], &[1.5, 2.5, 2.75]);
        assert!((s.a[3] - (2.75 + 1.0 / 9.0)).abs() < 1e-15);
        assert!((s.delta[0] - 4.0 / 15552.0).abs() < 1e-18);
        assert!(matches!(shell_constants(1.0, 1), Err(Error::Precondition(_))));
        assert_eq!(rr_delta(2.0, 2.0, 3.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn single_shell_covers_box() {
        let req = ShellRequest {
            n: 2,
            j_max: 1,
            a1: 1.5,
            resolution: 4,
            box_radius: 1e-3,
            samples: 10_000,
            seed: 3,
        };
        let set = unavoidable_set(&req).unwrap();
        assert!(set.shells[0].certificate.passed);
        assert!(set.sphere_deviation() < 1e-12);
    }

    #[test]
    fn degenerate_box_is_origin() {
        let req = ShellRequest {
            n: 2,
            j_max: 2,
            a1: 1.5,
            resolution: 2,
            box_radius: 0.0,
            samples: 10,
            seed: 0,
        };
        let set = unavoidable_set(&req).unwrap();
        for s in &set.shells {
            assert_eq!(s.lattice.points().collect::<Vec<_>>(), vec![vec![ZERO, ZERO]]);
        }
    }
}
