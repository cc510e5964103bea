//! The symplectic form, pullback defects of jets, and Hamiltonian
//! decompositions of homogeneous symplectic vector fields.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Config;
use crate::cplx::{self, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::jet::{binomial, JetMap, MultiIndex, PolyScalar, Series};
use crate::linalg::{self, CMat, CVec};

/// A matrix `M` with `MᵀJM = J` up to the tolerance it was checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix(CMat);

impl SympMatrix {
    pub fn new(m: CMat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows() + m.nrows() % 2,
                found: m.ncols(),
            });
        }
        let res = linalg::symplectic_residual(&m);
        let scale = 1.0 + linalg::max_abs(&m).powi(2);
        if res > tol * scale {
            return Err(Error::NotSymplectic(res));
        }
        Ok(SympMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        SympMatrix(CMat::identity(2 * n, 2 * n))
    }

    pub fn half_dim(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }
}

impl Serialize for SympMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        linalg::to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SympMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        let m = linalg::from_rows(&rows).map_err(serde::de::Error::custom)?;
        SympMatrix::new(m, 1e-9).map_err(serde::de::Error::custom)
    }
}

/// Coefficients `g_ij` (`i < j`, 0-based internally) of a polynomial 2-form.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormPoly {
    dim: usize,
    coeffs: BTreeMap<(usize, usize), PolyScalar>,
}

impl TwoFormPoly {
    pub fn zero(dim: usize) -> Self {
        TwoFormPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `dz_i ∧ dz_j` (0-based, `i < j`).
    pub fn get(&self, i: usize, j: usize) -> PolyScalar {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| PolyScalar::zero(self.dim))
    }

    pub fn insert(&mut self, i: usize, j: usize, g: PolyScalar) -> Result<()> {
        if i >= j || j >= self.dim {
            return Err(Error::IndexOutOfRange(format!(
                "form index ({i}, {j}) in dimension {}",
                self.dim
            )));
        }
        if g.is_empty() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), g);
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &PolyScalar)> {
        self.coeffs.iter()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(PolyScalar::max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.values().all(|g| g.is_zero(tol))
    }
}

#[derive(Serialize, Deserialize)]
struct FormEntry {
    i: usize,
    j: usize,
    g: PolyScalar,
}

impl Serialize for TwoFormPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<FormEntry> = self
            .coeffs
            .iter()
            .map(|(&(i, j), g)| FormEntry {
                i: i + 1,
                j: j + 1,
                g: g.clone(),
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoFormPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<FormEntry>::deserialize(d)?;
        let dim = v.iter().map(|e| e.g.dim()).max().unwrap_or(0);
        let mut form = TwoFormPoly::zero(dim);
        for e in v {
            if e.i == 0 {
                return Err(serde::de::Error::custom("form indices are 1-based"));
            }
            let g = e.g.with_dim(dim).map_err(serde::de::Error::custom)?;
            form.insert(e.i - 1, e.j - 1, g)
                .map_err(serde::de::Error::custom)?;
        }
        Ok(form)
    }
}

/// Coefficients of `F*ω − ω` at `F`'s base, truncated at degree `order − 1`.
pub fn pullback_defect(f: &JetMap) -> TwoFormPoly {
    let dim = f.dim();
    let n = cplx::half_dim(dim);
    let mut form = TwoFormPoly::zero(dim);
    if f.order() == 0 {
        return form;
    }
    let grads: Vec<Vec<Series>> = f
        .components()
        .iter()
        .map(|s| (0..dim).map(|a| s.derivative(a)).collect())
        .collect();
    let keep = f.order() - 1;
    for a in 0..dim {
        for b in a + 1..dim {
            let mut g = Series::zero(grads[0][0].table());
            for i in 0..n {
                g.add_assign(&grads[i][a].mul(&grads[n + i][b]));
                g.sub_assign(&grads[i][b].mul(&grads[n + i][a]));
            }
            if b == a + n {
                g.coeffs_mut()[0] -= ONE;
            }
            let p = g.truncated(keep).to_poly();
            form.insert(a, b, p).expect("indices in range");
        }
    }
    form
}

/// Lowest-degree defect coefficient with magnitude at least `tol`:
/// `(i, j, degree, magnitude)`.
fn lowest_defect(form: &TwoFormPoly, tol: f64) -> Option<(usize, usize, usize, f64)> {
    let mut best: Option<(usize, usize, usize, f64)> = None;
    for (&(i, j), g) in form.entries() {
        for (e, c) in g.terms() {
            if c.norm() < tol {
                continue;
            }
            let d = e.degree();
            let better = match best {
                None => true,
                Some((_, _, bd, bm)) => d < bd || (d == bd && c.norm() > bm),
            };
            if better {
                best = Some((i, j, d, c.norm()));
            }
        }
    }
    best
}

/// The largest `k <= order − 1` such that every defect coefficient of degree
/// below `k` vanishes.
pub fn symplectic_order(f: &JetMap) -> usize {
    symplectic_order_tol(f, Config::default().tol)
}

pub fn symplectic_order_tol(f: &JetMap, tol: f64) -> usize {
    let cap = f.order().saturating_sub(1);
    match lowest_defect(&pullback_defect(f), tol) {
        Some((_, _, d, _)) => d.min(cap),
        None => cap,
    }
}

/// Checks that every defect coefficient of degree `< k` vanishes; valid for
/// `k <= order`. The error names the lowest offending coefficient (1-based).
pub fn is_symplectic_of_order(f: &JetMap, k: usize, tol: f64) -> Result<()> {
    if k > f.order() {
        return Err(Error::OrderExceeded {
            requested: k,
            order: f.order(),
        });
    }
    if let Some((i, j, degree, magnitude)) = lowest_defect(&pullback_defect(f), tol) {
        if degree < k {
            return Err(Error::NotSymplecticOfOrder {
                required: k,
                i: i + 1,
                j: j + 1,
                degree,
                magnitude,
            });
        }
    }
    Ok(())
}

fn check_map_dim(p: &[PolyScalar]) -> Result<usize> {
    let dim = p.len();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Input(format!(
            "vector field needs an even number of components, got {dim}"
        )));
    }
    for q in p {
        if q.dim() != dim && !q.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
    }
    Ok(dim)
}

fn field_degree(p: &[PolyScalar]) -> Result<Option<usize>> {
    let mut deg = None;
    for q in p {
        for (e, _) in q.terms() {
            match deg {
                None => deg = Some(e.degree()),
                Some(d) if d != e.degree() => return Err(Error::NotHomogeneous(d)),
                _ => {}
            }
        }
    }
    Ok(deg)
}

/// `J·DH`.
pub fn hamiltonian_field(h: &PolyScalar) -> Vec<PolyScalar> {
    let dim = h.dim();
    let n = cplx::half_dim(dim);
    let grad = h.gradient();
    (0..dim)
        .map(|i| if i < n { grad[n + i].clone() } else { -&grad[i - n] })
        .collect()
}

/// The (r+1)-homogeneous `H` with `H(0) = 0` and `J·DH = P` for an
/// r-homogeneous symplectic field `P`.
pub fn hamiltonian_potential(p: &[PolyScalar], tol: f64) -> Result<PolyScalar> {
    let dim = check_map_dim(p)?;
    let n = dim / 2;
    let p: Vec<PolyScalar> = p
        .iter()
        .map(|q| q.clone().with_dim(dim))
        .collect::<Result<_>>()?;
    let r = match field_degree(&p)? {
        None => return Ok(PolyScalar::zero(dim)),
        Some(r) => r,
    };
    let scale = 1.0 + p.iter().map(PolyScalar::max_abs).fold(0.0, f64::max);

    // α = ι_P ω has α_i = −P_{n+i}, α_{n+i} = P_i
    let alpha: Vec<PolyScalar> = (0..dim)
        .map(|a| if a < n { -&p[n + a] } else { p[a - n].clone() })
        .collect();
    for a in 0..dim {
        for b in a + 1..dim {
            let res = &alpha[b].derivative(a) - &alpha[a].derivative(b);
            let m = res.max_abs();
            if m > tol * scale {
                return Err(Error::NotClosed {
                    i: a + 1,
                    j: b + 1,
                    residual: m,
                });
            }
        }
    }

    // H = −(1/(r+1)) zᵀJP(z)
    let mut zjp = PolyScalar::zero(dim);
    for i in 0..n {
        zjp = &zjp + &(&PolyScalar::var(dim, i) * &p[n + i]);
        zjp = &zjp - &(&PolyScalar::var(dim, n + i) * &p[i]);
    }
    let h = zjp.scale(cplx::re(-1.0 / (r + 1) as f64));

    let back = hamiltonian_field(&h);
    let err = back
        .iter()
        .zip(&p)
        .map(|(x, y)| x.max_diff(y))
        .fold(0.0, f64::max);
    if err > tol * scale {
        return Err(Error::Verification(format!(
            "J·DH differs from the field by {err:.3e}"
        )));
    }
    Ok(h)
}

/// Coefficients of `(ℓ·z)^d` for `ℓ = Jᵀb`, scaled by `1/sqrt(multinomial)`.
fn scaled_power_row(b: &[C64], monos: &[MultiIndex]) -> Vec<C64> {
    let l = j_transpose(b);
    monos
        .iter()
        .map(|e| {
            let mut v = cplx::re(e.multinomial().sqrt());
            for (lk, &k) in l.iter().zip(&e.0) {
                v *= cplx::cpow(*lk, k);
            }
            v
        })
        .collect()
}

/// `Jᵀ b`, i.e. the coefficient vector of the linear form `bᵀJz`.
fn j_transpose(b: &[C64]) -> Vec<C64> {
    cplx::j_apply(b).into_iter().map(|x| -x).collect()
}

type BasisKey = (usize, usize, u64, u64, usize);

fn basis_cache() -> &'static Mutex<HashMap<BasisKey, Arc<Vec<Vec<C64>>>>> {
    static CACHE: OnceLock<Mutex<HashMap<BasisKey, Arc<Vec<Vec<C64>>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `binom(2n−1+d, d)` vectors `b_j` whose powers `(b_jᵀJz)^d` form a
/// well-conditioned basis of the d-homogeneous polynomials in `2n` variables.
pub fn linear_form_power_basis(n: usize, d: usize, seed: u64, cfg: &Config) -> Result<Vec<Vec<C64>>> {
    if d == 0 || n == 0 {
        return Err(Error::Input("basis needs n >= 1 and d >= 1".into()));
    }
    let key = (n, d, seed, cfg.cond_bound.to_bits(), cfg.max_retries);
    if let Some(hit) = basis_cache().lock().expect("basis cache").get(&key) {
        return Ok(hit.as_ref().clone());
    }
    let dim = 2 * n;
    let count = binomial(dim - 1 + d, d) as usize;
    let monos = MultiIndex::all_of_degree(dim, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 40) ^ ((d as u64) << 20));
    let jitter = Normal::new(0.0, 0.35).expect("valid normal");
    let mut best = f64::INFINITY;
    for _round in 0..cfg.max_retries.max(1) {
        let basis: Vec<Vec<C64>> = (0..count)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let g = rng.random_range(-2i32..=2) as f64;
                        cplx::c(g + jitter.sample(&mut rng), jitter.sample(&mut rng))
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<Vec<C64>> = basis.iter().map(|b| scaled_power_row(b, &monos)).collect();
        let m = linalg::from_rows(&rows)?;
        let cond = linalg::condition_number(&m);
        if cond < cfg.cond_bound {
            basis_cache()
                .lock()
                .expect("basis cache")
                .insert(key, Arc::new(basis.clone()));
            return Ok(basis);
        }
        best = best.min(cond);
    }
    Err(Error::BasisFailure {
        rounds: cfg.max_retries.max(1),
        condition: best,
    })
}

/// `P^k(z) = Σ c_j (b_jᵀJz)^k b_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDecomposition {
    pub k: usize,
    pub terms: Vec<DecompTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompTerm {
    pub b: Vec<C64>,
    pub c: C64,
}

impl HamiltonianDecomposition {
    pub fn directions(&self) -> impl Iterator<Item = &[C64]> {
        self.terms.iter().map(|t| t.b.as_slice())
    }

    /// Resum the decomposition into a polynomial map.
    pub fn resum(&self, dim: usize) -> Vec<PolyScalar> {
        let mut out = vec![PolyScalar::zero(dim); dim];
        for t in &self.terms {
            if t.c == ZERO {
                continue;
            }
            let l = j_transpose(&t.b);
            let mut form = PolyScalar::zero(dim);
            for (k, lk) in l.iter().enumerate() {
                form.add_term(MultiIndex::unit(dim, k), *lk);
            }
            let pw = form.pow(self.k as u32).scale(t.c);
            for (o, bi) in out.iter_mut().zip(&t.b) {
                *o = &*o + &pw.scale(*bi);
            }
        }
        out
    }
}

/// Decompose a k-homogeneous symplectic field into powers of linear forms.
pub fn hamiltonian_decompose(
    p: &[PolyScalar],
    k: usize,
    seed: u64,
    cfg: &Config,
) -> Result<HamiltonianDecomposition> {
    let dim = check_map_dim(p)?;
    let n = dim / 2;
    let p: Vec<PolyScalar> = p
        .iter()
        .map(|q| q.clone().with_dim(dim))
        .collect::<Result<_>>()?;
    if let Some(r) = field_degree(&p)? {
        if r != k {
            return Err(Error::NotHomogeneous(k));
        }
    }
    let h = hamiltonian_potential(&p, cfg.tol)?;
    let basis = linear_form_power_basis(n, k + 1, seed, cfg)?;
    let monos = MultiIndex::all_of_degree(dim, k + 1);
    let mut c = vec![ZERO; basis.len()];
    if !h.is_empty() {
        let rows: Vec<Vec<C64>> = basis.iter().map(|b| scaled_power_row(b, &monos)).collect();
        let a = linalg::from_rows(&rows)?.transpose();
        let rhs = CVec::from_iterator(
            monos.len(),
            monos
                .iter()
                .map(|e| h.coeff(e) / e.multinomial().sqrt()),
        );
        let sol = linalg::solve(&a, &rhs)?;
        for (cj, s) in c.iter_mut().zip(sol.iter()) {
            *cj = s * (k + 1) as f64;
        }
    }
    let dec = HamiltonianDecomposition {
        k,
        terms: basis
            .into_iter()
            .zip(c)
            .map(|(b, c)| DecompTerm { b, c })
            .collect(),
    };
    let back = dec.resum(dim);
    let scale = 1.0 + p.iter().map(PolyScalar::max_abs).fold(0.0, f64::max);
    let err = back
        .iter()
        .zip(&p)
        .map(|(x, y)| x.max_diff(y))
        .fold(0.0, f64::max);
    if err > 1e3 * cfg.tol * scale {
        return Err(Error::Verification(format!(
            "decomposition resums with residual {err:.3e}"
        )));
    }
    Ok(dec)
}

/// Dimension of the k-homogeneous Hamiltonian fields on `C^{2n}`.
pub fn hamiltonian_count(n: usize, k: usize) -> usize {
    binomial(2 * n + k, 2 * n - 1) as usize
}
