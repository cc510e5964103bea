use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cplx::{cpow, C64, ONE, ZERO};

/// The factor `((ζ^power - root) / norm)^mult`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootFactor {
    pub root: C64,
    pub norm: C64,
    pub power: u32,
    pub mult: u32,
}

impl RootFactor {
    pub fn new(root: C64, norm: C64, mult: u32) -> Self {
        RootFactor {
            root,
            norm,
            power: 1,
            mult,
        }
    }

    /// `(ζ - root) / (anchor - root)`: equals one at `anchor`, bit for bit.
    pub fn anchored(root: C64, anchor: C64, mult: u32) -> Self {
        RootFactor::new(root, anchor - root, mult)
    }

    #[inline]
    fn base_at(&self, z: C64) -> C64 {
        (cpow(z, self.power) - self.root) / self.norm
    }

    pub fn eval(&self, z: C64) -> C64 {
        cpow(self.base_at(z), self.mult)
    }
}

/// Univariate complex polynomial kept in factored form:
///
/// `f(ζ) = D(t) · Π_k F_k(ζ)` with `t = (ζ^power - shift) / scale`, a dense
/// polynomial `D` and root factors `F_k`.
///
/// Roots, flat points and anchor values are therefore exact by construction
/// instead of being smeared by a monomial expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<C64>,
    power: u32,
    shift: C64,
    scale: C64,
    factors: Vec<RootFactor>,
}

impl Default for UniPoly {
    fn default() -> Self {
        UniPoly::zero()
    }
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly::from_coeffs(Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        UniPoly::from_coeffs(vec![c])
    }

    /// `c ζ`.
    pub fn linear(c: C64) -> Self {
        UniPoly::from_coeffs(vec![ZERO, c])
    }

    /// Ascending monomial coefficients in `ζ`.
    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        UniPoly {
            coeffs,
            power: 1,
            shift: ZERO,
            scale: ONE,
            factors: Vec::new(),
        }
    }

    /// Ascending coefficients in the scaled variable `t = (ζ - shift) / scale`.
    pub fn from_scaled(coeffs: Vec<C64>, shift: C64, scale: C64) -> Self {
        UniPoly {
            coeffs,
            power: 1,
            shift,
            scale,
            factors: Vec::new(),
        }
    }

    pub fn with_factor(mut self, f: RootFactor) -> Self {
        if f.mult > 0 {
            self.factors.push(f);
        }
        self
    }

    pub fn factors(&self) -> &[RootFactor] {
        &self.factors
    }

    /// Dense coefficients (in the scaled variable).
    pub fn dense(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// True when the value is stored as plain ascending coefficients in `ζ`.
    pub fn is_plain(&self) -> bool {
        self.power == 1 && self.shift == ZERO && self.scale == ONE && self.factors.is_empty()
    }

    /// Drop trailing dense coefficients below `tol`.
    pub fn normalize(&mut self, tol: f64) {
        while self.coeffs.last().is_some_and(|c| c.norm() < tol) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        let dense = self
            .coeffs
            .iter()
            .rposition(|c| *c != ZERO)
            .unwrap_or(0);
        dense * self.power as usize
            + self
                .factors
                .iter()
                .map(|f| (f.power * f.mult) as usize)
                .sum::<usize>()
    }

    pub fn eval(&self, z: C64) -> C64 {
        if self.coeffs.is_empty() {
            return ZERO;
        }
        let t = (cpow(z, self.power) - self.shift) / self.scale;
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        for f in &self.factors {
            if acc == ZERO {
                break;
            }
            acc *= f.eval(z);
        }
        acc
    }

    /// First derivative at `z`.
    pub fn derivative_at(&self, z: C64) -> C64 {
        self.taylor_at(z, 1)[1]
    }

    /// Taylor coefficients `a_0..=a_m` of `f(z0 + h)` in `h`.
    pub fn taylor_at(&self, z0: C64, m: usize) -> Vec<C64> {
        if self.coeffs.is_empty() {
            return vec![ZERO; m + 1];
        }
        let mut t = power_series(z0, self.power, m);
        t[0] -= self.shift;
        for c in &mut t {
            *c /= self.scale;
        }
        let mut acc = vec![ZERO; m + 1];
        for c in self.coeffs.iter().rev() {
            acc = series_mul(&acc, &t);
            acc[0] += c;
        }
        for f in &self.factors {
            let mut b = power_series(z0, f.power, m);
            b[0] = f.base_at(z0);
            for c in b.iter_mut().skip(1) {
                *c /= f.norm;
            }
            acc = series_mul(&acc, &series_pow(&b, f.mult));
        }
        acc
    }

    pub fn neg(&self) -> Self {
        self.scaled(-ONE)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    /// `ζ ↦ f(ζ^r)`.
    pub fn compose_power(&self, r: u32) -> Self {
        let mut out = self.clone();
        out.power *= r;
        for f in &mut out.factors {
            f.power *= r;
        }
        out
    }

    /// Product. Exact when either dense part is constant or both share the
    /// same scaled variable; otherwise dense parts are expanded first.
    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        let same_chart =
            self.power == other.power && self.shift == other.shift && self.scale == other.scale;
        let mut out = if other.coeffs.len() <= 1 {
            self.scaled(other.coeffs.first().copied().unwrap_or(ZERO))
        } else if self.coeffs.len() <= 1 {
            other.scaled(self.coeffs.first().copied().unwrap_or(ZERO))
        } else if same_chart {
            let mut c = self.clone();
            c.coeffs = poly_mul(&self.coeffs, &other.coeffs);
            c
        } else {
            let mut c = UniPoly::from_coeffs(poly_mul(
                &self.dense_expanded(),
                &other.dense_expanded(),
            ));
            c.factors = self.factors.clone();
            c
        };
        let extra: Vec<RootFactor> = if other.coeffs.len() <= 1 {
            other.factors.clone()
        } else if self.coeffs.len() <= 1 {
            self.factors.clone()
        } else {
            other.factors.clone()
        };
        out.factors.extend(extra);
        out
    }

    fn dense_expanded(&self) -> Vec<C64> {
        // t = (ζ^p - shift)/scale as a plain polynomial in ζ
        let p = self.power as usize;
        let mut t = vec![ZERO; p + 1];
        t[0] = -self.shift / self.scale;
        t[p] += ONE / self.scale;
        let mut acc: Vec<C64> = Vec::new();
        for c in self.coeffs.iter().rev() {
            acc = poly_mul(&acc, &t);
            if acc.is_empty() {
                acc.push(ZERO);
            }
            acc[0] += c;
        }
        acc
    }

    /// Plain ascending coefficients in `ζ`. Can lose accuracy for high
    /// degrees; evaluation should go through [`UniPoly::eval`].
    pub fn expanded(&self) -> Vec<C64> {
        let mut acc = self.dense_expanded();
        for f in &self.factors {
            let p = f.power as usize;
            let mut b = vec![ZERO; p + 1];
            b[0] = -f.root / f.norm;
            b[p] += ONE / f.norm;
            for _ in 0..f.mult {
                acc = poly_mul(&acc, &b);
            }
        }
        acc
    }
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Truncated Taylor series of `(z0 + h)^e` in `h`.
fn power_series(z0: C64, e: u32, m: usize) -> Vec<C64> {
    let mut out = vec![ZERO; m + 1];
    let mut binom = 1.0f64;
    for (k, slot) in out.iter_mut().enumerate() {
        if k as u32 > e {
            break;
        }
        *slot = cpow(z0, e - k as u32) * binom;
        binom *= (e - k as u32) as f64 / (k + 1) as f64;
    }
    out
}

fn series_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let m = a.len();
    let mut out = vec![ZERO; m];
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(m - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_pow(b: &[C64], k: u32) -> Vec<C64> {
    let mut acc = vec![ZERO; b.len()];
    acc[0] = ONE;
    let mut base = b.to_vec();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = series_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = series_mul(&base, &base);
        }
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct FactoredRepr {
    coeffs: Vec<C64>,
    #[serde(default = "one_u32")]
    power: u32,
    #[serde(default)]
    shift: C64,
    #[serde(default = "one_c")]
    scale: C64,
    #[serde(default)]
    factors: Vec<RootFactor>,
}

fn one_u32() -> u32 {
    1
}

fn one_c() -> C64 {
    ONE
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UniRepr {
    Plain(Vec<C64>),
    Factored(FactoredRepr),
}

impl Serialize for UniPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_plain() {
            self.coeffs.serialize(s)
        } else {
            FactoredRepr {
                coeffs: self.coeffs.clone(),
                power: self.power,
                shift: self.shift,
                scale: self.scale,
                factors: self.factors.clone(),
            }
            .serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for UniPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match UniRepr::deserialize(d)? {
            UniRepr::Plain(c) => UniPoly::from_coeffs(c),
            UniRepr::Factored(r) => {
                if r.power == 0 || r.factors.iter().any(|f| f.power == 0) {
                    return Err(serde::de::Error::custom("power must be positive"));
                }
                UniPoly {
                    coeffs: r.coeffs,
                    power: r.power,
                    shift: r.shift,
                    scale: r.scale,
                    factors: r.factors,
                }
            }
        })
    }
}
