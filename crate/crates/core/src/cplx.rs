//! Complex scalar helpers shared by every module.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Integer power by repeated squaring.
///
/// Every root placement and every evaluation goes through this function, so a
/// point that lands exactly on a stored root evaluates to an exact zero.
pub fn cpow(z: C64, e: u32) -> C64 {
    let mut acc = ONE;
    let mut base = z;
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        k >>= 1;
        if k > 0 {
            base = base * base;
        }
    }
    acc
}

/// Half the ambient dimension, checking that the dimension is even.
#[inline]
pub fn half_dim(dim: usize) -> usize {
    debug_assert!(dim % 2 == 0, "ambient dimension must be even");
    dim / 2
}

/// The symplectic pairing `lambda_v(z) = z^T J v` with `J = [[0, I], [-I, 0]]`.
pub fn lambda(z: &[C64], v: &[C64]) -> C64 {
    let n = half_dim(z.len());
    let mut acc = ZERO;
    for i in 0..n {
        acc += z[i] * v[n + i];
        acc -= z[n + i] * v[i];
    }
    acc
}

/// `J v`.
pub fn j_apply(v: &[C64]) -> Vec<C64> {
    let n = half_dim(v.len());
    let mut out = vec![ZERO; v.len()];
    for i in 0..n {
        out[i] = v[n + i];
        out[n + i] = -v[i];
    }
    out
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// The diagonal vector `(1, ..., 1)` of length `dim`.
pub fn delta(dim: usize) -> Vec<C64> {
    vec![ONE; dim]
}

/// Unit basis vector `e_i` (0-based).
pub fn unit(dim: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[i] = ONE;
    v
}

/// If `z` is a multiple of the diagonal vector, return the multiplier.
pub fn diagonal_multiple(z: &[C64], tol: f64) -> Option<C64> {
    let mean = z.iter().sum::<C64>() / z.len() as f64;
    let spread = z.iter().map(|x| (x - mean).norm()).fold(0.0, f64::max);
    if spread <= tol * (1.0 + mean.norm()) {
        Some(mean)
    } else {
        None
    }
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
