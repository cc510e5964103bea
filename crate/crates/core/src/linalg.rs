//! Small dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::cplx::{C64, ONE, ZERO};
use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// The standard symplectic matrix `J = [[0, I_n], [-I_n, 0]]`.
pub fn j_matrix(n: usize) -> CMat {
    let mut j = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = ONE;
        j[(n + i, i)] = -ONE;
    }
    j
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `max |M^T J M - J|`.
pub fn symplectic_residual(m: &CMat) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    max_abs(&(m.transpose() * &j * m - j))
}

/// Spectral condition number from the singular values.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Inverse with a condition guard.
pub fn inverse(m: &CMat, cond_bound: f64) -> Result<CMat> {
    let cond = condition_number(m);
    if !(cond < cond_bound) {
        return Err(Error::Singular { condition: cond });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::Singular { condition: cond })
}

/// Solve a square system via LU.
pub fn solve(m: &CMat, rhs: &CVec) -> Result<CVec> {
    m.clone().lu().solve(rhs).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })
}

/// Minimum-norm least-squares solution via SVD.
pub fn lstsq(m: &CMat, rhs: &CVec, rcond: f64) -> Result<CVec> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(rhs, rcond * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Input(e.to_string()))
}

pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::Input("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(r, cols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn mat_vec(m: &CMat, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).fold(ZERO, |acc, j| acc + m[(i, j)] * v[j]))
        .collect()
}
