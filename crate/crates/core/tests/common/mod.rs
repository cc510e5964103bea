#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symjet::cplx::{self, c, re, C64};
use symjet::factor::{elem_matrix, ElemFactor, Side};
use symjet::interpolation::{FlatPoint, InterpolationJob, SampledRegion};
use symjet::jet::{MultiIndex, PolyScalar, UniPoly};
use symjet::linalg::CMat;
use symjet::shear::{word_jet, Block, Factor, GradShear, Shear, VerifyRequest, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnum(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(r.random_range(-scale..scale), r.random_range(-scale..scale))
}

pub fn cvec(r: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<C64> {
    (0..dim).map(|_| cnum(r, scale)).collect()
}

/// Coefficients damped by `1/k!` so that values stay moderate on the unit ball.
pub fn unipoly(r: &mut ChaCha8Rng, deg: usize, scale: f64) -> UniPoly {
    let mut fact = 1.0;
    let coeffs = (0..=deg)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cnum(r, scale) / fact
        })
        .collect();
    UniPoly::from_coeffs(coeffs)
}

pub fn shear(r: &mut ChaCha8Rng, dim: usize, deg: usize, scale: f64) -> Shear {
    let v = cvec(r, dim, 1.0 / (dim as f64).sqrt());
    Shear::new(v, unipoly(r, deg, scale))
}

/// Random potential in `n` variables with monomials of degree `2..=deg`.
pub fn potential(r: &mut ChaCha8Rng, n: usize, deg: usize, scale: f64) -> PolyScalar {
    let mut p = PolyScalar::zero(n);
    for d in 2..=deg.max(2) {
        for e in MultiIndex::all_of_degree(n, d) {
            if r.random_bool(0.5) {
                p.add_term(e, cnum(r, scale) / (d * d) as f64);
            }
        }
    }
    p
}

pub fn grad_shear(r: &mut ChaCha8Rng, n: usize, deg: usize, scale: f64) -> GradShear {
    let side = if r.random_bool(0.5) { Block::First } else { Block::Second };
    GradShear::new(side, potential(r, n, deg, scale))
}

pub fn shear_word(r: &mut ChaCha8Rng, dim: usize, count: usize, deg: usize, scale: f64) -> Word {
    Word::new((0..count).map(|_| Factor::from(shear(r, dim, deg, scale))).collect())
}

/// Product of `count` elementary symplectic matrices.
pub fn elem_product(r: &mut ChaCha8Rng, n: usize, count: usize) -> CMat {
    let mut m = CMat::identity(2 * n, 2 * n);
    for _ in 0..count {
        let i = r.random_range(1..=n);
        let j = r.random_range(i..=n);
        let f = ElemFactor {
            side: if r.random_bool(0.5) { Side::Upper } else { Side::Lower },
            i,
            j,
            alpha: cnum(r, 1.0),
        };
        m *= elem_matrix(&f, n).unwrap().into_matrix();
    }
    m
}

/// A point of `C^{2n}` kept away from the diagonal.
pub fn off_diagonal(r: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    loop {
        let p = cvec(r, dim, 0.3);
        if cplx::diagonal_multiple(&p, 1e-3).is_none() {
            return p;
        }
    }
}

/// Interpolation job whose target is the order-`k` jet of a random
/// three-shear word at an off-diagonal point, with two flat points of order 3,
/// three fixpoints on the diagonal and a small ball as the region.
pub fn oracle_job(seed: u64, n: usize, k: usize) -> InterpolationJob {
    let dim = 2 * n;
    let mut r = rng(seed);
    let word = shear_word(&mut r, dim, 3, 3, 0.3);
    let p = off_diagonal(&mut r, dim);
    let jet = word_jet(&word, &p, k).unwrap();
    let delta = cplx::delta(dim);
    let on = |t: f64| cplx::scale(&delta, re(t));
    let centre: Vec<C64> = (0..dim).map(|i| c(3.0 + i as f64, -2.0 + 1.5 * i as f64)).collect();
    let samples = VerifyRequest::random_samples(dim, 30, 0.1, seed ^ 0x5eed)
        .into_iter()
        .map(|s| cplx::add(&s, &centre))
        .collect();
    InterpolationJob {
        jet,
        flats: vec![FlatPoint { point: on(2.0), order: 3 }, FlatPoint { point: on(-2.5), order: 3 }],
        fixpoints: vec![on(-1.0), on(3.0), on(4.5)],
        region: SampledRegion::new(samples),
        eps: 0.05,
        seed,
    }
}
