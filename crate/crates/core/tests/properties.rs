mod common;

use proptest::prelude::*;
use rand::Rng;

use symjet::cplx::{self, re, C64};
use symjet::factor::factor_sp;
use symjet::jet::{jet_compose, jet_invert, linear_part, JetMap};
use symjet::linalg;
use symjet::osculation::{hermite_osculate_tol, OsculationConstraint};
use symjet::shear::{word_apply, word_inverse, word_jacobian, word_jet, Factor, Word};
use symjet::symplectic::{pullback_defect, SympMatrix};
use symjet::tame::{gradient_at, gradient_interpolant, lagrangian_tame_word, set_split, DiscreteSet};
use symjet::Config;

use common::*;

fn mixed_word(seed: u64, n: usize, count: usize) -> Word {
    let mut r = rng(seed);
    let factors = (0..count)
        .map(|i| -> Factor {
            if i % 2 == 0 {
                shear(&mut r, 2 * n, 3, 0.5).into()
            } else {
                grad_shear(&mut r, n, 3, 0.5).into()
            }
        })
        .collect();
    Word::new(factors)
}

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn inverse_word_undoes_word(seed in any::<u64>(), n in 1usize..=3, count in 1usize..=4) {
        let w = mixed_word(seed, n, count);
        let z = cvec(&mut rng(seed ^ 1), 2 * n, 0.5);
        let back = word_apply(&word_inverse(&w), &word_apply(&w, &z).unwrap()).unwrap();
        prop_assert!(cplx::dist(&back, &z) < 1e-9 * (1.0 + cplx::norm(&z)));
    }

    #[test]
    fn jacobians_are_symplectic(seed in any::<u64>(), n in 1usize..=3, count in 1usize..=4) {
        let w = mixed_word(seed, n, count);
        let z = cvec(&mut rng(seed ^ 2), 2 * n, 0.5);
        let g = word_jacobian(&w, &z).unwrap();
        prop_assert!(linalg::symplectic_residual(&g) < 1e-8 * (1.0 + linalg::max_abs(&g)).powi(2));
    }

    #[test]
    fn pullback_defect_vanishes(seed in any::<u64>(), n in 1usize..=2) {
        let w = mixed_word(seed, n, 2);
        let z = cvec(&mut rng(seed ^ 3), 2 * n, 0.5);
        let d = pullback_defect(&word_jet(&w, &z, 4).unwrap()).max_abs();
        prop_assert!(d < 1e-9, "defect {d:e}");
    }

    #[test]
    fn chain_rule(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=4) {
        let inner = mixed_word(seed, n, 2);
        let outer = mixed_word(seed ^ 0xabc, n, 2);
        let p = cvec(&mut rng(seed ^ 4), 2 * n, 0.4);
        let q = word_apply(&inner, &p).unwrap();
        let direct = word_jet(&outer.after(&inner), &p, m).unwrap();
        let composed = jet_compose(&word_jet(&outer, &q, m).unwrap(), &word_jet(&inner, &p, m).unwrap()).unwrap();
        prop_assert!(direct.max_diff(&composed) < 1e-8 * (1.0 + direct.components().iter().map(|s| s.max_abs()).fold(0.0, f64::max)));
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=3) {
        let ws: Vec<Word> = (0..3).map(|i| mixed_word(seed.wrapping_add(i), n, 1)).collect();
        let p0 = cvec(&mut rng(seed ^ 5), 2 * n, 0.3);
        let p1 = word_apply(&ws[0], &p0).unwrap();
        let p2 = word_apply(&ws[1], &p1).unwrap();
        let a = word_jet(&ws[0], &p0, m).unwrap();
        let b = word_jet(&ws[1], &p1, m).unwrap();
        let c = word_jet(&ws[2], &p2, m).unwrap();
        let left = jet_compose(&jet_compose(&c, &b).unwrap(), &a).unwrap();
        let right = jet_compose(&c, &jet_compose(&b, &a).unwrap()).unwrap();
        prop_assert!(left.max_diff(&right) < 1e-9 * (1.0 + left.components().iter().map(|s| s.max_abs()).fold(0.0, f64::max)));
    }

    #[test]
    fn jet_inverse_composes_to_identity(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=4) {
        let w = mixed_word(seed, n, 2);
        let p = cvec(&mut rng(seed ^ 6), 2 * n, 0.3);
        let f = word_jet(&w, &p, m).unwrap();
        let inv = jet_invert(&f).unwrap();
        let id = JetMap::identity(&p, m);
        prop_assert!(jet_compose(&inv, &f).unwrap().max_diff(&id) < 1e-8);
        let from_word = word_jet(&word_inverse(&w), &f.image(), m).unwrap();
        prop_assert!(inv.max_diff(&from_word) < 1e-8);
    }

    #[test]
    fn factorization_reconstructs(seed in any::<u64>(), n in 1usize..=3, count in 1usize..=6) {
        let mut r = rng(seed);
        let m = elem_product(&mut r, n, count);
        let s = SympMatrix::new(m.clone(), 1e-9 * (1.0 + linalg::max_abs(&m)).powi(2)).unwrap();
        let fw = factor_sp(&s, seed, &Config::default()).unwrap();
        let back = fw.product(n).unwrap();
        prop_assert!(linalg::max_abs(&(back - &m)) < 1e-8 * (1.0 + linalg::max_abs(&m)));
        prop_assert!(fw.len() <= 4 * n * n + 8 * n);
    }

    #[test]
    fn osculation_matches_every_expansion(seed in any::<u64>(), sites in 1usize..=4, order in 0usize..=3) {
        let mut r = rng(seed);
        let cons: Vec<OsculationConstraint> = (0..sites)
            .map(|i| OsculationConstraint::new(
                cplx::c(i as f64 * 1.3 - 2.0, r.random_range(-0.5..0.5)),
                (0..=order).map(|_| cnum(&mut r, 1.0)).collect(),
            ))
            .collect();
        let f = hermite_osculate_tol(&cons, 1e-7).unwrap();
        prop_assert!(f.degree() < sites * (order + 1));
        for c in &cons {
            let got = f.taylor_at(c.point, order);
            for (a, b) in got.iter().zip(&c.jet) {
                prop_assert!((a - b).norm() < 1e-6 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn gradient_interpolant_hits_targets(seed in any::<u64>(), n in 1usize..=3, count in 1usize..=5) {
        let mut r = rng(seed);
        let points: Vec<Vec<C64>> = (0..count).map(|_| cvec(&mut r, n, 2.0)).collect();
        let targets: Vec<Vec<C64>> = (0..count).map(|_| cvec(&mut r, n, 1.0)).collect();
        let f = gradient_interpolant(&points, &targets, &Config::default()).unwrap();
        for (p, t) in points.iter().zip(&targets) {
            prop_assert!(cplx::dist(&gradient_at(&f, p).unwrap(), t) < 1e-7);
        }
    }

    #[test]
    fn tame_word_lines_points_up(seed in any::<u64>(), n in 1usize..=2, count in 1usize..=5) {
        let mut r = rng(seed);
        let points: Vec<Vec<C64>> = (0..count).map(|_| cvec(&mut r, 2 * n, 2.0)).collect();
        let set = DiscreteSet::new(points.clone()).unwrap();
        let w = lagrangian_tame_word(&set, &Config::default()).unwrap();
        for (k, p) in points.iter().enumerate() {
            let mut want = vec![cplx::ZERO; 2 * n];
            want[0] = re((k + 1) as f64);
            prop_assert!(cplx::dist(&word_apply(&w, p).unwrap(), &want) < 1e-6);
        }
    }

    #[test]
    fn split_partitions_the_set(seed in any::<u64>(), n in 1usize..=3, count in 0usize..=8) {
        let mut r = rng(seed);
        let points: Vec<Vec<C64>> = (0..count).map(|_| cvec(&mut r, 2 * n, 3.0)).collect();
        let set = DiscreteSet::new(points.clone()).unwrap();
        let (a, b) = set_split(&set);
        prop_assert_eq!(a.len() + b.len(), count);
        for p in &a.points {
            prop_assert!(cplx::norm(&p[..n]) >= cplx::norm(&p[n..]));
        }
        for p in &b.points {
            prop_assert!(cplx::norm(&p[..n]) < cplx::norm(&p[n..]));
        }
        for p in &points {
            prop_assert!(a.points.contains(p) ^ b.points.contains(p));
        }
    }

    #[test]
    fn linear_part_of_shear_is_transvection(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let s = shear(&mut r, 2 * n, 3, 1.0);
        let z = cvec(&mut r, 2 * n, 0.5);
        let jet = word_jet(&Word::new(vec![s.clone().into()]), &z, 1).unwrap();
        let fp = s.f.derivative_at(cplx::lambda(&z, &s.v));
        let jv = cplx::j_apply(&s.v);
        let lin = linear_part(&jet);
        for i in 0..2 * n {
            for k in 0..2 * n {
                let id = if i == k { 1.0 } else { 0.0 };
                // d/dz_k of f(zᵀJv) v_i = f' (Jv)_k v_i
                let want = re(id) + fp * jv[k] * s.v[i];
                prop_assert!((lin[(i, k)] - want).norm() < 1e-10 * (1.0 + want.norm()));
            }
        }
    }
}
