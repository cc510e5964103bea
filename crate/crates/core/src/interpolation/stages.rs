use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    check_on_diagonal, collect_sites, interpolation_report, point_mover, retryable, sub_seed,
    translation, InterpolationJob, JobConstraints, StageBudget,
};
use crate::config::Config;
use crate::cplx::{self, C64, ZERO};
use crate::error::{Error, Result};
use crate::factor::{factor_sp, shear_of_factor};
use crate::jet::{homogeneous_part, jet_compose_tol, linear_part, JetMap, Series};
use crate::linalg;
use crate::osculation::MagicSpec;
use crate::shear::{word_inverse, word_jet, Shear, Word};
use crate::symplectic::{hamiltonian_decompose, is_symplectic_of_order, SympMatrix};

const COMPOSE_TOL: f64 = 1e-9;

fn jet_scale(f: &JetMap) -> f64 {
    1.0 + f
        .components()
        .iter()
        .map(Series::max_abs)
        .fold(0.0, f64::max)
}

/// Shears realizing `Q` whose functions keep the linear coefficient of each
/// factor and are flat, vanishing and small where the constraints demand.
pub fn linear_stage(
    q: &SympMatrix,
    cons: &JobConstraints,
    eps: f64,
    seed: u64,
    cfg: &Config,
) -> Result<Word> {
    let n = q.half_dim();
    cons.check_dim(2 * n)?;
    let id = linalg::CMat::identity(2 * n, 2 * n);
    if linalg::max_abs(&(q.matrix() - &id)) <= cfg.tol {
        return Ok(Word::empty());
    }
    let mut last = None;
    for attempt in 0..cfg.max_retries.max(1) {
        let fw = factor_sp(q, sub_seed(seed, attempt as u64), cfg)?;
        let count = fw.len().max(1) as f64;
        let built: Result<Vec<_>> = fw
            .factors
            .iter()
            .map(|lf| {
                let base = shear_of_factor(lf, n);
                let beta = base.f.dense()[1];
                let sites = collect_sites(cons, &base.v, 1, ZERO, "linear stage")?;
                let region = cons.region.lambda_image(&base.v);
                let f = MagicSpec {
                    anchor: ZERO,
                    power: 1,
                    r: 1,
                    beta,
                    flats: &sites.flats,
                    zeros: &sites.zeros,
                    region: Some(&region),
                    eps: eps / (count * cplx::norm(&base.v)),
                    best_center: true,
                }
                .build(cfg)?;
                Ok(Shear::new(base.v, f).into())
            })
            .collect();
        match built {
            Ok(factors) => return Ok(Word::new(factors)),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Shears cancelling the degree-`r` part of `residual = id + P^r + …` at the
/// origin, one per term of the Hamiltonian decomposition of `P^r`.
pub fn higher_stage(
    residual: &JetMap,
    r: usize,
    cons: &JobConstraints,
    eps: f64,
    seed: u64,
    cfg: &Config,
) -> Result<Word> {
    let dim = residual.dim();
    cons.check_dim(dim)?;
    if r < 2 || r > residual.order() {
        return Err(Error::OrderExceeded {
            requested: r,
            order: residual.order(),
        });
    }
    if cplx::max_abs(residual.base()) != 0.0 {
        return Err(Error::Precondition("higher stages work at the origin".into()));
    }
    let scale = jet_scale(residual);
    let slack = 1e-7 * scale;
    for d in 0..r {
        let dev = residual.deviation_from_identity(d);
        if dev > slack {
            return Err(Error::Precondition(format!(
                "residual differs from the identity in degree {d} by {dev:.3e}"
            )));
        }
    }
    is_symplectic_of_order(residual, r, slack)?;
    let h = homogeneous_part(residual, r)?;
    if h.iter().all(|p| p.max_abs() <= 1e-15 * scale) {
        return Ok(Word::empty());
    }
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    let mut last = None;
    for attempt in 0..cfg.max_retries.max(1) {
        let dec = match hamiltonian_decompose(&h, r, sub_seed(seed, 1000 + attempt as u64), cfg) {
            Ok(d) => d,
            Err(e) if retryable(&e) => {
                last = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let terms: Vec<_> = dec.terms.iter().filter(|t| t.c != ZERO).collect();
        let count = terms.len().max(1) as f64;
        let built: Result<Vec<_>> = terms
            .iter()
            .map(|t| {
                // (bᵀJz)^r = (−λ_b(z))^r
                let beta = t.c * sign;
                let sites = collect_sites(cons, &t.b, r as u32, ZERO, "higher stage")?;
                let region = cons.region.lambda_image(&t.b);
                let f = MagicSpec {
                    anchor: ZERO,
                    power: r as u32,
                    r: 1,
                    beta,
                    flats: &sites.flats,
                    zeros: &sites.zeros,
                    region: Some(&region),
                    eps: eps / (count * cplx::norm(&t.b)),
                    best_center: true,
                }
                .build(cfg)?;
                Ok(Shear::new(t.b.clone(), f).into())
            })
            .collect();
        let word = match built {
            Ok(factors) => Word::new(factors),
            Err(e) if retryable(&e) => {
                last = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let inv = word_jet(&word_inverse(&word), residual.base(), r)?;
        let after = jet_compose_tol(&residual.truncate(r), &inv, COMPOSE_TOL)?;
        let dev = after.deviation_from_identity(r);
        if dev > slack {
            return Err(Error::Verification(format!(
                "degree {r} part survives the stage with magnitude {dev:.3e}"
            )));
        }
        return Ok(word);
    }
    Err(last.expect("at least one attempt"))
}

/// The interpolation problem with `p = q = 0`.
fn interpolate_at_origin(
    target: &JetMap,
    cons: &JobConstraints,
    eps: f64,
    seed: u64,
    cfg: &Config,
) -> Result<Word> {
    let k = target.order();
    if k == 0 {
        return Ok(Word::empty());
    }
    let budget = StageBudget::new(eps, k, 0);
    let scale = jet_scale(target);
    let q = SympMatrix::new(linear_part(target), 1e-8 * scale * scale)?;
    let mut acc = linear_stage(&q, cons, budget.per_stage_eps, sub_seed(seed, 1), cfg)?;
    let origin = target.base().to_vec();
    let mut residual = jet_compose_tol(target, &word_jet(&word_inverse(&acc), &origin, k)?, COMPOSE_TOL)?;
    let dev = residual.deviation_from_identity(1);
    if dev > 1e-7 * scale {
        return Err(Error::Verification(format!(
            "linear stage leaves a linear residual of {dev:.3e}"
        )));
    }
    for r in 2..=k {
        let stage = higher_stage(&residual, r, cons, budget.per_stage_eps, sub_seed(seed, 100 + r as u64), cfg)?;
        if stage.is_empty() {
            continue;
        }
        residual = jet_compose_tol(&residual, &word_jet(&word_inverse(&stage), &origin, k)?, COMPOSE_TOL)?;
        acc = stage.after(&acc);
    }
    Ok(acc)
}

fn with_zero_image(f: &JetMap) -> JetMap {
    let mut comps: Vec<Series> = f.components().to_vec();
    for c in &mut comps {
        c.coeffs_mut()[0] = ZERO;
    }
    JetMap::from_series(f.base().to_vec(), f.order(), comps)
}

/// A word agreeing with the job's jet at its base, flat at the flat points,
/// fixing the fixpoints and moving the region by at most `eps`.
pub fn finite_jet_interpolate(job: &InterpolationJob, cfg: &Config) -> Result<Word> {
    let jet = &job.jet;
    let dim = jet.dim();
    let cons = job.constraints();
    cons.check_dim(dim)?;
    if !(job.eps > 0.0) {
        return Err(Error::Input(format!("eps must be positive, got {}", job.eps)));
    }
    let flat_pts: Vec<&[C64]> = cons.flats.iter().map(|a| a.point.as_slice()).collect();
    let fix_pts: Vec<&[C64]> = cons.fixpoints.iter().map(Vec::as_slice).collect();
    check_on_diagonal(&flat_pts, "flat point")?;
    check_on_diagonal(&fix_pts, "fixpoint")?;
    let p = jet.base().to_vec();
    let q = jet.image();
    for x in flat_pts.iter().chain(&fix_pts) {
        if cplx::dist(x, &p) < 1e-12 || cplx::dist(x, &q) < 1e-12 {
            return Err(Error::Precondition(format!(
                "constraint point {x:?} coincides with the base or its image"
            )));
        }
    }
    let k = jet.order();
    let scale = jet_scale(jet);
    if k >= 1 {
        is_symplectic_of_order(jet, k, 1e-8 * scale * scale)?;
    }
    let cons = JobConstraints {
        region: cons.region.inflated(job.eps),
        ..cons
    };

    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(job.seed, 0x687562));
    let normal = Normal::new(0.0, 1.0 + cplx::norm(&p)).expect("valid normal");
    let delta = cplx::delta(dim);
    let mut hubs = vec![p.clone()];
    if cplx::norm(&p) > 0.0 {
        hubs.push(vec![ZERO; dim]);
    }
    while hubs.len() < cfg.max_retries.max(2) {
        hubs.push(cplx::scale(&delta, cplx::c(normal.sample(&mut rng), normal.sample(&mut rng))));
    }

    let mut last = None;
    for (i, h) in hubs.iter().enumerate() {
        let attempt = with_hub(job, &cons, h, sub_seed(job.seed, 10 + i as u64), cfg).and_then(|w| {
            let rep = interpolation_report(&w, job)?;
            if rep.jet_residual > 1e-6 * scale || rep.image_residual > 1e-8 * scale {
                return Err(Error::IllConditioned {
                    residual: rep.jet_residual.max(rep.image_residual),
                });
            }
            Ok(w)
        });
        match attempt {
            Ok(w) => return Ok(w),
            Err(e) if retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one hub"))
}

/// Conjugate by the translation to `h`, move the base to `h` and the image
/// away from it, and solve the centred problem in between.
fn with_hub(job: &InterpolationJob, cons: &JobConstraints, h: &[C64], seed: u64, cfg: &Config) -> Result<Word> {
    let jet = &job.jet;
    let dim = jet.dim();
    let k = jet.order();
    let zero = vec![ZERO; dim];
    let (t_minus, t_plus) = if cplx::max_abs(h) == 0.0 {
        (Word::empty(), Word::empty())
    } else {
        (
            Word::new(vec![translation(&cplx::scale(h, cplx::re(-1.0)))]),
            Word::new(vec![translation(h)]),
        )
    };
    let shift = |z: &[C64]| crate::shear::word_apply(&t_minus, z);
    let p = shift(jet.base())?;
    let q = shift(&jet.image())?;
    let local = match t_minus.factors.first() {
        Some(f) => cons.mapped(f)?,
        None => cons.clone(),
    };
    let hub_hit = local
        .flats
        .iter()
        .map(|a| &a.point)
        .chain(&local.fixpoints)
        .any(|x| cplx::norm(x) < 1e-9);
    if hub_hit {
        return Err(Error::Collision {
            stage: "hub".into(),
            detail: "a constraint point sits at the hub".into(),
        });
    }

    let mover_eps = job.eps / 4.0;
    let mut core_eps = job.eps;
    let a = if cplx::max_abs(&p) == 0.0 {
        Word::empty()
    } else {
        core_eps -= mover_eps;
        point_mover(&p, &zero, &local, mover_eps, sub_seed(seed, 1), cfg)?
    };
    let b = if cplx::max_abs(&q) == 0.0 {
        Word::empty()
    } else {
        core_eps -= mover_eps;
        point_mover(&zero, &q, &local, mover_eps, sub_seed(seed, 2), cfg)?
    };
    if k == 0 {
        return Ok(t_plus.after(&b).after(&a).after(&t_minus));
    }

    // centred target B⁻¹ ∘ T₋ ∘ P ∘ T₊ ∘ A⁻¹ at the origin
    let inner = word_jet(&t_plus.after(&word_inverse(&a)), &zero, k)?;
    let mid = jet_compose_tol(jet, &inner, COMPOSE_TOL * jet_scale(jet))?;
    let outer = word_jet(&word_inverse(&b).after(&t_minus), &jet.image(), k)?;
    let centred = with_zero_image(&jet_compose_tol(&outer, &mid, COMPOSE_TOL * jet_scale(&mid))?);

    let g = interpolate_at_origin(&centred, &local, core_eps, sub_seed(seed, 3), cfg)?;
    Ok(t_plus.after(&b).after(&g).after(&a).after(&t_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::{c, re, ONE};
    use crate::interpolation::{FlatPoint, SampledRegion};
    use crate::jet::{MultiIndex, PolyScalar, UniPoly};
    use crate::shear::word_apply;

    fn rows(r: &[&[f64]]) -> linalg::CMat {
        linalg::from_rows(
            &r.iter()
                .map(|row| row.iter().map(|x| re(*x)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn linear_stage_identity_is_empty() {
        let w = linear_stage(&SympMatrix::identity(2), &JobConstraints::default(), 1.0, 0, &Config::default()).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn linear_stage_single_transvection() {
        let q = SympMatrix::new(rows(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-12).unwrap();
        let w = linear_stage(&q, &JobConstraints::default(), 1.0, 0, &Config::default()).unwrap();
        assert_eq!(w.len(), 1);
        let jet = word_jet(&w, &[ZERO, ZERO], 1).unwrap();
        assert!(linalg::max_abs(&(linear_part(&jet) - q.matrix())) < 1e-14);
    }

    #[test]
    fn higher_stage_worked_example() {
        // id + (z1², −2 z1 z2) at r = 2
        let z = [ZERO, ZERO];
        let mut p1 = PolyScalar::var(2, 0);
        p1.add_term(MultiIndex(vec![2, 0]), ONE);
        let mut p2 = PolyScalar::var(2, 1);
        p2.add_term(MultiIndex(vec![1, 1]), re(-2.0));
        let residual = JetMap::from_polys(&z, 2, &[p1, p2]).unwrap();
        let w = higher_stage(&residual, 2, &JobConstraints::default(), 1.0, 3, &Config::default()).unwrap();
        let inv = word_jet(&word_inverse(&w), &z, 2).unwrap();
        let after = jet_compose_tol(&residual, &inv, 1e-12).unwrap();
        assert!(after.deviation_from_identity(2) < 1e-8);
        assert!(w.len() <= 4);
    }

    #[test]
    fn linear_jet_with_fixpoint() {
        let a = rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let jet = JetMap::linear(&a, 1).unwrap();
        let c1 = vec![re(2.0), re(2.0)];
        let job = InterpolationJob {
            jet: jet.clone(),
            flats: vec![],
            fixpoints: vec![c1.clone()],
            region: SampledRegion::default(),
            eps: 1.0,
            seed: 0,
        };
        let w = finite_jet_interpolate(&job, &Config::default()).unwrap();
        let got = word_jet(&w, &[ZERO, ZERO], 1).unwrap();
        assert!(got.max_diff(&jet) < 1e-12);
        assert_eq!(word_apply(&w, &c1).unwrap(), c1);
    }

    #[test]
    fn identity_jet_gives_empty_word() {
        let jet = JetMap::identity(&[ZERO; 4], 3);
        let job = InterpolationJob {
            jet,
            flats: vec![],
            fixpoints: vec![],
            region: SampledRegion::default(),
            eps: 1.0,
            seed: 0,
        };
        assert!(finite_jet_interpolate(&job, &Config::default()).unwrap().is_empty());
    }

    #[test]
    fn oracle_word_jet_is_reproduced() {
        let dim = 4;
        let v1 = vec![re(1.0), c(0.0, 0.5), re(-0.3), re(0.2)];
        let v2 = vec![re(0.1), re(0.7), c(0.4, 0.1), re(-1.0)];
        let src = Word::new(vec![
            Shear::new(v1, UniPoly::from_coeffs(vec![re(0.2), re(0.3), re(-0.1), re(0.05)])).into(),
            Shear::new(v2, UniPoly::from_coeffs(vec![ZERO, re(-0.4), re(0.2), re(0.1)])).into(),
        ]);
        let p = vec![c(0.1, 0.0), re(0.2), re(-0.1), c(0.0, 0.1)];
        let k = 3;
        let jet = word_jet(&src, &p, k).unwrap();
        let delta = cplx::delta(dim);
        let centre = vec![c(3.0, 2.0), c(-2.0, 3.0), c(2.5, -1.0), c(1.0, 3.0)];
        let samples = crate::shear::VerifyRequest::random_samples(dim, 30, 0.1, 9)
            .into_iter()
            .map(|s| cplx::add(&s, &centre))
            .collect();
        let job = InterpolationJob {
            jet: jet.clone(),
            flats: vec![FlatPoint {
                point: cplx::scale(&delta, re(2.0)),
                order: 3,
            }],
            fixpoints: vec![cplx::scale(&delta, re(-1.0)), cplx::scale(&delta, re(3.0))],
            region: SampledRegion::new(samples),
            eps: 0.05,
            seed: 11,
        };
        let cfg = Config::default();
        let w = finite_jet_interpolate(&job, &cfg).unwrap();
        let rep = interpolation_report(&w, &job).unwrap();
        assert!(rep.jet_residual < 1e-6, "{rep:?}");
        assert!(rep.flat_residuals.iter().all(|x| *x < 1e-8), "{rep:?}");
        assert!(rep.fixpoint_residuals.iter().all(|x| *x < 1e-9), "{rep:?}");
        assert!(rep.region_sup <= job.eps, "{rep:?}");
    }
}

