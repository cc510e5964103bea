use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{collect_sites, retryable, sub_seed, JobConstraints};
use crate::config::Config;
use crate::cplx::{self, C64, ONE};
use crate::error::{Error, Result};
use crate::osculation::MagicSpec;
use crate::shear::{word_apply, Shear, Word};

/// A word `F` with `F(p) = q`, flat at the flat points, fixing every
/// fixpoint, and moving the region by less than `eps`.
pub fn point_mover(
    p: &[C64],
    q: &[C64],
    cons: &JobConstraints,
    eps: f64,
    seed: u64,
    cfg: &Config,
) -> Result<Word> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    cons.check_dim(p.len())?;
    if p == q {
        return Err(Error::Input("point mover needs p != q".into()));
    }
    let v = cplx::sub(q, p);
    let delta = cplx::delta(p.len());
    let flat_on_delta = cplx::lambda(&delta, &v).norm() <= 1e-12 * cplx::norm(&v) * cplx::norm(&delta);
    if !flat_on_delta {
        match single_shear(p, q, cons, eps, cfg) {
            Ok(w) => return Ok(w),
            Err(e) if retryable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    two_stage(p, q, cons, eps, seed, cfg)
}

/// One shear along `q − p` with `f(λ(p)) = 1`.
fn single_shear(p: &[C64], q: &[C64], cons: &JobConstraints, eps: f64, cfg: &Config) -> Result<Word> {
    let v = cplx::sub(q, p);
    let anchor = cplx::lambda(p, &v);
    let sites = collect_sites(cons, &v, 1, anchor, "point mover")?;
    let region = cons.region.lambda_image(&v);
    let spec = MagicSpec {
        anchor,
        power: 1,
        r: 0,
        beta: ONE,
        flats: &sites.flats,
        zeros: &sites.zeros,
        region: Some(&region),
        eps: eps / cplx::norm(&v),
        best_center: true,
    };
    let f = spec.build(cfg)?;
    Ok(Word::new(vec![Shear::new(v, f).into()]))
}

/// Route through a seeded intermediate point `r`; both legs run at `eps/2`,
/// the second one on the region enlarged by `eps/2`.
fn two_stage(p: &[C64], q: &[C64], cons: &JobConstraints, eps: f64, seed: u64, cfg: &Config) -> Result<Word> {
    let dim = p.len();
    let delta = cplx::delta(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0x6d6f766572));
    let spread = 1.0 + cplx::norm(p).max(cplx::norm(q));
    let normal = Normal::new(0.0, spread).expect("valid normal");
    let enlarged = JobConstraints {
        region: cons.region.inflated(eps / 2.0),
        ..cons.clone()
    };
    for _ in 0..cfg.max_retries.max(1) {
        let r: Vec<C64> = (0..dim)
            .map(|_| cplx::c(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let v1 = cplx::sub(&r, p);
        let v2 = cplx::sub(q, &r);
        let ok = [&v1, &v2]
            .iter()
            .all(|v| cplx::lambda(&delta, v).norm() > 1e-6 * cplx::norm(v));
        if !ok {
            continue;
        }
        let attempt = single_shear(p, &r, cons, eps / 2.0, cfg).and_then(|first| {
            let mid = word_apply(&first, p)?;
            let second = single_shear(&mid, q, &enlarged, eps / 2.0, cfg)?;
            Ok(second.after(&first))
        });
        match attempt {
            Ok(w) => return Ok(w),
            Err(e) if retryable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoIntermediate {
        attempts: cfg.max_retries.max(1),
    })
}
