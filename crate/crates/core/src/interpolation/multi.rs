use serde::{Deserialize, Serialize};

use super::{finite_jet_interpolate, sub_seed, FlatPoint, InterpolationJob, SampledRegion};
use crate::config::Config;
use crate::cplx::{self, re};
use crate::error::{Error, Result};
use crate::jet::{jet_compose_tol, JetMap};
use crate::shear::{word_apply, word_inverse, word_jet, Word};

/// A jet at `alpha·Δ` fixing that point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointJob {
    pub alpha: u64,
    pub jet: JetMap,
}

fn default_horizon() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPointJob {
    pub jobs: Vec<PointJob>,
    /// Lattice points `iΔ` with `i <= horizon` are tracked.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub region: SampledRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub alpha: u64,
    /// Jet mismatch at `alpha_j Δ` for every handled job.
    pub jet_residuals: Vec<f64>,
    /// `(i, |F(iΔ) − iΔ|)` for `alpha < i <= horizon`.
    pub lattice_residuals: Vec<(u64, f64)>,
    pub word_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPointResult {
    pub word: Word,
    pub stages: Vec<StageRecord>,
}

/// Run the first `stages` jobs: each new factor reproduces its jet through
/// the inverse of what was built so far, is flat at the other job points
/// and fixes every remaining lattice point up to the horizon.
pub fn multi_point_stage(job: &MultiPointJob, stages: usize, cfg: &Config) -> Result<MultiPointResult> {
    if stages > job.jobs.len() {
        return Err(Error::Input(format!(
            "{stages} stages requested but only {} jobs given",
            job.jobs.len()
        )));
    }
    let Some(first) = job.jobs.first() else {
        return Ok(MultiPointResult {
            word: Word::empty(),
            stages: Vec::new(),
        });
    };
    let dim = first.jet.dim();
    let delta = cplx::delta(dim);
    let at = |a: u64| cplx::scale(&delta, re(a as f64));
    let mut prev = 0u64;
    for pj in &job.jobs {
        if pj.jet.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pj.jet.dim(),
            });
        }
        if pj.alpha <= prev {
            return Err(Error::Precondition(
                "lattice indices must be positive and strictly increasing".into(),
            ));
        }
        prev = pj.alpha;
        let p = at(pj.alpha);
        if cplx::dist(pj.jet.base(), &p) > 1e-12 * (1.0 + cplx::norm(&p)) {
            return Err(Error::Precondition(format!(
                "jet for index {} is not based at that lattice point",
                pj.alpha
            )));
        }
        if cplx::dist(&pj.jet.image(), &p) > 1e-9 * (1.0 + cplx::norm(&p)) {
            return Err(Error::Precondition(format!(
                "jet for index {} does not fix its base point",
                pj.alpha
            )));
        }
    }

    let mut word = Word::empty();
    let mut records = Vec::with_capacity(stages);
    for k in 0..stages {
        let pj = &job.jobs[k];
        let p = at(pj.alpha);
        let m = pj.jet.order();
        let target = if word.is_empty() {
            pj.jet.clone()
        } else {
            let inv = word_jet(&word_inverse(&word), &p, m)?;
            jet_compose_tol(&pj.jet, &inv, 1e-9)?
        };
        // later job points are kept flat too, so their targets stay well conditioned
        let others = || job.jobs.iter().enumerate().filter(move |(i, _)| *i != k).map(|(_, j)| j);
        let flat_order = others().map(|j| j.jet.order() as u32 + 1).max().unwrap_or(0);
        let sub = InterpolationJob {
            jet: target,
            flats: others()
                .map(|j| FlatPoint {
                    point: at(j.alpha),
                    order: flat_order,
                })
                .collect(),
            fixpoints: (pj.alpha + 1..=job.horizon)
                .filter(|i| !job.jobs.iter().any(|j| j.alpha == *i))
                .map(at)
                .collect(),
            region: job.region.clone(),
            eps: job.eps / f64::powi(2.0, k as i32 + 1),
            seed: sub_seed(job.seed, k as u64),
        };
        let psi = finite_jet_interpolate(&sub, cfg)?;
        word = psi.after(&word);

        let mut jet_residuals = Vec::with_capacity(k + 1);
        for j in &job.jobs[..=k] {
            let got = word_jet(&word, &at(j.alpha), j.jet.order())?;
            jet_residuals.push(got.max_diff(&j.jet));
        }
        let mut lattice_residuals = Vec::new();
        for i in pj.alpha + 1..=job.horizon {
            let x = at(i);
            lattice_residuals.push((i, cplx::dist(&word_apply(&word, &x)?, &x)));
        }
        records.push(StageRecord {
            stage: k + 1,
            alpha: pj.alpha,
            jet_residuals,
            lattice_residuals,
            word_len: word.len(),
        });
    }
    Ok(MultiPointResult {
        word,
        stages: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cplx::{c, C64};
    use crate::interpolation::translation;
    use crate::jet::UniPoly;
    use crate::shear::Shear;

    /// Jet at `p` of `T ∘ W` where the translation `T` restores `p`.
    fn fixing_jet(w: &Word, p: &[C64], m: usize) -> JetMap {
        let img = word_apply(w, p).unwrap();
        let fixed = Word::new(vec![translation(&cplx::sub(p, &img))]).after(w);
        word_jet(&fixed, p, m).unwrap()
    }

    #[test]
    fn two_translation_jets() {
        let dim = 2;
        let delta = cplx::delta(dim);
        let jobs: Vec<PointJob> = (1..=2)
            .map(|a| PointJob {
                alpha: a,
                jet: JetMap::identity(&cplx::scale(&delta, re(a as f64)), 2),
            })
            .collect();
        let job = MultiPointJob {
            jobs,
            horizon: 6,
            eps: 1.0,
            seed: 1,
            region: SampledRegion::default(),
        };
        let res = multi_point_stage(&job, 2, &Config::default()).unwrap();
        for rec in &res.stages {
            assert!(rec.jet_residuals.iter().all(|x| *x < 1e-8));
            assert!(rec.lattice_residuals.iter().all(|(_, x)| *x < 1e-9));
        }
    }

    #[test]
    fn stacked_nontrivial_jets() {
        let dim = 2;
        let delta = cplx::delta(dim);
        let w = Word::new(vec![
            Shear::new(vec![re(1.0), c(0.2, 0.1)], UniPoly::from_coeffs(vec![re(0.1), re(0.2), re(0.05)])).into(),
            Shear::new(vec![re(-0.3), re(1.0)], UniPoly::from_coeffs(vec![re(0.0), re(-0.1), re(0.02)])).into(),
        ]);
        let jobs: Vec<PointJob> = (1..=3)
            .map(|a| PointJob {
                alpha: a,
                jet: fixing_jet(&w, &cplx::scale(&delta, re(a as f64)), 2),
            })
            .collect();
        let job = MultiPointJob {
            jobs,
            horizon: 10,
            eps: 1.0,
            seed: 4,
            region: SampledRegion::default(),
        };
        let res = multi_point_stage(&job, 3, &Config::default()).unwrap();
        for rec in &res.stages {
            assert!(rec.jet_residuals.iter().all(|x| *x < 1e-6), "{rec:?}");
            assert!(rec.lattice_residuals.iter().all(|(_, x)| *x < 1e-9), "{rec:?}");
        }
    }
}
