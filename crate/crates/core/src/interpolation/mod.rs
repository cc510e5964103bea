//! Finite jet interpolation by words of symplectic shears: the tame
//! normalizer, point movers, the linear and higher-order stages and the
//! staged multi-point driver.

mod mover;
mod multi;
mod normalizer;
mod stages;

use serde::{Deserialize, Serialize};

use crate::cplx::{self, cpow, C64, ONE};
use crate::error::{Error, Result};
use crate::jet::{JetMap, UniPoly};
use crate::osculation::CompactRegion;
use crate::shear::{word_apply, word_jet, Factor, Shear, Word};

pub use mover::point_mover;
pub use multi::{multi_point_stage, MultiPointJob, MultiPointResult, PointJob, StageRecord};
pub use normalizer::tame_normalizer;
pub use stages::{finite_jet_interpolate, higher_stage, linear_stage};

/// A point at which the word must agree with the identity to order `order − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPoint {
    pub point: Vec<C64>,
    pub order: u32,
}

/// Compact set in `C^{2n}` given by samples, each standing for a ball of
/// radius `inflation`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampledRegion {
    #[serde(default)]
    pub samples: Vec<Vec<C64>>,
    #[serde(default)]
    pub inflation: f64,
}

impl SampledRegion {
    pub fn new(samples: Vec<Vec<C64>>) -> Self {
        SampledRegion {
            samples,
            inflation: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn inflated(&self, rho: f64) -> SampledRegion {
        SampledRegion {
            samples: self.samples.clone(),
            inflation: self.inflation + rho,
        }
    }

    /// Image under `λ_v`, as a region of `C`.
    pub(crate) fn lambda_image(&self, v: &[C64]) -> CompactRegion {
        let samples = self.samples.iter().map(|s| cplx::lambda(s, v)).collect();
        CompactRegion::raw(samples, self.inflation * cplx::norm(v))
    }

    fn mapped(&self, f: &Factor) -> Result<SampledRegion> {
        Ok(SampledRegion {
            samples: self
                .samples
                .iter()
                .map(|s| f.apply(s))
                .collect::<Result<_>>()?,
            inflation: self.inflation,
        })
    }
}

/// The constraints shared by every stage of one interpolation problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JobConstraints {
    #[serde(default)]
    pub flats: Vec<FlatPoint>,
    #[serde(default)]
    pub fixpoints: Vec<Vec<C64>>,
    #[serde(default)]
    pub region: SampledRegion,
}

impl JobConstraints {
    fn mapped(&self, f: &Factor) -> Result<JobConstraints> {
        Ok(JobConstraints {
            flats: self
                .flats
                .iter()
                .map(|a| {
                    Ok(FlatPoint {
                        point: f.apply(&a.point)?,
                        order: a.order,
                    })
                })
                .collect::<Result<_>>()?,
            fixpoints: self
                .fixpoints
                .iter()
                .map(|c| f.apply(c))
                .collect::<Result<_>>()?,
            region: self.region.mapped(f)?,
        })
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        let pts = self
            .flats
            .iter()
            .map(|a| &a.point)
            .chain(&self.fixpoints)
            .chain(&self.region.samples);
        for p in pts {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        Ok(())
    }
}

/// Target jet `P` (base `p`, image `q`, order `k`) with its constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationJob {
    pub jet: JetMap,
    #[serde(default)]
    pub flats: Vec<FlatPoint>,
    #[serde(default)]
    pub fixpoints: Vec<Vec<C64>>,
    #[serde(default)]
    pub region: SampledRegion,
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
}

impl InterpolationJob {
    pub fn constraints(&self) -> JobConstraints {
        JobConstraints {
            flats: self.flats.clone(),
            fixpoints: self.fixpoints.clone(),
            region: self.region.clone(),
        }
    }
}

/// Per-stage smallness and the common flatness order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBudget {
    pub per_stage_eps: f64,
    pub flat_order: u32,
}

impl StageBudget {
    pub fn new(eps: f64, k: usize, flat_order: u32) -> Self {
        StageBudget {
            per_stage_eps: eps / (k + 1) as f64,
            flat_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaImageReport {
    pub images: Vec<C64>,
    pub injective: bool,
    /// `None` for fewer than two points.
    pub min_gap: Option<f64>,
}

/// Whether `λ_v` separates the points, and by how much.
pub fn lambda_image_check(points: &[Vec<C64>], v: &[C64]) -> LambdaImageReport {
    let images: Vec<C64> = points.iter().map(|p| cplx::lambda(p, v)).collect();
    let mut gap: Option<f64> = None;
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            let d = (a - b).norm();
            gap = Some(gap.map_or(d, |g| g.min(d)));
        }
    }
    let scale = 1.0 + images.iter().map(|z| z.norm()).fold(0.0, f64::max);
    LambdaImageReport {
        injective: gap.is_none_or(|g| g > 1e-12 * scale),
        images,
        min_gap: gap,
    }
}

/// Residuals of an interpolating word against its job.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub jet_residual: f64,
    pub image_residual: f64,
    pub flat_residuals: Vec<f64>,
    pub fixpoint_residuals: Vec<f64>,
    pub region_sup: f64,
    pub word_len: usize,
}

pub fn interpolation_report(w: &Word, job: &InterpolationJob) -> Result<InterpolationReport> {
    let p = job.jet.base();
    let jet = word_jet(w, p, job.jet.order())?;
    let mut rep = InterpolationReport {
        jet_residual: jet.max_diff(&job.jet),
        image_residual: cplx::dist(&word_apply(w, p)?, &job.jet.image()),
        word_len: w.len(),
        ..Default::default()
    };
    for a in &job.flats {
        let n = a.order as usize;
        let jet = word_jet(w, &a.point, n.saturating_sub(1))?;
        let dev = (0..n)
            .map(|d| jet.deviation_from_identity(d))
            .fold(0.0, f64::max);
        rep.flat_residuals.push(dev);
    }
    for c in &job.fixpoints {
        rep.fixpoint_residuals.push(cplx::dist(&word_apply(w, c)?, c));
    }
    for s in &job.region.samples {
        rep.region_sup = rep.region_sup.max(cplx::dist(&word_apply(w, s)?, s));
    }
    Ok(rep)
}

/// `z ↦ z + h` written as a shear with constant function.
pub(crate) fn translation(h: &[C64]) -> Factor {
    Shear::new(h.to_vec(), UniPoly::constant(ONE)).into()
}

/// Derived seed for a sub-construction.
pub(crate) fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Failures that a different seed, hub or intermediate point may avoid.
pub(crate) fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::Collision { .. }
            | Error::RegionNotSeparated { .. }
            | Error::DegreeExceeded { .. }
            | Error::NoIntermediate { .. }
            | Error::IllConditioned { .. }
            | Error::BasisFailure { .. }
            | Error::ZeroConstraint(_)
            | Error::DuplicatePoints(_)
    )
}

/// Univariate constraint sites of one shear direction, in the plane
/// `w = λ_v(z)^power`.
pub(crate) struct Sites {
    pub flats: Vec<(C64, u32)>,
    pub zeros: Vec<C64>,
}

/// Collect the images of flat points and fixpoints. Exact duplicates are
/// merged (a flat root already vanishes, so a coinciding zero is dropped);
/// an image at the anchor is a collision.
pub(crate) fn collect_sites(
    cons: &JobConstraints,
    v: &[C64],
    power: u32,
    anchor_w: C64,
    stage: &str,
) -> Result<Sites> {
    let img = |p: &[C64]| cpow(cplx::lambda(p, v), power);
    let near = |w: C64| (w - anchor_w).norm() <= 1e-9 * (1.0 + anchor_w.norm());
    let mut flats: Vec<(C64, u32)> = Vec::new();
    for a in &cons.flats {
        if a.order == 0 {
            continue;
        }
        let w = img(&a.point);
        if near(w) {
            return Err(Error::Collision {
                stage: stage.into(),
                detail: format!("flat point image {w} meets the anchor {anchor_w}"),
            });
        }
        match flats.iter_mut().find(|(x, _)| *x == w) {
            Some(slot) => slot.1 = slot.1.max(a.order),
            None => flats.push((w, a.order)),
        }
    }
    let mut zeros: Vec<C64> = Vec::new();
    for c in &cons.fixpoints {
        let w = img(c);
        if near(w) {
            return Err(Error::Collision {
                stage: stage.into(),
                detail: format!("fixpoint image {w} meets the anchor {anchor_w}"),
            });
        }
        if !flats.iter().any(|(x, _)| *x == w) && !zeros.contains(&w) {
            zeros.push(w);
        }
    }
    Ok(Sites { flats, zeros })
}

/// Checks shared by every entry point: dimensions and points on `span{Δ}`.
pub(crate) fn check_on_diagonal(points: &[&[C64]], what: &str) -> Result<()> {
    for p in points {
        if cplx::diagonal_multiple(p, 1e-12).is_none() {
            return Err(Error::Precondition(format!(
                "{what} {p:?} is not a multiple of the diagonal vector"
            )));
        }
    }
    Ok(())
}
