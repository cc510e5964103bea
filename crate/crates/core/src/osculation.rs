//! Univariate polynomials with prescribed local behaviour: Hermite
//! osculation, attenuation factors and the flat/zero/small "magic" factory.

use serde::{Deserialize, Deserializer, Serialize};

use crate::config::Config;
use crate::cplx::{c, cpow, re, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::jet::{RootFactor, UniPoly};

/// Prescribed Taylor coefficients `jet[k] = f^{(k)}(point) / k!`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsculationConstraint {
    pub point: C64,
    pub jet: Vec<C64>,
}

impl OsculationConstraint {
    pub fn new(point: C64, jet: Vec<C64>) -> Self {
        OsculationConstraint { point, jet }
    }

    /// `f(point) = value` and the next `order` derivatives vanish.
    pub fn value_flat(point: C64, value: C64, order: usize) -> Self {
        let mut jet = vec![ZERO; order + 1];
        jet[0] = value;
        OsculationConstraint { point, jet }
    }
}

fn check_distinct(points: &[C64], what: &str) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a == b {
                return Err(Error::DuplicatePoints(format!("{what} at {a}")));
            }
        }
    }
    Ok(())
}

/// The unique polynomial of degree below the total number of conditions
/// matching every prescribed expansion.
pub fn hermite_osculate(constraints: &[OsculationConstraint]) -> Result<UniPoly> {
    hermite_osculate_tol(constraints, Config::default().tol)
}

pub fn hermite_osculate_tol(constraints: &[OsculationConstraint], tol: f64) -> Result<UniPoly> {
    if constraints.is_empty() {
        return Ok(UniPoly::zero());
    }
    if constraints.iter().any(|k| k.jet.is_empty()) {
        return Err(Error::Input("constraint without prescribed coefficients".into()));
    }
    let pts: Vec<C64> = constraints.iter().map(|k| k.point).collect();
    check_distinct(&pts, "osculation point")?;

    let shift = pts.iter().sum::<C64>() / pts.len() as f64;
    let spread = pts.iter().map(|p| (p - shift).norm()).fold(0.0, f64::max);
    let scale = if spread > 0.0 { re(spread) } else { ONE };

    // nodes in the scaled chart with prescribed t-Taylor coefficients
    let mut nodes: Vec<(C64, usize)> = Vec::new();
    let mut taylor: Vec<Vec<C64>> = Vec::new();
    for (ci, k) in constraints.iter().enumerate() {
        let t = (k.point - shift) / scale;
        let coeffs: Vec<C64> = k
            .jet
            .iter()
            .enumerate()
            .map(|(d, a)| a * cpow(scale, d as u32))
            .collect();
        for _ in 0..k.jet.len() {
            nodes.push((t, ci));
        }
        taylor.push(coeffs);
    }
    let total = nodes.len();

    // confluent divided differences, column by column
    let mut col: Vec<C64> = nodes.iter().map(|(_, ci)| taylor[*ci][0]).collect();
    let mut newton = vec![col[0]];
    for k in 1..total {
        let mut next = Vec::with_capacity(total - k);
        for j in 0..total - k {
            let (zj, cj) = nodes[j];
            let (zk, ck) = nodes[j + k];
            if cj == ck {
                next.push(taylor[cj][k]);
            } else {
                next.push((col[j + 1] - col[j]) / (zk - zj));
            }
        }
        newton.push(next[0]);
        col = next;
    }

    // Newton form to ascending coefficients in t
    let mut coeffs: Vec<C64> = vec![newton[total - 1]];
    for k in (0..total - 1).rev() {
        let z = nodes[k].0;
        let mut out = vec![ZERO; coeffs.len() + 1];
        for (i, a) in coeffs.iter().enumerate() {
            out[i + 1] += a;
            out[i] -= a * z;
        }
        out[0] += newton[k];
        coeffs = out;
    }
    let f = UniPoly::from_scaled(coeffs, shift, scale);

    let mut worst = 0.0f64;
    for k in constraints {
        let got = f.taylor_at(k.point, k.jet.len() - 1);
        for (d, (g, want)) in got.iter().zip(&k.jet).enumerate() {
            let unit = cpow(scale, d as u32).norm().max(1e-300);
            let err = (g - want).norm() * unit;
            let mag = 1.0 + want.norm() * unit;
            worst = worst.max(err / mag);
        }
    }
    if worst > tol {
        return Err(Error::IllConditioned { residual: worst });
    }
    Ok(f)
}

/// A compact set in `C` given by sample points, each standing for a disk of
/// radius `inflation`, together with a separating half-plane
/// `Re(ū ζ) >= delta` and the radius `max |ζ|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactRegion {
    pub samples: Vec<C64>,
    pub u: C64,
    pub delta: f64,
    pub radius: f64,
    #[serde(default)]
    pub inflation: f64,
}

#[derive(Deserialize)]
struct RegionRepr {
    #[serde(default)]
    samples: Vec<C64>,
    u: Option<C64>,
    delta: Option<f64>,
    radius: Option<f64>,
    #[serde(default)]
    inflation: f64,
}

impl<'de> Deserialize<'de> for CompactRegion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RegionRepr::deserialize(d)?;
        let out = match (r.u, r.delta) {
            (Some(u), Some(delta)) => CompactRegion::explicit(r.samples, u, delta, r.radius),
            (None, None) => CompactRegion::from_samples(r.samples),
            _ => Err(Error::Input("region needs both u and delta, or neither".into())),
        };
        out.and_then(|k| k.inflated(r.inflation))
            .map_err(serde::de::Error::custom)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull, counter-clockwise, without repeated points.
fn convex_hull(points: &[C64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|z| (z.re, z.im)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn closest_on_segment(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let d = (b.0 - a.0, b.1 - a.1);
    let len2 = d.0 * d.0 + d.1 * d.1;
    if len2 == 0.0 {
        return a;
    }
    let t = (-(a.0 * d.0 + a.1 * d.1) / len2).clamp(0.0, 1.0);
    (a.0 + t * d.0, a.1 + t * d.1)
}

/// Closest point of the convex hull to the origin, or `None` when the origin
/// lies in the hull.
fn hull_closest(points: &[C64]) -> Option<C64> {
    let hull = convex_hull(points);
    let best = match hull.len() {
        0 => return None,
        1 => hull[0],
        2 => closest_on_segment(hull[0], hull[1]),
        m => {
            let inside = (0..m).all(|i| cross(hull[i], hull[(i + 1) % m], (0.0, 0.0)) >= 0.0);
            if inside {
                return None;
            }
            (0..m)
                .map(|i| closest_on_segment(hull[i], hull[(i + 1) % m]))
                .min_by(|a, b| {
                    (a.0 * a.0 + a.1 * a.1)
                        .partial_cmp(&(b.0 * b.0 + b.1 * b.1))
                        .expect("finite")
                })
                .expect("nonempty hull")
        }
    };
    let z = c(best.0, best.1);
    if z.norm() == 0.0 {
        None
    } else {
        Some(z)
    }
}

impl CompactRegion {
    /// Separator from the point of the convex hull closest to the origin.
    pub fn from_samples(samples: Vec<C64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("region without samples".into()));
        }
        let closest = hull_closest(&samples).ok_or(Error::RegionNotSeparated { margin: 0.0 })?;
        let delta = closest.norm();
        let radius = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(CompactRegion {
            samples,
            u: closest / delta,
            delta,
            radius,
            inflation: 0.0,
        })
    }

    /// Explicit separator; any supplied samples must satisfy it.
    pub fn explicit(samples: Vec<C64>, u: C64, delta: f64, radius: Option<f64>) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::RegionNotSeparated { margin: delta });
        }
        if (u.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!("separator direction has modulus {}", u.norm())));
        }
        let sample_radius = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let radius = radius.unwrap_or(sample_radius).max(sample_radius);
        if samples.is_empty() && radius <= 0.0 {
            return Err(Error::Input("region needs samples or a radius".into()));
        }
        let margin = samples
            .iter()
            .map(|z| (u.conj() * z).re)
            .fold(f64::INFINITY, f64::min);
        if margin < delta * (1.0 - 1e-12) {
            return Err(Error::RegionNotSeparated { margin });
        }
        Ok(CompactRegion {
            samples,
            u,
            delta,
            radius: radius.max(delta),
            inflation: 0.0,
        })
    }

    /// Region without a precomputed separator; used for images that are only
    /// ever measured from some anchor.
    pub(crate) fn raw(samples: Vec<C64>, inflation: f64) -> Self {
        let radius = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        CompactRegion {
            samples,
            u: ONE,
            delta: 0.0,
            radius,
            inflation,
        }
    }

    /// Every sample now stands for a disk of radius `inflation + rho`.
    pub fn inflated(mut self, rho: f64) -> Result<Self> {
        if rho < 0.0 {
            return Err(Error::Input("negative inflation".into()));
        }
        self.inflation += rho;
        if self.margin() <= 0.0 {
            return Err(Error::RegionNotSeparated {
                margin: self.margin(),
            });
        }
        Ok(self)
    }

    /// Separation margin of the inflated region.
    pub fn margin(&self) -> f64 {
        self.delta - self.inflation
    }

    pub fn outer_radius(&self) -> f64 {
        self.radius + self.inflation
    }

    /// Upper bound of `|g|` over every sample disk for a factor that is
    /// Lipschitz-bounded by `|ζ − center|`.
    fn disk_max(&self, center: C64) -> f64 {
        self.samples
            .iter()
            .map(|z| (z - center).norm() + self.inflation)
            .fold(0.0, f64::max)
    }

    /// Same region seen from `anchor` (samples shifted by `−anchor`).
    fn relative_to(&self, anchor: C64) -> Result<CompactRegion> {
        let shifted: Vec<C64> = self.samples.iter().map(|z| z - anchor).collect();
        CompactRegion::from_samples(shifted)?.inflated(self.inflation)
    }
}

/// `q(ζ) = (1 − c ū ζ)^d` with `c = δ/R²` and the least `d` such that every
/// sample (disk) has `|q| < eps`; `q(0) = 1` exactly.
pub fn attenuation_factor(k: &CompactRegion, eps: f64, max_degree: usize) -> Result<UniPoly> {
    if !(eps > 0.0) {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    let delta = k.margin();
    if delta <= 0.0 {
        return Err(Error::RegionNotSeparated { margin: delta });
    }
    let r = k.outer_radius();
    let center = k.u * (r * r / delta);
    let (d, _) = least_degree(k, center, ZERO, eps, max_degree)?;
    Ok(UniPoly::constant(ONE).with_factor(RootFactor::anchored(center, ZERO, d)))
}

/// Least `d` with `(max_K |ζ − center| / |anchor − center|)^d < eps`.
fn least_degree(
    k: &CompactRegion,
    center: C64,
    anchor: C64,
    eps: f64,
    max_degree: usize,
) -> Result<(u32, f64)> {
    let ratio = if k.samples.is_empty() {
        let delta = k.margin();
        let r = k.outer_radius();
        (1.0 - delta * delta / (r * r)).max(0.0).sqrt()
    } else {
        k.disk_max(center) / (anchor - center).norm()
    };
    if 1.0 < eps {
        return Ok((0, 1.0));
    }
    if !(ratio < 1.0) {
        return Err(Error::DegreeExceeded {
            required: usize::MAX,
            cap: max_degree,
        });
    }
    if ratio == 0.0 {
        return Ok((1, 0.0));
    }
    let est = (eps.ln() / ratio.ln()).floor().max(0.0);
    if est > max_degree as f64 {
        return Err(Error::DegreeExceeded {
            required: est.min(usize::MAX as f64) as usize,
            cap: max_degree,
        });
    }
    let mut d = est as usize;
    while ratio.powi(d as i32) >= eps {
        d += 1;
    }
    if d > max_degree {
        return Err(Error::DegreeExceeded {
            required: d,
            cap: max_degree,
        });
    }
    Ok((d as u32, ratio.powi(d as i32)))
}

/// Attenuation anchored at `anchor` (`q(anchor) = 1`), trying several root
/// placements and keeping the one of least degree.
fn attenuation_best(
    k: &CompactRegion,
    anchor: C64,
    eps: f64,
    max_degree: usize,
) -> Result<UniPoly> {
    let rel = k.relative_to(anchor)?;
    let delta = rel.margin();
    let r = rel.outer_radius();
    let mut dirs = vec![rel.u];
    let centroid = rel.samples.iter().sum::<C64>() / rel.samples.len() as f64;
    if centroid.norm() > 0.0 {
        dirs.push(centroid / centroid.norm());
    }
    let mut best: Option<(u32, C64)> = None;
    let mut last_err = None;
    let t_max = 2.0 * r * r / delta;
    let t_min = 0.5 * delta;
    let steps = 48;
    for dir in dirs {
        for s in 0..=steps {
            let t = t_min * (t_max / t_min).powf(s as f64 / steps as f64);
            let center = dir * t;
            match least_degree(&rel, center, ZERO, eps, max_degree) {
                Ok((d, _)) => {
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, center));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    match best {
        Some((d, center)) => {
            Ok(UniPoly::constant(ONE).with_factor(RootFactor::anchored(center + anchor, anchor, d)))
        }
        None => Err(last_err.unwrap_or(Error::RegionNotSeparated { margin: delta })),
    }
}

/// Lemma-style univariate factory:
/// `f(ζ) = β ζ^r Π((ζ−a_i)/(−a_i))^N Π((ζ−c_j)/(−c_j)) q(ζ)`.
pub fn magic_function(
    r: u32,
    beta: C64,
    flats: &[(C64, u32)],
    zeros: &[C64],
    region: Option<&CompactRegion>,
    eps: f64,
    cfg: &Config,
) -> Result<UniPoly> {
    let spec = MagicSpec {
        anchor: ZERO,
        power: 1,
        r,
        beta,
        flats,
        zeros,
        region,
        eps,
        best_center: false,
    };
    spec.build(cfg)
}

/// Internal generalization. Constraints live in the plane `w = ζ^power`:
/// `f(ζ) = β (w − w₀)^r Π((w−a_i)/(w₀−a_i))^N Π((w−c_j)/(w₀−c_j)) q(ζ)` with
/// `w₀ = anchor^power`, while the attenuation `q` (with `q(anchor) = 1`) acts
/// on `ζ` itself, where the region samples are given.
pub(crate) struct MagicSpec<'a> {
    pub anchor: C64,
    pub power: u32,
    pub r: u32,
    pub beta: C64,
    pub flats: &'a [(C64, u32)],
    pub zeros: &'a [C64],
    pub region: Option<&'a CompactRegion>,
    pub eps: f64,
    pub best_center: bool,
}

/// Bound of `|ζ^p − a|` over the disk of radius `rho` around `z`.
fn disk_dev(z: C64, rho: f64, p: u32, a: C64) -> f64 {
    let m = z.norm();
    (cpow(z, p) - a).norm() + ((m + rho).powi(p as i32) - m.powi(p as i32))
}

impl MagicSpec<'_> {
    fn factor(&self, root: C64, w0: C64, mult: u32) -> RootFactor {
        RootFactor {
            root,
            norm: w0 - root,
            power: self.power,
            mult,
        }
    }

    pub fn build(&self, cfg: &Config) -> Result<UniPoly> {
        let anchor = self.anchor;
        let power = self.power.max(1);
        let w0 = cpow(anchor, power);
        for (a, _) in self.flats {
            if *a == w0 {
                return Err(Error::ZeroConstraint(format!("flat point {a}")));
            }
        }
        for z in self.zeros {
            if *z == w0 {
                return Err(Error::ZeroConstraint(format!("zero {z}")));
            }
        }
        let mut all: Vec<C64> = self.flats.iter().map(|(a, _)| *a).collect();
        all.extend_from_slice(self.zeros);
        check_distinct(&all, "constraint")?;

        let mut f = UniPoly::constant(self.beta);
        if self.r > 0 {
            f = f.with_factor(RootFactor {
                root: w0,
                norm: ONE,
                power,
                mult: self.r,
            });
        }
        for (a, n) in self.flats {
            f = f.with_factor(self.factor(*a, w0, *n));
        }
        for z in self.zeros {
            f = f.with_factor(self.factor(*z, w0, 1));
        }
        let Some(k) = self.region.filter(|k| !k.samples.is_empty()) else {
            return Ok(f);
        };
        if !(self.eps > 0.0) {
            return Err(Error::Input(format!("eps must be positive, got {}", self.eps)));
        }
        // bound of everything but q on the region
        let rho = k.inflation;
        let mut rest = 0.0f64;
        for z in &k.samples {
            let mut m = self.beta.norm() * disk_dev(*z, rho, power, w0).powi(self.r as i32);
            for (a, n) in self.flats {
                m *= (disk_dev(*z, rho, power, *a) / (w0 - a).norm()).powi(*n as i32);
            }
            for c0 in self.zeros {
                m *= disk_dev(*z, rho, power, *c0) / (w0 - c0).norm();
            }
            rest = rest.max(m);
        }
        if rest == 0.0 {
            return Ok(f);
        }
        let target = self.eps / rest;
        let q = if self.best_center {
            attenuation_best(k, anchor, target, cfg.max_degree)?
        } else {
            let rel = if anchor == ZERO {
                k.clone()
            } else {
                k.relative_to(anchor)?
            };
            let q0 = attenuation_factor(&rel, target, cfg.max_degree)?;
            shift_factors(q0, anchor)
        };
        Ok(f.mul(&q))
    }
}

/// Re-anchor a factors-only polynomial built around the origin at `anchor`.
fn shift_factors(q: UniPoly, anchor: C64) -> UniPoly {
    if anchor == ZERO {
        return q;
    }
    let mut out = UniPoly::constant(q.dense().first().copied().unwrap_or(ZERO));
    for f in q.factors() {
        out = out.with_factor(RootFactor::anchored(f.root + anchor, anchor, f.mult));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_is_taylor_polynomial() {
        let jet = vec![re(1.0), c(2.0, -1.0), re(0.5), re(-3.0)];
        let f = hermite_osculate(&[OsculationConstraint::new(ZERO, jet.clone())]).unwrap();
        let t = f.taylor_at(ZERO, 3);
        for (a, b) in t.iter().zip(&jet) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_values() {
        let f = hermite_osculate(&[
            OsculationConstraint::new(ZERO, vec![ZERO]),
            OsculationConstraint::new(re(2.0), vec![ONE]),
        ])
        .unwrap();
        let e = f.expanded();
        assert!((e[0]).norm() < 1e-15);
        assert!((e[1] - re(0.5)).norm() < 1e-15);
    }

    #[test]
    fn confluent_cubic() {
        // f(1) = 5, f'(1) = f''(1) = 0, f(0) = 0  =>  f = 5 + 5(ζ−1)^3
        let f = hermite_osculate(&[
            OsculationConstraint::value_flat(re(1.0), re(5.0), 2),
            OsculationConstraint::new(ZERO, vec![ZERO]),
        ])
        .unwrap();
        let e = f.expanded();
        let want = [re(0.0), re(15.0), re(-15.0), re(5.0)];
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn duplicate_points_rejected() {
        let k = OsculationConstraint::new(ONE, vec![ONE]);
        assert!(matches!(
            hermite_osculate(&[k.clone(), k]),
            Err(Error::DuplicatePoints(_))
        ));
    }

    fn disk(center: C64, rad: f64, count: usize) -> Vec<C64> {
        (0..count)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / count as f64;
                center + c(th.cos(), th.sin()) * rad
            })
            .collect()
    }

    #[test]
    fn attenuation_on_disk_near_three() {
        let k = CompactRegion::from_samples(disk(re(3.0), 0.5, 64)).unwrap();
        assert!((k.delta - 2.5).abs() < 1e-12);
        let q = attenuation_factor(&k, 0.5, 400).unwrap();
        assert_eq!(q.eval(ZERO), ONE);
        assert!(k.samples.iter().all(|z| q.eval(*z).norm() < 0.5));
        assert!(q.degree() <= 3);
    }

    #[test]
    fn attenuation_degree_one_when_eps_is_loose() {
        let k = CompactRegion::from_samples(vec![re(2.0), c(2.0, 1.0)]).unwrap();
        let r = k.radius;
        let base_max = k
            .samples
            .iter()
            .map(|z| (ONE - k.u.conj() * z * (k.delta / (r * r))).norm())
            .fold(0.0, f64::max);
        let q = attenuation_factor(&k, base_max + 1e-9, 400).unwrap();
        assert_eq!(q.degree(), 1);
    }

    #[test]
    fn attenuation_blows_up_as_margin_vanishes() {
        let k = CompactRegion::explicit(vec![c(1e-6, 1.0), c(1e-6, -1.0)], ONE, 1e-6, None).unwrap();
        assert!(matches!(
            attenuation_factor(&k, 1e-3, 400),
            Err(Error::DegreeExceeded { .. })
        ));
    }

    #[test]
    fn origin_inside_hull_is_not_separated() {
        assert!(matches!(
            CompactRegion::from_samples(vec![re(1.0), re(-1.0), c(0.0, 1.0)]),
            Err(Error::RegionNotSeparated { .. })
        ));
    }

    #[test]
    fn magic_examples() {
        let cfg = Config::default();
        let f = magic_function(2, re(3.0), &[], &[], None, 1.0, &cfg).unwrap();
        assert_eq!(f.taylor_at(ZERO, 3), vec![ZERO, ZERO, re(3.0), ZERO]);

        // ζ(1 − ζ)^2
        let f = magic_function(1, ONE, &[(ONE, 2)], &[], None, 1.0, &cfg).unwrap();
        let t = f.taylor_at(ZERO, 1);
        assert_eq!(t[1], ONE);
        assert_eq!(f.taylor_at(ONE, 1), vec![ZERO, ZERO]);
        let z = c(0.3, 0.2);
        assert!((f.eval(z) - z * (ONE - z) * (ONE - z)).norm() < 1e-15);

        // ζ(1 − ζ/2)
        let f = magic_function(1, ONE, &[], &[re(2.0)], None, 1.0, &cfg).unwrap();
        assert_eq!(f.eval(re(2.0)), ZERO);
        assert_eq!(f.taylor_at(ZERO, 1)[1], ONE);
    }

    #[test]
    fn magic_with_region_is_small() {
        let cfg = Config::default();
        let k = CompactRegion::from_samples(disk(c(4.0, 1.0), 1.0, 48)).unwrap();
        let f = magic_function(1, re(2.0), &[(re(-1.0), 3)], &[c(0.0, 2.0)], Some(&k), 1e-3, &cfg)
            .unwrap();
        assert!(k.samples.iter().all(|z| f.eval(*z).norm() < 1e-3));
        assert_eq!(f.taylor_at(ZERO, 1), vec![ZERO, re(2.0)]);
        assert!(f.taylor_at(re(-1.0), 2).iter().all(|x| *x == ZERO));
        assert_eq!(f.eval(c(0.0, 2.0)), ZERO);
    }

    #[test]
    fn magic_rejects_bad_constraints() {
        let cfg = Config::default();
        assert!(matches!(
            magic_function(1, ONE, &[(ZERO, 2)], &[], None, 1.0, &cfg),
            Err(Error::ZeroConstraint(_))
        ));
        assert!(matches!(
            magic_function(1, ONE, &[(ONE, 2)], &[ONE], None, 1.0, &cfg),
            Err(Error::DuplicatePoints(_))
        ));
    }

    #[test]
    fn anchored_variant_hits_one() {
        let cfg = Config::default();
        let anchor = c(0.7, -0.2);
        let k = CompactRegion::from_samples(disk(c(-3.0, 0.5), 0.5, 32)).unwrap();
        let spec = MagicSpec {
            anchor,
            power: 1,
            r: 0,
            beta: ONE,
            flats: &[(re(2.0), 3)],
            zeros: &[c(1.0, 1.0)],
            region: Some(&k),
            eps: 1e-4,
            best_center: true,
        };
        let f = spec.build(&cfg).unwrap();
        assert_eq!(f.eval(anchor), ONE);
        assert!(k.samples.iter().all(|z| f.eval(*z).norm() < 1e-4));
        assert_eq!(f.eval(c(1.0, 1.0)), ZERO);
    }

    #[test]
    fn region_json_forms() {
        let k: CompactRegion = serde_json::from_str(r#"{"samples":[[2.0,0.0],[3.0,1.0]]}"#).unwrap();
        assert!((k.delta - 2.0).abs() < 1e-12);
        let k: CompactRegion =
            serde_json::from_str(r#"{"u":[1.0,0.0],"delta":1.0,"radius":5.0}"#).unwrap();
        assert_eq!(k.radius, 5.0);
    }
}
