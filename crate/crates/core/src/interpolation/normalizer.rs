use super::check_on_diagonal;
use crate::config::Config;
use crate::cplx::{self, re, C64};
use crate::error::{Error, Result};
use crate::osculation::{hermite_osculate_tol, OsculationConstraint};
use crate::shear::{Shear, Word};

/// Three shears along `JΔ`, `Δ`, `JΔ` sending `jΔ` to `targets[j−1]` and
/// agreeing there with a translation to order `orders[j−1]`.
pub fn tame_normalizer(targets: &[Vec<C64>], orders: &[u32], cfg: &Config) -> Result<Word> {
    if targets.len() != orders.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            found: orders.len(),
        });
    }
    if targets.is_empty() {
        return Ok(Word::empty());
    }
    let dim = targets[0].len();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Input(format!("ambient dimension {dim} is not even")));
    }
    for t in targets {
        if t.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: t.len(),
            });
        }
    }
    let pts: Vec<&[C64]> = targets.iter().map(Vec::as_slice).collect();
    check_on_diagonal(&pts, "target")?;
    let gammas: Vec<C64> = targets
        .iter()
        .map(|t| cplx::diagonal_multiple(t, 1e-12).expect("checked"))
        .collect();
    for (i, a) in gammas.iter().enumerate() {
        if gammas[i + 1..].contains(a) {
            return Err(Error::DuplicatePoints(format!("target multiplier {a}")));
        }
    }

    let delta = cplx::delta(dim);
    let tilde = cplx::j_apply(&delta);
    let tol = 1e3 * cfg.tol;

    let mut points: Vec<Vec<C64>> = (1..=targets.len())
        .map(|j| cplx::scale(&delta, re(j as f64)))
        .collect();
    let stages: [(&Vec<C64>, &str); 3] = [(&tilde, "f1"), (&delta, "f2"), (&tilde, "f3")];
    let mut factors = Vec::with_capacity(3);
    for (s, (v, name)) in stages.iter().enumerate() {
        let constraints: Vec<OsculationConstraint> = points
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let j = re((i + 1) as f64);
                let value = match s {
                    0 => j,
                    1 => gammas[i] - j,
                    _ => -j,
                };
                OsculationConstraint::value_flat(cplx::lambda(z, v), value, orders[i] as usize)
            })
            .collect();
        let f = hermite_osculate_tol(&constraints, tol).map_err(|e| match e {
            Error::DuplicatePoints(d) => Error::Collision {
                stage: (*name).into(),
                detail: d,
            },
            other => other,
        })?;
        let shear = Shear::new((*v).clone(), f);
        points = points
            .iter()
            .map(|z| shear.apply(z))
            .collect::<Result<_>>()?;
        factors.push(shear.into());
    }
    factors.reverse();
    Ok(Word::new(factors))
}
