use serde::{Deserialize, Serialize};

/// Numeric knobs shared by the whole pipeline.
///
/// `tol` is the single comparison tolerance; the remaining fields bound the
/// amount of work the constructive steps may do before giving up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub tol: f64,
    /// Largest degree allowed for an attenuation factor.
    pub max_degree: usize,
    /// Upper bound on the condition number of a power basis.
    pub cond_bound: f64,
    /// Reseeding rounds for basis searches and intermediate points.
    pub max_retries: usize,
    /// Hard cap on the number of transvections emitted by a factorization.
    pub factor_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol: 1e-9,
            max_degree: 400,
            cond_bound: 1e9,
            max_retries: 24,
            factor_cap: 64,
        }
    }
}

impl Config {
    pub fn with_tol(tol: f64) -> Self {
        Config {
            tol,
            ..Config::default()
        }
    }
}
