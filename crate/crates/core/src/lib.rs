//! Symplectic holomorphic shears, jets and interpolation on `C^{2n}`.

pub mod config;
pub mod cplx;
pub mod error;
pub mod factor;
pub mod interpolation;
pub mod jet;
pub mod linalg;
pub mod osculation;
pub mod shear;
pub mod symplectic;
pub mod tame;

pub use config::Config;
pub use error::{Error, ErrorKind, Result};
