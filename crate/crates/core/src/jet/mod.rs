//! Polynomials, truncated jets of self-maps of `C^{2n}`, and univariate
//! polynomials in factored form.

mod jetmap;
mod multi_index;
mod poly;
mod series;
mod table;
mod unipoly;

pub use jetmap::{
    homogeneous_part, jet_compose, jet_compose_tol, jet_invert, linear_part, poly_eval, JetMap,
    BASE_TOL,
};
pub(crate) use jetmap::poly_of_series;
pub use multi_index::{binomial, MultiIndex};
pub use poly::PolyScalar;
pub use series::Series;
pub use table::MonomialTable;
pub use unipoly::{RootFactor, UniPoly};
