//! Holomorphic invariants of hypersurfaces in complex projective space.
//!
//! For a hypersurface `M = {F = 0}` in `CP^n` cut out by a homogeneous
//! polynomial `F` of degree `d`, and diagonal holomorphic vector fields
//! `v`, `X` tangent to `M`, this crate evaluates the obstruction invariant
//!
//! ```text
//! F_X(v) = -(n-d+1)^(n-1) d (kappa + D_v log sigma(X))
//! ```
//!
//! together with all of its ingredients: the field weights `kappa`,
//! `lambda`, the entire function `phi(X)` built from complete homogeneous
//! symmetric polynomials, `sigma(X)`, and the normalization constant
//! `c_X = log(d / sigma(X))`. The `X = 0` specialization is the classical
//! Futaki invariant, for which a closed form is also provided.
//!
//! Three independent evaluation routes for `phi` keep the numerics honest:
//! the truncated series with a rigorous factorial tail bound
//! ([`hfuncs::phi_bundle`]), a divided-difference/matrix-exponential path
//! ([`hfuncs::phi_divdiff`]), and seeded Monte-Carlo integration over the
//! moment simplex ([`oracle::mc_phi`]).
//!
//! [`soliton::solve_soliton`] searches the real tangent diagonal family for
//! the candidate soliton field `X*` where `F_{X*}` vanishes on the whole
//! family.

pub mod check;
pub mod error;
pub mod hfuncs;
pub mod invariant;
pub mod oracle;
pub mod poly;
pub mod soliton;

pub use error::{Error, Result};
pub use hfuncs::{PhiBundle, SeriesControl};
pub use invariant::InvariantReport;
pub use poly::{DiagonalField, HomogeneousPolynomial, Weight};
pub use soliton::SolitonResult;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
