//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong between parsing a polynomial and
/// evaluating an invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input text does not match the polynomial or vector grammar.
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// A variable index exceeds the ambient dimension.
    #[error("unknown variable Z{index}: ambient space is CP^{n} (variables Z0..Z{n})")]
    UnknownVariable { index: usize, n: usize },

    /// Monomials of different total degree were mixed.
    #[error("polynomial is not homogeneous: monomial degrees {first} and {second} differ")]
    NotHomogeneous { first: u32, second: u32 },

    /// All terms cancelled or the input contained none.
    #[error("polynomial has no nonzero terms")]
    EmptyPolynomial,

    /// Hypersurfaces of CP^1 are point sets; n >= 2 is required.
    #[error("ambient dimension must be at least 2, got n = {0}")]
    AmbientTooSmall(usize),

    /// Vector length does not match the ambient dimension.
    #[error("vector has {got} entries, expected {expected} (= n + 1)")]
    LengthMismatch { got: usize, expected: usize },

    /// Field coordinates must sum to zero (Euler-direction removed).
    #[error("field coordinates must sum to zero: |sum| = {0:.3e} after max-norm scaling; apply normalize_field first")]
    NotNormalized(f64),

    /// The field is not tangent to the hypersurface: monomial weights differ.
    #[error("field is not tangent: weight spread {spread:.3e} exceeds allowance {allowed:.3e}")]
    NotTangent { spread: f64, allowed: f64 },

    /// The series would need more terms than the configured cap.
    #[error("series needs more than {max_terms} terms (|s| * max|X_i| = {magnitude:.3e}); raise max_terms or rescale X")]
    BudgetExceeded { max_terms: usize, magnitude: f64 },

    /// Brute-force enumeration is restricted to oracle scale.
    #[error("brute enumeration limited to k <= 8 and n <= 5, got k = {k}, n = {n}")]
    ScaleExceeded { k: usize, n: usize },

    /// The divided-difference path needs s = n - d + 1 != 0.
    #[error("divided-difference path requires s != 0 (d = n + 1 given); phi is identically 1 there")]
    ZeroScale,

    /// sigma(X) vanished; the logarithmic derivative is meaningless.
    #[error("sigma(X) vanishes within tolerance (|sigma| = {0:.3e}); invariant undefined at this X")]
    SigmaZero(f64),

    /// A value that must be real came out with a large imaginary part.
    #[error("residual imaginary part {0:.3e} on real input exceeds 1e-10")]
    ImaginaryResidual(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
