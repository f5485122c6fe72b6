//! The entire function `phi(X)` and its derivatives.
//!
//! `phi(X) = sum_k n! s^k / (n+k)! h_k(X)` with `s = n - d + 1`, where
//! `h_k` is the complete homogeneous symmetric polynomial of degree `k`
//! in the `n + 1` coordinates of `X` (the sum over all multi-indices of
//! total degree `k`). Everything downstream of the weights reduces to
//! `phi`, its directional derivative, and the Euler-weighted sums
//! `sum_k c_k k h_k`.
//!
//! Two independent evaluation routes:
//! * [`phi_bundle`] sums the series with a rigorous factorial tail bound
//!   (`|h_k| <= C(n+k, n) R^k` and `n! C(n+k, n) / (n+k)! = 1/k!`, so the
//!   tail is dominated by `sum_{k>K} (|s|R)^k / k!`).
//! * [`phi_divdiff`] evaluates `n! s^{-n} [X_0, ..., X_n] e^{s x}` — the
//!   divided difference over the coordinates as interpolation nodes — via
//!   the exponential of the bidiagonal node matrix, which handles
//!   confluent nodes without special-casing.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::poly::DiagonalField;

/// Default absolute tail tolerance for series truncation.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Default cap on the number of series terms.
pub const DEFAULT_MAX_TERMS: usize = 512;

/// Truncation policy for the `phi` series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesControl {
    /// The scalar `s = n - d + 1` driving all series.
    pub s: f64,
    /// Absolute tail tolerance.
    pub epsilon: f64,
    /// Hard cap on series terms; exceeding it signals pathologically
    /// large `|s| * max|X_i|`.
    pub max_terms: usize,
}

impl SeriesControl {
    /// Control for a degree-`d` hypersurface of `CP^n` with defaults.
    pub fn new(n: usize, d: u32) -> Self {
        Self {
            s: n as f64 - d as f64 + 1.0,
            epsilon: DEFAULT_EPSILON,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "epsilon must be positive");
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        assert!(max_terms >= 1, "max_terms must be at least 1");
        self.max_terms = max_terms;
        self
    }

    /// Copy of `self` with `s` recomputed for the given dimensions; used by
    /// operations that receive both a polynomial and a caller-supplied
    /// control.
    pub fn for_dimensions(&self, n: usize, d: u32) -> Self {
        Self {
            s: n as f64 - d as f64 + 1.0,
            ..self.clone()
        }
    }
}

/// `phi` and friends evaluated at one `(X, v)` pair, with truncation
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiBundle {
    /// `phi(X)`.
    pub phi: C64,
    /// Directional derivative `D_v phi`.
    pub dphi_v: C64,
    /// `sum_i X^i d(phi)/dX^i = sum_k c_k k h_k`.
    pub euler: C64,
    /// `D_v` of `euler`, i.e. `sum_k c_k k B_k`.
    pub deuler_v: C64,
    /// Truncation index `K` actually used.
    pub terms_used: usize,
    /// Rigorous bound on every discarded tail.
    pub tail_bound: f64,
}

/// Literal enumeration of `h_k(X)` over all `C(n+k, n)` multi-indices.
/// Test oracle only: restricted to `k <= 8`, `n <= 5`.
pub fn brute_h(x: &[C64], k: usize) -> Result<C64> {
    let n = x.len().saturating_sub(1);
    if k > 8 || n > 5 {
        return Err(Error::ScaleExceeded { k, n });
    }
    fn walk(x: &[C64], remaining: usize, acc: C64, total: &mut C64) {
        match x {
            [] => {
                if remaining == 0 {
                    *total += acc;
                }
            }
            [last] => {
                // last variable absorbs whatever degree is left
                let mut power = acc;
                for _ in 0..remaining {
                    power *= last;
                }
                *total += power;
            }
            [first, rest @ ..] => {
                let mut power = acc;
                for used in 0..=remaining {
                    if used > 0 {
                        power *= first;
                    }
                    walk(rest, remaining - used, power, total);
                }
            }
        }
    }
    let mut total = C64::new(0.0, 0.0);
    walk(x, k, C64::new(1.0, 0.0), &mut total);
    Ok(total)
}

/// `h_0, ..., h_K` by the Newton-type recurrence
/// `k h_k = sum_{m=1}^{k} p_m h_{k-m}` with power sums `p_m = sum_i X_i^m`.
pub fn h_sequence(x: &[C64], k_max: usize) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); k_max + 1];
    h[0] = C64::new(1.0, 0.0);
    if k_max == 0 {
        return h;
    }
    // p[m] = sum_i x_i^m for m = 1..=k_max
    let mut powers: Vec<C64> = vec![C64::new(1.0, 0.0); x.len()];
    let mut p = vec![C64::new(0.0, 0.0); k_max + 1];
    for m in 1..=k_max {
        for (pow, xi) in powers.iter_mut().zip(x) {
            *pow *= xi;
        }
        p[m] = powers.iter().sum();
    }
    for k in 1..=k_max {
        let mut acc = C64::new(0.0, 0.0);
        for m in 1..=k {
            acc += p[m] * h[k - m];
        }
        h[k] = acc / k as f64;
    }
    h
}

/// Directional derivatives `B_k = sum_i v_i dh_k/dX_i` for `k = 0..=K`,
/// via `B_k = sum_{m=1}^{k} w_m h_{k-m}` with `w_m = sum_i v_i X_i^{m-1}`.
pub fn h_dirderiv(x: &[C64], v: &[C64], k_max: usize) -> Vec<C64> {
    assert_eq!(x.len(), v.len(), "coordinate count mismatch");
    let h = h_sequence(x, k_max);
    let mut b = vec![C64::new(0.0, 0.0); k_max + 1];
    if k_max == 0 {
        return b;
    }
    let mut powers: Vec<C64> = vec![C64::new(1.0, 0.0); x.len()];
    let mut w = vec![C64::new(0.0, 0.0); k_max + 1];
    for m in 1..=k_max {
        w[m] = v.iter().zip(&powers).map(|(vi, pow)| vi * pow).sum();
        for (pow, xi) in powers.iter_mut().zip(x) {
            *pow *= xi;
        }
    }
    for k in 1..=k_max {
        let mut acc = C64::new(0.0, 0.0);
        for m in 1..=k {
            acc += w[m] * h[k - m];
        }
        b[k] = acc;
    }
    b
}

/// Smallest truncation index `K` whose tail bound is below `epsilon`, with
/// the bound itself.
///
/// The dominating tail is the `k`-weighted one,
/// `sum_{k>K} k y^k / k! = y sum_{m>=K} y^m / m! <= y t_K / (1 - y/(K+1))`
/// for `y < K + 1` with `t_K = y^K / K!`; it also dominates the plain tail
/// `sum_{k>K} y^k / k!` termwise, so one index serves every series.
fn truncation_index(y: f64, epsilon: f64, max_terms: usize) -> Result<(usize, f64)> {
    debug_assert!(y >= 0.0);
    let mut t = 1.0f64; // y^K / K!
    for k in 0..=max_terms {
        let next = k as f64 + 1.0;
        if y < next {
            let bound = y * t / (1.0 - y / next);
            if bound <= epsilon {
                return Ok((k, bound));
            }
        }
        t *= y / next;
        if !t.is_finite() {
            break;
        }
    }
    Err(Error::BudgetExceeded {
        max_terms,
        magnitude: y,
    })
}

/// Evaluates the four series of the bundle at `(X, v)`, truncated at the
/// smallest `K` whose rigorous tail bound is below `ctl.epsilon`.
pub fn phi_bundle(
    x: &DiagonalField,
    v: &DiagonalField,
    n: usize,
    ctl: &SeriesControl,
) -> Result<PhiBundle> {
    if n < 2 {
        return Err(Error::AmbientTooSmall(n));
    }
    if x.len() != n + 1 {
        return Err(Error::LengthMismatch {
            got: x.len(),
            expected: n + 1,
        });
    }
    if v.len() != n + 1 {
        return Err(Error::LengthMismatch {
            got: v.len(),
            expected: n + 1,
        });
    }
    let radius = x.max_norm();
    let y = ctl.s.abs() * radius;
    let (k_used, tail_bound) = truncation_index(y, ctl.epsilon, ctl.max_terms)?;

    // For large |X| the raw h_k overflow long before the summands
    // c_k h_k ~ (sR)^k / k! do, so sum in the scaled variables
    // u = X / R, w = v / R with the R^k folded into the coefficient:
    // c_k h_k(X) = (n! (sR)^k / (n+k)!) h_k(u), and B_k scales the same
    // way since it is jointly homogeneous of degree k in (X, v).
    let (scale_step, h, b) = if y > 1.0 {
        let u: Vec<C64> = x.coeffs().iter().map(|c| c / radius).collect();
        let w: Vec<C64> = v.coeffs().iter().map(|c| c / radius).collect();
        (
            ctl.s * radius,
            h_sequence(&u, k_used),
            h_dirderiv(&u, &w, k_used),
        )
    } else {
        (
            ctl.s,
            h_sequence(x.coeffs(), k_used),
            h_dirderiv(x.coeffs(), v.coeffs(), k_used),
        )
    };

    let mut coeff = 1.0f64; // n! (s R)^k / (n+k)! as a running product
    let mut phi = C64::new(0.0, 0.0);
    let mut dphi_v = C64::new(0.0, 0.0);
    let mut euler = C64::new(0.0, 0.0);
    let mut deuler_v = C64::new(0.0, 0.0);
    for k in 0..=k_used {
        if k > 0 {
            coeff *= scale_step / (n + k) as f64;
        }
        let kf = k as f64;
        phi += h[k] * coeff;
        dphi_v += b[k] * coeff;
        euler += h[k] * (coeff * kf);
        deuler_v += b[k] * (coeff * kf);
    }
    Ok(PhiBundle {
        phi,
        dphi_v,
        euler,
        deuler_v,
        terms_used: k_used,
        tail_bound,
    })
}

/// Matrix exponential by scaling-and-squaring with a Taylor expansion of
/// the scaled matrix. The matrices here are tiny bidiagonal node matrices,
/// so plain Taylor after scaling to norm <= 1/2 is accurate and cheap.
fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = a.nrows();
    let norm = a
        .row_iter()
        .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.map(|c| c / 2.0f64.powi(squarings as i32));
    let mut result = DMatrix::<C64>::identity(dim, dim);
    let mut term = DMatrix::<C64>::identity(dim, dim);
    for k in 1..=40 {
        term = (&term * &scaled).map(|c| c / k as f64);
        result += &term;
        let term_norm = term.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if term_norm < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Independent evaluation of `phi` as `n! s^{-n}` times the divided
/// difference of `x -> e^{s x}` over the nodes `X_0, ..., X_n`.
///
/// The divided-difference table of an analytic function over a node set is
/// the corresponding function of the bidiagonal matrix with the nodes on
/// the diagonal and ones above it; the `(0, n)` entry is the full-order
/// divided difference. Repeated (confluent) nodes need no special-casing.
pub fn phi_divdiff(x: &DiagonalField, n: usize, d: u32) -> Result<C64> {
    let s = n as f64 - d as f64 + 1.0;
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    if x.len() != n + 1 {
        return Err(Error::LengthMismatch {
            got: x.len(),
            expected: n + 1,
        });
    }
    let dim = n + 1;
    let mut node_matrix = DMatrix::<C64>::zeros(dim, dim);
    for (i, &xi) in x.coeffs().iter().enumerate() {
        node_matrix[(i, i)] = xi * s;
        if i + 1 < dim {
            node_matrix[(i, i + 1)] = C64::new(s, 0.0);
        }
    }
    let corner = expm(&node_matrix)[(0, dim - 1)];
    // n! / s^n as a running product, avoiding explicit factorials
    let mut prefactor = 1.0f64;
    for k in 1..=n {
        prefactor *= k as f64 / s;
    }
    Ok(corner * prefactor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reals(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| c(x, 0.0)).collect()
    }

    /// Second divided difference of e^{2x} at nodes 1, 0, -1, times 1/2.
    const PHI_SPOT: f64 = 1.381_097_845_541_815_7;

    #[test]
    fn brute_h_examples() {
        let x = reals(&[0.7, -0.3, 0.1]);
        assert_eq!(brute_h(&x, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(brute_h(&reals(&[1.0, 0.0, -1.0]), 2).unwrap(), c(1.0, 0.0));
        assert_eq!(brute_h(&reals(&[1.0, 1.0]), 3).unwrap(), c(4.0, 0.0));
    }

    #[test]
    fn brute_h_rejects_large_scale() {
        let x = reals(&[1.0; 7]);
        assert!(matches!(
            brute_h(&x, 2),
            Err(Error::ScaleExceeded { k: 2, n: 6 })
        ));
        assert!(matches!(
            brute_h(&x[..3], 9),
            Err(Error::ScaleExceeded { k: 9, n: 2 })
        ));
    }

    #[test]
    fn h_sequence_examples() {
        let h = h_sequence(&reals(&[0.0, 0.0, 0.0]), 4);
        assert_eq!(h[0], c(1.0, 0.0));
        for hk in &h[1..] {
            assert_eq!(*hk, c(0.0, 0.0));
        }
        // generating function 1/(1-t^2): h = 1, 0, 1, 0, 1
        let h = h_sequence(&reals(&[1.0, 0.0, -1.0]), 4);
        let expect = [1.0, 0.0, 1.0, 0.0, 1.0];
        for (hk, e) in h.iter().zip(expect) {
            assert!((hk - c(e, 0.0)).norm() < 1e-14);
        }
        // h_k(1, 1) = k + 1
        let h = h_sequence(&reals(&[1.0, 1.0]), 3);
        for (k, hk) in h.iter().enumerate() {
            assert!((hk - c(k as f64 + 1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn h_sequence_matches_brute_enumeration() {
        let x = vec![c(0.9, 0.4), c(-1.1, 0.2), c(0.3, -0.8), c(0.05, 1.3)];
        for k in 0..=6 {
            let expect = brute_h(&x, k).unwrap();
            let got = h_sequence(&x, 6)[k];
            assert!(
                (got - expect).norm() <= 1e-12 * expect.norm().max(1.0),
                "k = {k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn h_dirderiv_examples() {
        // at X = 0 only w_1 = sum v_i survives
        let b = h_dirderiv(&reals(&[0.0, 0.0, 0.0]), &reals(&[1.0, 2.0, 3.0]), 2);
        assert_eq!(b[0], c(0.0, 0.0));
        assert!((b[1] - c(6.0, 0.0)).norm() < 1e-15);
        assert!(b[2].norm() < 1e-15);

        // Euler: B_k(X, X) = k h_k
        let x = vec![c(0.5, 0.1), c(-0.7, 0.3), c(0.2, -0.4)];
        let h = h_sequence(&x, 6);
        let b = h_dirderiv(&x, &x, 6);
        for k in 0..=6 {
            let expect = h[k] * k as f64;
            assert!((b[k] - expect).norm() <= 1e-12 * expect.norm().max(1.0));
        }

        // w_1 = w_2 = 0 for this pair
        let b = h_dirderiv(&reals(&[1.0, 0.0, -1.0]), &reals(&[1.0, -2.0, 1.0]), 2);
        assert!(b[1].norm() < 1e-15);
        assert!(b[2].norm() < 1e-15);
    }

    #[test]
    fn phi_bundle_at_zero_is_exact() {
        let x = DiagonalField::zero(4);
        let v = DiagonalField::from_real(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let ctl = SeriesControl::new(3, 2);
        let bundle = phi_bundle(&x, &v, 3, &ctl).unwrap();
        assert_eq!(bundle.phi, c(1.0, 0.0));
        assert_eq!(bundle.dphi_v, c(0.0, 0.0));
        assert_eq!(bundle.euler, c(0.0, 0.0));
        assert_eq!(bundle.deuler_v, c(0.0, 0.0));
        assert_eq!(bundle.terms_used, 0);
    }

    #[test]
    fn phi_bundle_spot_value() {
        let x = DiagonalField::from_real(&[1.0, 0.0, -1.0]).unwrap();
        let v = DiagonalField::zero(3);
        let ctl = SeriesControl::new(2, 1);
        let bundle = phi_bundle(&x, &v, 2, &ctl).unwrap();
        assert!((bundle.phi.re - PHI_SPOT).abs() < 1e-13, "{}", bundle.phi);
        assert!(bundle.phi.im == 0.0);
        assert!(bundle.tail_bound <= ctl.epsilon);
        assert!(bundle.terms_used <= ctl.max_terms);
    }

    #[test]
    fn phi_bundle_continuous_at_zero() {
        let ctl = SeriesControl::new(2, 1);
        let v = DiagonalField::zero(3);
        let mut last = f64::INFINITY;
        for t in [1e-2, 1e-4, 1e-6, 1e-8] {
            let x = DiagonalField::from_real(&[t, 0.0, -t]).unwrap();
            let bundle = phi_bundle(&x, &v, 2, &ctl).unwrap();
            let gap = (bundle.phi - c(1.0, 0.0)).norm();
            assert!(gap < last, "phi should approach 1 monotonically here");
            last = gap;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn phi_bundle_budget_exceeded() {
        let x = DiagonalField::from_real(&[400.0, 0.0, -400.0]).unwrap();
        let v = DiagonalField::zero(3);
        let ctl = SeriesControl::new(2, 1).with_max_terms(64);
        assert!(matches!(
            phi_bundle(&x, &v, 2, &ctl),
            Err(Error::BudgetExceeded { max_terms: 64, .. })
        ));
    }

    #[test]
    fn phi_is_one_when_s_vanishes() {
        // d = n + 1 means s = 0: only the k = 0 term survives
        let x = DiagonalField::from_real(&[0.9, -0.4, -0.5]).unwrap();
        let v = DiagonalField::zero(3);
        let ctl = SeriesControl::new(2, 3);
        assert_eq!(ctl.s, 0.0);
        let bundle = phi_bundle(&x, &v, 2, &ctl).unwrap();
        assert_eq!(bundle.phi, c(1.0, 0.0));
        assert_eq!(bundle.euler, c(0.0, 0.0));
    }

    #[test]
    fn tail_bound_is_honest() {
        let x = DiagonalField::from_real(&[1.3, -0.5, -0.8]).unwrap();
        let v = DiagonalField::zero(3);
        let tight = phi_bundle(&x, &v, 2, &SeriesControl::new(2, 1).with_epsilon(1e-15)).unwrap();
        let loose = phi_bundle(&x, &v, 2, &SeriesControl::new(2, 1).with_epsilon(1e-12)).unwrap();
        assert!((tight.phi - loose.phi).norm() <= 1e-12);
        assert!(loose.tail_bound <= 1e-12);
    }

    #[test]
    fn divdiff_spot_value() {
        let x = DiagonalField::from_real(&[1.0, 0.0, -1.0]).unwrap();
        let phi = phi_divdiff(&x, 2, 1).unwrap();
        assert!((phi.re - PHI_SPOT).abs() < 1e-13, "{phi}");
        assert!(phi.im.abs() < 1e-16);
    }

    #[test]
    fn divdiff_confluent_nodes() {
        // all nodes at zero: divided difference of e^{sx} is s^n / n!
        let x = DiagonalField::zero(4);
        let phi = phi_divdiff(&x, 3, 1).unwrap();
        assert!((phi - c(1.0, 0.0)).norm() < 1e-14);
        // nearly confluent nodes stay stable
        let x = DiagonalField::new(vec![
            c(1e-9, 0.0),
            c(-1e-9, 0.0),
            c(5e-10, 0.0),
            c(-5e-10, 0.0),
        ])
        .unwrap();
        let phi = phi_divdiff(&x, 3, 1).unwrap();
        assert!((phi - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn divdiff_rejects_zero_scale() {
        let x = DiagonalField::zero(3);
        assert_eq!(phi_divdiff(&x, 2, 3).unwrap_err(), Error::ZeroScale);
    }

    #[test]
    fn divdiff_matches_series() {
        let x = DiagonalField::new(vec![
            c(0.8, 0.3),
            c(-0.9, -0.1),
            c(0.4, -0.6),
            c(-0.3, 0.4),
        ])
        .unwrap();
        let v = DiagonalField::zero(4);
        for d in 1..=3 {
            let ctl = SeriesControl::new(3, d);
            let series = phi_bundle(&x, &v, 3, &ctl).unwrap().phi;
            let dd = phi_divdiff(&x, 3, d).unwrap();
            assert!(
                (series - dd).norm() <= 1e-9 * series.norm(),
                "d = {d}: {series} vs {dd}"
            );
        }
    }
}
