//! The holomorphic invariant `F_X(v)` and its ingredients.
//!
//! With weights `kappa` (of `v`) and `lambda` (of `X`) and `s = n - d + 1`:
//!
//! ```text
//! sigma(X) = (-lambda s / n + d) phi(X) + (d / n) sum_i X^i dphi/dX^i
//! F_X(v)   = -s^(n-1) d (kappa + D_v sigma / sigma)
//! ```
//!
//! The derivative `D_v sigma` is taken along the path `X + t v` on which
//! the weight moves linearly, `lambda(X + t v) = lambda + t kappa`; only
//! this reading collapses to the Futaki closed form
//! `F(v) = -s^(n-1) (n+1)(d-1) kappa / n` at `X = 0`, which the tests pin
//! down. The logarithmic derivative is evaluated as `D_v sigma / sigma`
//! rather than by differentiating a branch of `log sigma`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hfuncs::{phi_bundle, SeriesControl};
use crate::poly::{weight_of, DiagonalField, HomogeneousPolynomial, DEFAULT_TANGENCY_TOL};

/// `|sigma|` at or below this threshold renders the logarithmic
/// derivative numerically meaningless.
pub fn sigma_zero_threshold(d: u32) -> f64 {
    1e-12 * (d as f64).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub(crate) struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// `F_X(v)` with every intermediate value, for auditability.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    /// The invariant `F_X(v) = -s^(n-1) d (kappa + D_v sigma / sigma)`.
    pub value: C64,
    /// Weight of `v` on `F`.
    pub kappa: C64,
    /// Weight of `X` on `F`.
    pub lambda: C64,
    pub phi: C64,
    pub sigma: C64,
    /// Normalization constant `c_X = log(d / sigma)`, principal branch.
    pub c_x: C64,
    /// Numerator of the logarithmic derivative, `D_v sigma`.
    pub dsigma_v: C64,
    /// Series truncation index used by the bundle.
    pub terms_used: usize,
    /// Rigorous series tail bound.
    pub tail_bound: f64,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReportJson {
    value_re: f64,
    value_im: f64,
    kappa: ComplexJson,
    lambda: ComplexJson,
    phi: ComplexJson,
    sigma: ComplexJson,
    #[serde(rename = "c_X")]
    c_x: ComplexJson,
    dsigma_v: ComplexJson,
    terms_used: usize,
    tail_bound: f64,
    warnings: Vec<String>,
}

impl InvariantReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ReportJson {
            value_re: self.value.re,
            value_im: self.value.im,
            kappa: self.kappa.into(),
            lambda: self.lambda.into(),
            phi: self.phi.into(),
            sigma: self.sigma.into(),
            c_x: self.c_x.into(),
            dsigma_v: self.dsigma_v.into(),
            terms_used: self.terms_used,
            tail_bound: self.tail_bound,
            warnings: self.warnings.clone(),
        })
        .expect("plain struct serializes")
    }
}

/// `sigma(X)` for a field of weight `lambda` on a degree-`d` hypersurface
/// of `CP^n`.
pub fn sigma(
    x: &DiagonalField,
    lambda: C64,
    n: usize,
    d: u32,
    ctl: &SeriesControl,
) -> Result<C64> {
    let ctl = ctl.for_dimensions(n, d);
    let bundle = phi_bundle(x, &DiagonalField::zero(n + 1), n, &ctl)?;
    Ok(sigma_from_parts(bundle.phi, bundle.euler, lambda, n, d, ctl.s))
}

fn sigma_from_parts(phi: C64, euler: C64, lambda: C64, n: usize, d: u32, s: f64) -> C64 {
    let nf = n as f64;
    let df = d as f64;
    (-lambda * (s / nf) + df) * phi + euler * (df / nf)
}

/// Directional derivative `D_v sigma` along `X + t v`, with
/// `lambda(X + t v) = lambda + t kappa`. Returns the numerator of the
/// logarithmic derivative; the caller divides by `sigma`.
pub fn sigma_dirderiv(
    x: &DiagonalField,
    v: &DiagonalField,
    kappa: C64,
    lambda: C64,
    n: usize,
    d: u32,
    ctl: &SeriesControl,
) -> Result<C64> {
    let ctl = ctl.for_dimensions(n, d);
    let bundle = phi_bundle(x, v, n, &ctl)?;
    Ok(dsigma_from_parts(
        bundle.phi,
        bundle.dphi_v,
        bundle.deuler_v,
        kappa,
        lambda,
        n,
        d,
        ctl.s,
    ))
}

#[allow(clippy::too_many_arguments)]
fn dsigma_from_parts(
    phi: C64,
    dphi_v: C64,
    deuler_v: C64,
    kappa: C64,
    lambda: C64,
    n: usize,
    d: u32,
    s: f64,
) -> C64 {
    let nf = n as f64;
    let df = d as f64;
    -kappa * (s / nf) * phi + (-lambda * (s / nf) + df) * dphi_v + deuler_v * (df / nf)
}

/// The normalization constant `c_X = log(d / sigma(X))`, principal branch.
pub fn normalization_constant(
    x: &DiagonalField,
    lambda: C64,
    n: usize,
    d: u32,
    ctl: &SeriesControl,
) -> Result<C64> {
    let sig = sigma(x, lambda, n, d, ctl)?;
    if sig.norm() <= sigma_zero_threshold(d) {
        return Err(Error::SigmaZero(sig.norm()));
    }
    Ok((C64::new(d as f64, 0.0) / sig).ln())
}

/// Full evaluation of `F_X(v)` with the default tangency tolerance.
pub fn tian_zhu(
    p: &HomogeneousPolynomial,
    v: &DiagonalField,
    x: &DiagonalField,
    ctl: &SeriesControl,
) -> Result<InvariantReport> {
    tian_zhu_with_tol(p, v, x, ctl, DEFAULT_TANGENCY_TOL)
}

/// Full evaluation of `F_X(v)`; `v` and `X` must be normalized (sum zero)
/// and tangent to `{F = 0}` within `tangency_tol`.
pub fn tian_zhu_with_tol(
    p: &HomogeneousPolynomial,
    v: &DiagonalField,
    x: &DiagonalField,
    ctl: &SeriesControl,
    tangency_tol: f64,
) -> Result<InvariantReport> {
    let n = p.ambient_dim();
    let d = p.degree();
    let ctl = ctl.for_dimensions(n, d);
    let s = ctl.s;
    let kappa = weight_of(p, v, tangency_tol)?.value;
    let lambda = weight_of(p, x, tangency_tol)?.value;

    let bundle = phi_bundle(x, v, n, &ctl)?;
    let sig = sigma_from_parts(bundle.phi, bundle.euler, lambda, n, d, s);
    if sig.norm() <= sigma_zero_threshold(d) {
        return Err(Error::SigmaZero(sig.norm()));
    }
    let dsig = dsigma_from_parts(
        bundle.phi,
        bundle.dphi_v,
        bundle.deuler_v,
        kappa,
        lambda,
        n,
        d,
        s,
    );
    let prefactor = -s.powi(n as i32 - 1) * d as f64;
    let value = (kappa + dsig / sig) * prefactor;
    let c_x = (C64::new(d as f64, 0.0) / sig).ln();

    let mut warnings = Vec::new();
    if s <= 0.0 {
        warnings.push(format!(
            "NonFano: s = n - d + 1 = {s} is not positive; the invariant vanishes identically for s = 0"
        ));
    }
    Ok(InvariantReport {
        value,
        kappa,
        lambda,
        phi: bundle.phi,
        sigma: sig,
        c_x,
        dsigma_v: dsig,
        terms_used: bundle.terms_used,
        tail_bound: bundle.tail_bound,
        warnings,
    })
}

/// Closed-form Futaki invariant
/// `F(v) = -s^(n-1) (n+1)(d-1) kappa / n`, the `X = 0` case.
pub fn futaki(p: &HomogeneousPolynomial, v: &DiagonalField) -> Result<C64> {
    futaki_with_tol(p, v, DEFAULT_TANGENCY_TOL)
}

pub fn futaki_with_tol(
    p: &HomogeneousPolynomial,
    v: &DiagonalField,
    tangency_tol: f64,
) -> Result<C64> {
    let n = p.ambient_dim() as f64;
    let d = p.degree() as f64;
    let s = n - d + 1.0;
    let kappa = weight_of(p, v, tangency_tol)?.value;
    Ok(kappa * (-s.powi(p.ambient_dim() as i32 - 1) * (n + 1.0) * (d - 1.0) / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sigma_at_zero_is_degree() {
        let ctl = SeriesControl::new(3, 2);
        let x = DiagonalField::zero(4);
        assert_eq!(sigma(&x, c(0.0, 0.0), 3, 2, &ctl).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn sigma_at_vanishing_s_is_degree() {
        // d = n + 1: phi = 1 and euler = 0 regardless of X
        let ctl = SeriesControl::new(2, 3);
        let x = DiagonalField::from_real(&[0.8, -0.3, -0.5]).unwrap();
        assert_eq!(sigma(&x, c(1.7, 0.0), 2, 3, &ctl).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn sigma_dirderiv_at_zero_reduces_to_kappa_term() {
        let ctl = SeriesControl::new(3, 2);
        let x = DiagonalField::zero(4);
        let v = DiagonalField::from_real(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        let kappa = c(2.5, -0.5);
        let got = sigma_dirderiv(&x, &v, kappa, c(0.0, 0.0), 3, 2, &ctl).unwrap();
        let expect = -kappa * (2.0 / 3.0);
        assert!((got - expect).norm() < 1e-15);
    }

    #[test]
    fn sigma_dirderiv_vanishes_for_zero_direction() {
        let ctl = SeriesControl::new(3, 2);
        let x = DiagonalField::from_real(&[0.4, -0.1, -0.2, -0.1]).unwrap();
        let v = DiagonalField::zero(4);
        let got = sigma_dirderiv(&x, &v, c(0.0, 0.0), c(0.3, 0.0), 3, 2, &ctl).unwrap();
        assert_eq!(got, c(0.0, 0.0));
    }

    #[test]
    fn tian_zhu_quadric_null_direction_is_zero() {
        let p = parse_polynomial("Z0*Z3 + Z1*Z2", 3).unwrap();
        let v = DiagonalField::from_real(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        let x = DiagonalField::zero(4);
        let ctl = SeriesControl::new(3, 2);
        let report = tian_zhu(&p, &v, &x, &ctl).unwrap();
        assert_eq!(report.value, c(0.0, 0.0));
        assert_eq!(report.kappa, c(0.0, 0.0));
        assert_eq!(report.sigma, c(2.0, 0.0));
    }

    #[test]
    fn tian_zhu_at_origin_matches_futaki() {
        for (text, n) in [
            ("Z0*Z1^2", 3usize),
            ("Z0^2*Z1 + Z2^3 + Z0*Z1*Z2", 4),
            ("Z0*Z2 + Z1^2", 3),
        ] {
            let p = parse_polynomial(text, n).unwrap();
            let basis = crate::poly::tangent_field_basis(&p, crate::poly::DEFAULT_NULLSPACE_TOL);
            let x = DiagonalField::zero(n + 1);
            let ctl = SeriesControl::new(n, p.degree());
            for v in &basis {
                let report = tian_zhu(&p, v, &x, &ctl).unwrap();
                let closed = futaki(&p, v).unwrap();
                assert!(
                    (report.value - closed).norm() <= 1e-12 * closed.norm().max(1.0),
                    "{text}: {} vs {closed}",
                    report.value
                );
            }
        }
    }

    #[test]
    fn tian_zhu_is_linear_in_v() {
        let p = parse_polynomial("Z0*Z1^2", 3).unwrap();
        let v = DiagonalField::from_real(&[3.0, -1.0, -1.0, -1.0]).unwrap();
        let x = DiagonalField::from_real(&[0.2, -0.1, 0.3, -0.4]).unwrap();
        let ctl = SeriesControl::new(3, 3);
        let base = tian_zhu(&p, &v, &x, &ctl).unwrap().value;
        let alpha = c(-1.75, 0.0);
        let scaled = tian_zhu(&p, &v.scale(alpha), &x, &ctl).unwrap().value;
        assert!((scaled - base * alpha).norm() <= 1e-12 * base.norm().max(1.0));
    }

    #[test]
    fn tian_zhu_rejects_non_tangent() {
        let p = parse_polynomial("Z0^3 + Z1^3 + Z2^3 + Z3^3", 3).unwrap();
        let v = DiagonalField::from_real(&[1.0, -1.0, 0.0, 0.0]).unwrap();
        let x = DiagonalField::zero(4);
        let ctl = SeriesControl::new(3, 3);
        assert!(matches!(
            tian_zhu(&p, &v, &x, &ctl),
            Err(Error::NotTangent { .. })
        ));
    }

    #[test]
    fn tian_zhu_vanishes_exactly_when_s_is_zero() {
        // d = n + 1: prefactor s^(n-1) = 0
        let p = parse_polynomial("Z0*Z1^3", 3).unwrap();
        assert_eq!(p.degree(), 4);
        let v = DiagonalField::from_real(&[3.0, -1.0, -1.0, -1.0]).unwrap();
        let x = DiagonalField::from_real(&[0.1, 0.2, -0.3, 0.0]).unwrap();
        let ctl = SeriesControl::new(3, 4);
        let report = tian_zhu(&p, &v, &x, &ctl).unwrap();
        assert_eq!(report.value.norm(), 0.0);
        assert!(report.warnings.iter().any(|w| w.contains("NonFano")));
    }

    #[test]
    fn futaki_examples() {
        // d = 1: the (d - 1) factor kills everything
        let p = parse_polynomial("Z0", 3).unwrap();
        let v = DiagonalField::from_real(&[0.0, 1.0, -0.5, -0.5]).unwrap();
        assert_eq!(futaki(&p, &v).unwrap(), c(0.0, 0.0));

        // quadric: tangency forces kappa = 0
        let p = parse_polynomial("Z0*Z3 + Z1*Z2", 3).unwrap();
        let v = DiagonalField::from_real(&[2.0, -1.0, 1.0, -2.0]).unwrap();
        assert_eq!(futaki(&p, &v).unwrap(), c(0.0, 0.0));

        // formal Z0*Z1 in CP^3: kappa = 2, value -(2)^2 * 4 * 1 / 3 * 2 = -32/3
        let p = parse_polynomial("Z0*Z1", 3).unwrap();
        let v = DiagonalField::from_real(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        let got = futaki(&p, &v).unwrap();
        assert!((got - c(-32.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn normalization_constant_examples() {
        let ctl = SeriesControl::new(3, 2);
        let x = DiagonalField::zero(4);
        // sigma = d at X = 0, lambda = 0, so c_X = log 1 = 0
        assert_eq!(
            normalization_constant(&x, c(0.0, 0.0), 3, 2, &ctl).unwrap(),
            c(0.0, 0.0)
        );
        // d = n + 1: sigma = d for any X
        let x = DiagonalField::from_real(&[0.7, -0.2, -0.5]).unwrap();
        let ctl = SeriesControl::new(2, 3);
        assert_eq!(
            normalization_constant(&x, c(0.9, 0.1), 2, 3, &ctl).unwrap(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn normalization_constant_detects_sigma_zero() {
        // at X = 0, sigma = (-lambda s / n + d) so lambda = n d / s kills it
        let ctl = SeriesControl::new(3, 2);
        let x = DiagonalField::zero(4);
        let lambda = c(3.0 * 2.0 / 2.0, 0.0);
        assert!(matches!(
            normalization_constant(&x, lambda, 3, 2, &ctl),
            Err(Error::SigmaZero(_))
        ));
    }
}
