//! Self-check suite comparing the three evaluation routes on one
//! hypersurface: series, divided difference, and Monte Carlo.
//!
//! Deterministic for a fixed seed, so two runs emit identical reports.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::hfuncs::{phi_bundle, phi_divdiff, SeriesControl, DEFAULT_EPSILON, DEFAULT_MAX_TERMS};
use crate::invariant::futaki;
use crate::oracle::{mc_euler, mc_phi};
use crate::poly::{
    tangent_field_basis, DiagonalField, HomogeneousPolynomial, DEFAULT_NULLSPACE_TOL,
};

/// Relative agreement demanded between the series and divided-difference
/// routes.
pub const CROSS_PATH_RTOL: f64 = 1e-9;

/// Monte-Carlo acceptance band in units of the standard error.
pub const MC_BAND: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub series_epsilon: f64,
    pub series_max_terms: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            series_epsilon: DEFAULT_EPSILON,
            series_max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
    pub passed: bool,
}

impl CheckReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            let tag = if line.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {}: {}\n", line.name, line.detail));
        }
        out.push_str(&format!(
            "check {}\n",
            if self.passed { "passed" } else { "FAILED" }
        ));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain struct serializes")
    }
}

fn push(lines: &mut Vec<CheckLine>, name: impl Into<String>, detail: String, pass: bool) {
    lines.push(CheckLine {
        name: name.into(),
        detail,
        pass,
    });
}

/// Runs the oracle suite: tangent family summary, Futaki values of the
/// basis directions, and the three-route comparison of `phi` and the
/// Euler sum at the origin and at seeded random tangent fields.
pub fn run_check(p: &HomogeneousPolynomial, opts: &CheckOptions) -> Result<CheckReport> {
    let n = p.ambient_dim();
    let d = p.degree();
    let s = p.chern_scale();
    let ctl = SeriesControl::new(n, d)
        .with_epsilon(opts.series_epsilon)
        .with_max_terms(opts.series_max_terms);
    let mut lines = Vec::new();

    let basis = tangent_field_basis(p, DEFAULT_NULLSPACE_TOL);
    push(
        &mut lines,
        "tangent-family",
        format!("dimension {} (n = {n}, d = {d}, s = {s})", basis.len()),
        true,
    );
    for (j, b) in basis.iter().enumerate() {
        let value = futaki(p, b)?;
        push(
            &mut lines,
            format!("futaki[basis {j}]"),
            format!("F(v_{j}) = {value}"),
            true,
        );
    }

    // test fields: the origin plus seeded random tangent combinations at
    // increasing series magnitudes
    let mut fields = vec![("X = 0".to_string(), DiagonalField::zero(n + 1))];
    if !basis.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for (idx, target) in [0.5f64, 1.5, 3.0].into_iter().enumerate() {
            let coeffs: Vec<f64> = (0..basis.len())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let raw = DiagonalField::combine(&basis, &coeffs);
            let radius = raw.max_norm();
            if radius == 0.0 {
                continue;
            }
            let y_scale = if s == 0.0 { 1.0 } else { s.abs() };
            let x = raw.scale(C64::new(target / (y_scale * radius), 0.0));
            fields.push((format!("X = random tangent #{idx}"), x));
        }
    }

    for (field_idx, (label, x)) in fields.iter().enumerate() {
        let bundle = phi_bundle(x, x, n, &ctl)?;

        if s != 0.0 {
            let dd = phi_divdiff(x, n, d)?;
            let rel = (bundle.phi - dd).norm() / bundle.phi.norm().max(f64::MIN_POSITIVE);
            push(
                &mut lines,
                format!("phi series/divdiff [{label}]"),
                format!("series {} vs divdiff {dd}, rel {rel:.3e}", bundle.phi),
                rel <= CROSS_PATH_RTOL,
            );
        }

        let seed_phi = opts.seed.wrapping_add(1000 + field_idx as u64);
        let est = mc_phi(x, n, d, opts.samples, seed_phi);
        let gap = (est.mean - bundle.phi).norm();
        push(
            &mut lines,
            format!("phi monte-carlo [{label}]"),
            format!(
                "series {} vs mc {} +- {:.3e}, |gap| {gap:.3e}",
                bundle.phi, est.mean, est.stderr
            ),
            gap <= MC_BAND * est.stderr || gap == 0.0,
        );

        let seed_euler = opts.seed.wrapping_add(2000 + field_idx as u64);
        let est = mc_euler(x, x, n, d, opts.samples, seed_euler);
        let gap = (est.mean - bundle.euler).norm();
        push(
            &mut lines,
            format!("euler monte-carlo [{label}]"),
            format!(
                "series {} vs mc {} +- {:.3e}, |gap| {gap:.3e}",
                bundle.euler, est.mean, est.stderr
            ),
            gap <= MC_BAND * est.stderr || gap == 0.0,
        );
    }

    let passed = lines.iter().all(|l| l.pass);
    Ok(CheckReport { lines, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    #[test]
    fn check_passes_on_quadric() {
        let p = parse_polynomial("Z0*Z3 + Z1*Z2", 3).unwrap();
        let opts = CheckOptions {
            samples: 20_000,
            ..CheckOptions::default()
        };
        let report = run_check(&p, &opts).unwrap();
        assert!(report.passed, "{}", report.render_text());
    }

    #[test]
    fn check_is_deterministic() {
        let p = parse_polynomial("Z0^2 + Z1*Z2 + Z2*Z3", 3).unwrap();
        let opts = CheckOptions {
            samples: 5_000,
            seed: 42,
            ..CheckOptions::default()
        };
        let a = run_check(&p, &opts).unwrap();
        let b = run_check(&p, &opts).unwrap();
        assert_eq!(a.render_text(), b.render_text());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn check_handles_empty_family() {
        let p = parse_polynomial("Z0^3 + Z1^3 + Z2^3 + Z3^3", 3).unwrap();
        let opts = CheckOptions {
            samples: 5_000,
            ..CheckOptions::default()
        };
        let report = run_check(&p, &opts).unwrap();
        assert!(report.passed, "{}", report.render_text());
    }
}
