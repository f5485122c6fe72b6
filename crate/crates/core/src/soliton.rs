//! Candidate soliton field search.
//!
//! A Kähler-Ricci soliton with field `X*` forces `F_{X*}(v) = 0` for every
//! holomorphic `v`, so the candidate is the root of the map
//! `c -> (F_{X(c)}(v_1), ..., F_{X(c)}(v_m))` with `X(c) = sum_j c_j v_j`
//! over the orthonormal tangent-family basis. The search stays in real
//! coefficients: the soliton field lies in a real torus direction.
//!
//! Damped Newton with a central finite-difference Jacobian, starting at
//! `c = 0`. Trial steps that fail to decrease the residual (or wander into
//! territory where the series or sigma degenerate) are halved. An empty
//! family is not an error: the only candidate is `X* = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hfuncs::{SeriesControl, DEFAULT_EPSILON, DEFAULT_MAX_TERMS};
use crate::invariant::tian_zhu_with_tol;
use crate::poly::{
    tangent_field_basis, DiagonalField, HomogeneousPolynomial, DEFAULT_NULLSPACE_TOL,
    DEFAULT_TANGENCY_TOL,
};

/// Default residual tolerance for [`solve_soliton`].
pub const DEFAULT_SOLITON_TOL: f64 = 1e-10;

/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 50;

/// Imaginary parts of the invariant on real inputs must stay below this.
const IMAG_TOL: f64 = 1e-10;

/// Solver knobs beyond the spec-level `(tol, max_iter)` pair.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Convergence threshold on `max_j |F_{X(c)}(v_j)|`.
    pub tol: f64,
    /// Cap on accepted Newton steps.
    pub max_iter: usize,
    /// Central-difference step per coordinate for the Jacobian.
    pub fd_step: f64,
    /// Step halvings allowed before giving up on a Newton direction.
    pub max_halvings: u32,
    pub series_epsilon: f64,
    pub series_max_terms: usize,
    pub tangency_tol: f64,
    pub nullspace_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SOLITON_TOL,
            max_iter: DEFAULT_MAX_ITER,
            fd_step: 1e-6,
            max_halvings: 30,
            series_epsilon: DEFAULT_EPSILON,
            series_max_terms: DEFAULT_MAX_TERMS,
            tangency_tol: DEFAULT_TANGENCY_TOL,
            nullspace_tol: DEFAULT_NULLSPACE_TOL,
        }
    }
}

/// Outcome of the soliton search.
#[derive(Debug, Clone)]
pub struct SolitonResult {
    /// The candidate field (real coefficients).
    pub x_star: DiagonalField,
    /// `max_j |F_{X*}(v_j)|` at the returned iterate.
    pub residual: f64,
    /// Accepted Newton steps.
    pub iterations: usize,
    /// Whether `residual <= tol` was reached.
    pub converged: bool,
}

#[derive(Serialize)]
struct SolitonJson {
    x_star: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

impl SolitonResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SolitonJson {
            x_star: self.x_star.coeffs().iter().map(|c| c.re).collect(),
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
        })
        .expect("plain struct serializes")
    }
}

/// Evaluates the invariant in every basis direction at `X(c)`, checking
/// that the imaginary parts vanish (real polynomial data and real `c`
/// make the map real).
pub fn invariant_map(
    p: &HomogeneousPolynomial,
    c: &[f64],
    basis: &[DiagonalField],
    ctl: &SeriesControl,
) -> Result<Vec<f64>> {
    assert_eq!(c.len(), basis.len(), "coefficient/basis length mismatch");
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let x = DiagonalField::combine(basis, c);
    let mut values = Vec::with_capacity(basis.len());
    for v in basis {
        let report = tian_zhu_with_tol(p, v, &x, ctl, DEFAULT_TANGENCY_TOL)?;
        if report.value.im.abs() > IMAG_TOL * report.value.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidual(report.value.im.abs()));
        }
        values.push(report.value.re);
    }
    Ok(values)
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm_l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Finds the candidate soliton field with default solver options.
pub fn solve_soliton(
    p: &HomogeneousPolynomial,
    tol: f64,
    max_iter: usize,
) -> Result<SolitonResult> {
    let opts = SolverOptions {
        tol,
        max_iter,
        ..SolverOptions::default()
    };
    solve_soliton_traced(p, &opts).map(|(result, _)| result)
}

/// Full solver: also returns the Euclidean residual norms of the accepted
/// iterates, starting with the initial point (the damping contract makes
/// the sequence non-increasing).
pub fn solve_soliton_traced(
    p: &HomogeneousPolynomial,
    opts: &SolverOptions,
) -> Result<(SolitonResult, Vec<f64>)> {
    let basis = tangent_field_basis(p, opts.nullspace_tol);
    let ctl = SeriesControl::new(p.ambient_dim(), p.degree())
        .with_epsilon(opts.series_epsilon)
        .with_max_terms(opts.series_max_terms);
    let m = basis.len();
    if m == 0 {
        let result = SolitonResult {
            x_star: DiagonalField::zero(p.ambient_dim() + 1),
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
        return Ok((result, vec![0.0]));
    }

    let mut c = vec![0.0f64; m];
    let mut residual = invariant_map(p, &c, &basis, &ctl)?;
    let mut history = vec![norm_l2(&residual)];
    let mut iterations = 0usize;
    let mut converged = norm_inf(&residual) <= opts.tol;

    while !converged && iterations < opts.max_iter {
        // central finite-difference Jacobian, one column per coordinate
        let mut jacobian = DMatrix::<f64>::zeros(m, m);
        let mut jacobian_ok = true;
        for j in 0..m {
            let mut forward = c.clone();
            forward[j] += opts.fd_step;
            let mut backward = c.clone();
            backward[j] -= opts.fd_step;
            let (fp, fm) = match (
                invariant_map(p, &forward, &basis, &ctl),
                invariant_map(p, &backward, &basis, &ctl),
            ) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    jacobian_ok = false;
                    break;
                }
            };
            for i in 0..m {
                jacobian[(i, j)] = (fp[i] - fm[i]) / (2.0 * opts.fd_step);
            }
        }
        if !jacobian_ok {
            break;
        }
        let rhs = DVector::from_iterator(m, residual.iter().map(|&r| -r));
        let Some(step) = jacobian.lu().solve(&rhs) else {
            break; // singular Jacobian: report the best iterate honestly
        };

        // damping: halve until the Euclidean residual norm decreases
        let base_norm = norm_l2(&residual);
        let mut alpha = 1.0f64;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = c
                .iter()
                .enumerate()
                .map(|(j, &cj)| cj + alpha * step[j])
                .collect();
            // errors at a trial point (series budget, sigma zero) mean the
            // step overshot; treat them like a non-decreasing residual
            if let Ok(trial_residual) = invariant_map(p, &trial, &basis, &ctl) {
                if norm_l2(&trial_residual) < base_norm {
                    accepted = Some((trial, trial_residual));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((next_c, next_residual)) = accepted else {
            break; // no decrease found along this direction
        };
        c = next_c;
        residual = next_residual;
        iterations += 1;
        history.push(norm_l2(&residual));
        converged = norm_inf(&residual) <= opts.tol;
    }

    let result = SolitonResult {
        x_star: DiagonalField::combine(&basis, &c),
        residual: norm_inf(&residual),
        iterations,
        converged,
    };
    Ok((result, history))
}
