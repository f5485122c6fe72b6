//! Stochastic verification of the series engine.
//!
//! The pushforward of the Fubini-Study volume of `CP^n` under the torus
//! moment map is the uniform measure on the standard simplex
//! `{t_i >= 0, sum t_i = 1}`, which turns the defining integral of `phi`
//! into `phi(X) = E[e^{s <X, t>}]` for `t` uniform on the simplex. The
//! Euler sum `sum_i X^i dphi/dX^i` likewise becomes
//! `s E[<X, t> e^{s <X, t>}]`, and replacing the first factor by `<v, t>`
//! gives the directional derivative.
//!
//! Sampling is exact: normalized independent unit-rate exponentials are
//! uniform on the simplex. A fixed seed gives bit-identical estimates.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::poly::DiagonalField;

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: C64,
    /// Sample standard deviation divided by `sqrt(samples)`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct McJson {
    mean_re: f64,
    mean_im: f64,
    stderr: f64,
    samples: usize,
    seed: u64,
}

impl McEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(McJson {
            mean_re: self.mean.re,
            mean_im: self.mean.im,
            stderr: self.stderr,
            samples: self.samples,
            seed: self.seed,
        })
        .expect("plain struct serializes")
    }
}

/// Streams `samples` evaluations of `f(t)` over uniform simplex points,
/// accumulating mean and scatter by Welford's update.
fn estimate(
    dim: usize,
    samples: usize,
    seed: u64,
    mut f: impl FnMut(&[f64]) -> C64,
) -> McEstimate {
    assert!(samples >= 2, "need at least two samples for a standard error");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = vec![0.0f64; dim];
    let mut mean = C64::new(0.0, 0.0);
    let mut scatter = 0.0f64; // sum of |g - mean|^2
    for k in 1..=samples {
        let mut total = 0.0f64;
        for slot in point.iter_mut() {
            let e: f64 = rng.sample(Exp1);
            *slot = e;
            total += e;
        }
        for slot in point.iter_mut() {
            *slot /= total;
        }
        let g = f(&point);
        let delta = g - mean;
        mean += delta / k as f64;
        scatter += (delta.conj() * (g - mean)).re;
    }
    let variance = (scatter / (samples - 1) as f64).max(0.0);
    McEstimate {
        mean,
        stderr: (variance / samples as f64).sqrt(),
        samples,
        seed,
    }
}

/// Monte-Carlo estimate of `phi(X) = E[e^{s <X, t>}]`.
pub fn mc_phi(x: &DiagonalField, n: usize, d: u32, samples: usize, seed: u64) -> McEstimate {
    assert_eq!(x.len(), n + 1, "field length must be n + 1");
    let s = n as f64 - d as f64 + 1.0;
    let coeffs = x.coeffs().to_vec();
    estimate(n + 1, samples, seed, move |t| {
        let dot: C64 = coeffs.iter().zip(t).map(|(xi, &ti)| xi * ti).sum();
        (dot * s).exp()
    })
}

/// Monte-Carlo estimate of `s E[<v, t> e^{s <X, t>}]`: with `v = X` this is
/// the Euler sum `sum_i X^i dphi/dX^i`, and in general the directional
/// derivative `D_v phi`.
pub fn mc_euler(
    x: &DiagonalField,
    v: &DiagonalField,
    n: usize,
    d: u32,
    samples: usize,
    seed: u64,
) -> McEstimate {
    assert_eq!(x.len(), n + 1, "field length must be n + 1");
    assert_eq!(v.len(), n + 1, "field length must be n + 1");
    let s = n as f64 - d as f64 + 1.0;
    let xc = x.coeffs().to_vec();
    let vc = v.coeffs().to_vec();
    estimate(n + 1, samples, seed, move |t| {
        let dot_x: C64 = xc.iter().zip(t).map(|(xi, &ti)| xi * ti).sum();
        let dot_v: C64 = vc.iter().zip(t).map(|(vi, &ti)| vi * ti).sum();
        dot_v * s * (dot_x * s).exp()
    })
}
