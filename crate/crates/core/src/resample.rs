//! Uniform resamples of a generating curve and fourth-order finite differences.
//!
//! Everything here recovers derivatives from sampled data only, so it can check
//! identities independently of the right-hand side used for integration.

use std::ops::Range;

use crate::error::{Error, Result};

/// Samples at `tau_i = i * step`, `i = 0..=n`.
#[derive(Debug, Clone)]
pub struct Resample {
    pub c_o: f64,
    pub step: f64,
    pub tau: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Resample {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn require_points(&self, need: usize) -> Result<()> {
        if self.len() < need {
            return Err(Error::TooFewSamples {
                got: self.len(),
                need,
            });
        }
        Ok(())
    }

    /// Indices with `tau` in `[lo, hi] * ell`, trimmed to leave room for the
    /// five-point stencils.
    pub fn window(&self, lo: f64, hi: f64) -> Range<usize> {
        let n = self.len() - 1;
        let start = ((lo * n as f64).ceil() as usize).max(2);
        let end = ((hi * n as f64).floor() as usize).min(n - 2);
        start..end + 1
    }

    /// First derivative in `tau`.
    pub fn d1(&self, u: &[f64], i: usize) -> f64 {
        (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * self.step)
    }

    /// Second derivative in `tau`.
    pub fn d2(&self, u: &[f64], i: usize) -> f64 {
        (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2])
            / (12.0 * self.step * self.step)
    }

    /// `φ_ς = −φ_τ`, from differences of the sampled angle.
    pub fn phi_sigma(&self, i: usize) -> f64 {
        -self.d1(&self.phi, i)
    }

    /// Mean curvature; at the two ends on each side, where the stencil does
    /// not fit, it is taken from the profile system instead.
    pub fn mean_curvature(&self, i: usize) -> f64 {
        let sin_over_r = if self.r[i] == 0.0 {
            1.0 / self.z[i] + self.c_o
        } else {
            self.phi[i].sin() / self.r[i]
        };
        let ps = if i >= 2 && i + 2 < self.len() {
            self.phi_sigma(i)
        } else if self.r[i] == 0.0 {
            sin_over_r
        } else {
            crate::profile::phi_sigma(self.c_o, self.r[i], self.z[i], self.phi[i])
        };
        -0.5 * (ps + sin_over_r)
    }

    pub fn gauss_curvature(&self, i: usize) -> f64 {
        self.phi_sigma(i) * self.phi[i].sin() / self.r[i]
    }

    /// `‖dν‖² − 2 cos²φ / z²`.
    pub fn potential(&self, i: usize) -> f64 {
        let ps = self.phi_sigma(i);
        let sr = self.phi[i].sin() / self.r[i];
        let c = self.phi[i].cos();
        sr * sr + ps * ps - 2.0 * c * c / (self.z[i] * self.z[i])
    }

    /// The Jacobi operator applied to the sampled function `u` at index `i`.
    pub fn apply_jacobi(&self, u: &[f64], i: usize) -> f64 {
        let drift = -self.phi[i].cos() / self.r[i] + 2.0 * self.phi[i].sin() / self.z[i];
        self.d2(u, i) + drift * self.d1(u, i) + self.potential(i) * u[i]
    }
}
