//! The normalized random trigonometric polynomial
//! `X_N(t) = N^{-1/2} sum_{n=1}^N [a_n cos(n t / N) + b_n sin(n t / N)]`.

pub(crate) mod cov;
mod kernel;

pub use cov::{build_cov, CovMatrices};
pub use kernel::{kernel_rn, kernel_sc, normalized_power_sum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{quarter_turn, SmoothPath, REANCHOR};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TrigPoly {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient vectors must have equal nonzero length (got {} and {})",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    /// Split `(a_1..a_n, b_1..b_n)` as produced by `sample_coeffs`.
    pub fn from_interleaved(coeffs: &[f64]) -> Result<Self> {
        if !coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("odd number of coefficients".into()));
        }
        let (a, b) = coeffs.split_at(coeffs.len() / 2);
        Self::new(a.to_vec(), b.to_vec())
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&c| c == 0.0)
    }

    /// `2 pi N`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.degree() as f64
    }

    fn scale(&self) -> f64 {
        1.0 / (self.degree() as f64).sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivative(t, 0)
    }

    /// k-th derivative by phase shift: each harmonic contributes
    /// `(n/N)^k [a_n cos(n t/N + k pi/2) + b_n sin(n t/N + k pi/2)]`.
    /// Every harmonic's phase is evaluated directly.
    pub fn eval_derivative(&self, t: f64, k: u32) -> f64 {
        let nf = self.degree() as f64;
        let (mut p, mut q) = (0.0, 0.0);
        for (i, (&a, &b)) in self.a.iter().zip(&self.b).enumerate() {
            let freq = (i + 1) as f64 / nf;
            let w = freq.powi(k as i32);
            let (s, c) = (freq * t).sin_cos();
            p += w * (a * c + b * s);
            q += w * (b * c - a * s);
        }
        self.scale() * quarter_turn(p, q, k)
    }

    /// Harmonic recurrence at one point: the phasor `e^{i n t/N}` is advanced
    /// by complex multiplication and re-anchored every few harmonics.
    fn eval_recurrence(&self, t: f64, k: u32) -> f64 {
        let nf = self.degree() as f64;
        let theta = t / nf;
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (c1, s1);
        let (mut p, mut q) = (0.0, 0.0);
        for (i, (&a, &b)) in self.a.iter().zip(&self.b).enumerate() {
            if i > 0 {
                if i % REANCHOR == 0 {
                    (s, c) = ((i + 1) as f64 * theta).sin_cos();
                } else {
                    (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
                }
            }
            let w = match k {
                0 => 1.0,
                1 => (i + 1) as f64 / nf,
                _ => ((i + 1) as f64 / nf).powi(k as i32),
            };
            p += w * (a * c + b * s);
            q += w * (b * c - a * s);
        }
        self.scale() * quarter_turn(p, q, k)
    }

    /// k-th derivative at every grid point.
    pub fn eval_batch(&self, grid: &[f64], k: u32) -> Vec<f64> {
        grid.iter().map(|&t| self.eval_recurrence(t, k)).collect()
    }

    /// `N^{-1/2} sum (n/N)^k (|a_n| + |b_n|)`, which bounds `|X_N^(k)|`.
    pub fn amplitude(&self, k: u32) -> f64 {
        let nf = self.degree() as f64;
        self.scale()
            * self
                .a
                .iter()
                .zip(&self.b)
                .enumerate()
                .map(|(i, (a, b))| ((i + 1) as f64 / nf).powi(k as i32) * (a.abs() + b.abs()))
                .sum::<f64>()
    }
}

impl SmoothPath for TrigPoly {
    fn derivative(&self, t: f64, k: u32) -> f64 {
        self.eval_recurrence(t, k)
    }

    fn eval_uniform(&self, lo: f64, step: f64, count: usize, k: u32) -> Vec<f64> {
        (0..count)
            .map(|i| self.eval_recurrence(lo + i as f64 * step, k))
            .collect()
    }

    fn amplitude_bound(&self, k: u32) -> f64 {
        self.amplitude(k)
    }
}

/// Variance of `X_N^(k)(t)` under unit-variance coefficients:
/// `(1/N) sum_{n=1}^N (n/N)^{2k}`.
pub fn derivative_variance(n: usize, k: u32) -> f64 {
    normalized_power_sum(n, 2 * k)
}
