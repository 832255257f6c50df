//! Sample paths of the centered stationary process `W` with covariance
//! `sc(t - s) = sin(t - s) / (t - s)`.
//!
//! Two independent constructions bound each other:
//! * [`SpectralPath`]: random frequencies from the flat spectral density on
//!   `[-1, 1]`, giving a smooth path that can be scanned like `X_N`;
//! * [`GridPath`]: exact Gaussian values on a finite grid by Cholesky
//!   factorization of the sinc covariance.

use std::sync::Arc;

use serde::Serialize;

use crate::coeffs::RngStream;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};
use crate::path::{quarter_turn, SmoothPath, REANCHOR};
use crate::trigpoly::kernel_sc;
use crate::zerocount::{count_scan, ScanOptions, ZeroReport};

pub const DEFAULT_FREQUENCIES: usize = 512;

/// `W(t) ~ M^{-1/2} sum_k [A_k cos(l_k t) + B_k sin(l_k t)]` with
/// `l_k ~ U[0, 1]` and `A_k, B_k ~ N(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralPath {
    freqs: Vec<f64>,
    coeff_a: Vec<f64>,
    coeff_b: Vec<f64>,
}

impl SpectralPath {
    pub fn new(freqs: Vec<f64>, coeff_a: Vec<f64>, coeff_b: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != coeff_a.len() || freqs.len() != coeff_b.len() {
            return Err(Error::InvalidInput(
                "spectral path needs equal, nonzero numbers of frequencies and coefficients".into(),
            ));
        }
        Ok(Self {
            freqs,
            coeff_a,
            coeff_b,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    fn scale(&self) -> f64 {
        1.0 / (self.freqs.len() as f64).sqrt()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.freqs
            .iter()
            .zip(&self.coeff_a)
            .zip(&self.coeff_b)
            .map(|((&l, &a), &b)| (l, a, b))
    }
}

impl SmoothPath for SpectralPath {
    fn derivative(&self, t: f64, k: u32) -> f64 {
        let (mut p, mut q) = (0.0, 0.0);
        for (l, a, b) in self.terms() {
            let w = l.powi(k as i32);
            let (s, c) = (l * t).sin_cos();
            p += w * (a * c + b * s);
            q += w * (b * c - a * s);
        }
        self.scale() * quarter_turn(p, q, k)
    }

    /// Phasors advance along the grid by complex multiplication, re-anchored
    /// every few steps.
    fn eval_uniform(&self, lo: f64, step: f64, count: usize, k: u32) -> Vec<f64> {
        let mut out = vec![0.0; count];
        let (ck, sk) = (quarter_turn(1.0, 0.0, k), quarter_turn(0.0, 1.0, k));
        for (l, a, b) in self.terms() {
            let w = l.powi(k as i32) * self.scale();
            // c_k (a cos + b sin) + s_k (b cos - a sin)
            let ca = w * (ck * a + sk * b);
            let cb = w * (ck * b - sk * a);
            let (sd, cd) = (l * step).sin_cos();
            let (mut s, mut c) = (0.0, 0.0);
            for (i, o) in out.iter_mut().enumerate() {
                if i % REANCHOR == 0 {
                    (s, c) = (l * (lo + i as f64 * step)).sin_cos();
                } else {
                    (c, s) = (c * cd - s * sd, s * cd + c * sd);
                }
                *o += ca * c + cb * s;
            }
        }
        out
    }

    fn amplitude_bound(&self, k: u32) -> f64 {
        self.scale()
            * self
                .terms()
                .map(|(l, a, b)| l.powi(k as i32) * (a.abs() + b.abs()))
                .sum::<f64>()
    }
}

pub fn sample_spectral(m: usize, stream: &mut RngStream) -> Result<SpectralPath> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one frequency".into()));
    }
    let freqs = (0..m).map(|_| stream.uniform()).collect();
    let coeff_a = (0..m).map(|_| stream.normal()).collect();
    let coeff_b = (0..m).map(|_| stream.normal()).collect();
    SpectralPath::new(freqs, coeff_a, coeff_b)
}

/// Zeros of a spectral path, by the same scan that counts zeros of `X_N`.
pub fn count_zeros_w(
    path: &SpectralPath,
    lo: f64,
    hi: f64,
    opts: &ScanOptions,
) -> Result<ZeroReport> {
    count_scan(path, lo, hi, opts)
}

pub const MIN_GRID_GAP: f64 = 1e-6;
const MAX_JITTER: f64 = 1e-10;
const GRID_MIN_PIVOT: f64 = 1e-14;

/// Cholesky factor of the sinc covariance on a grid, shared by every path
/// drawn on that grid.
#[derive(Clone, Debug)]
pub struct GridSampler {
    grid: Arc<Vec<f64>>,
    chol: Arc<Cholesky>,
    jitter: f64,
}

impl GridSampler {
    pub fn new(grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidInput("empty grid".into()));
        }
        if grid.windows(2).any(|w| !(w[1] - w[0] >= MIN_GRID_GAP)) {
            return Err(Error::InvalidInput(format!(
                "grid must be increasing with gaps of at least {MIN_GRID_GAP:e}"
            )));
        }
        let cov = SymMatrix::from_fn(grid.len(), |i, j| kernel_sc(grid[i] - grid[j], 0));
        let mut last = None;
        for jitter in [0.0, 1e-13, 1e-12, 1e-11, MAX_JITTER] {
            match Cholesky::factor(&cov, jitter, GRID_MIN_PIVOT) {
                Ok(chol) => {
                    return Ok(Self {
                        grid: Arc::new(grid.to_vec()),
                        chol: Arc::new(chol),
                        jitter,
                    })
                }
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn sample(&self, stream: &mut RngStream) -> GridPath {
        let z: Vec<f64> = (0..self.grid.len()).map(|_| stream.normal()).collect();
        GridPath {
            grid: Arc::clone(&self.grid),
            values: self.chol.mul_lower(&z),
            chol: Arc::clone(&self.chol),
            jitter: self.jitter,
        }
    }
}

/// Exact Gaussian values of `W` on a grid.
#[derive(Clone, Debug)]
pub struct GridPath {
    pub grid: Arc<Vec<f64>>,
    pub values: Vec<f64>,
    pub chol: Arc<Cholesky>,
    pub jitter: f64,
}

impl GridPath {
    /// Strict sign changes between consecutive grid values. The path
    /// between grid points is unknown, so nothing finer is claimed.
    pub fn sign_changes(&self) -> usize {
        self.values
            .windows(2)
            .filter(|w| (w[0] < 0.0 && w[1] > 0.0) || (w[0] > 0.0 && w[1] < 0.0))
            .count()
    }
}

/// Factor and draw once; use [`GridSampler`] to draw many paths on one grid.
pub fn sample_grid(grid: &[f64], stream: &mut RngStream) -> Result<GridPath> {
    Ok(GridSampler::new(grid)?.sample(stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_stream;
    use std::f64::consts::PI;

    #[test]
    fn cosine_reduction() {
        let mut freqs = vec![0.3; 4];
        freqs[0] = 1.0;
        let p = SpectralPath::new(freqs, vec![2.0, 0.0, 0.0, 0.0], vec![0.0; 4]).unwrap();
        // (1/2) * 2 cos t
        assert!((p.value(0.4) - 0.4f64.cos()).abs() < 1e-15);
        let r = count_zeros_w(&p, 0.0, 2.0 * PI, &ScanOptions::default()).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.roots[0] - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let mut s = make_stream(3, 0);
        let p = sample_spectral(256, &mut s).unwrap();
        for k in 0..3 {
            let fast = p.eval_uniform(-3.0, 0.05, 400, k);
            for (i, v) in fast.iter().enumerate() {
                let t = -3.0 + i as f64 * 0.05;
                assert!((v - p.derivative(t, k)).abs() < 1e-12 * p.amplitude_bound(k));
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut s = make_stream(4, 0);
        let p = sample_spectral(64, &mut s).unwrap();
        let h = 1e-5;
        let fd = (p.value(1.1 + h) - p.value(1.1 - h)) / (2.0 * h);
        assert!((p.derivative(1.1, 1) - fd).abs() < 1e-8);
    }

    #[test]
    fn grid_far_apart_is_uncorrelated_in_covariance() {
        let g = GridSampler::new(&[0.0, 1e5]).unwrap();
        assert_eq!(g.jitter(), 0.0);
        // L[1][0] is the correlation for a unit-variance pair
        assert!(g.chol.l(1, 0).abs() < 2e-5);
    }

    #[test]
    fn dense_grid_needs_bounded_jitter() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let g = GridSampler::new(&grid).unwrap();
        assert!(g.jitter() <= 1e-10);
    }

    #[test]
    fn invalid_grids() {
        let mut s = make_stream(1, 0);
        assert!(sample_grid(&[], &mut s).is_err());
        assert!(sample_grid(&[0.0, 1e-7], &mut s).is_err());
        assert!(sample_grid(&[1.0, 0.0], &mut s).is_err());
        assert!(sample_spectral(0, &mut s).is_err());
    }

    #[test]
    fn sign_changes_count() {
        let g = GridPath {
            grid: Arc::new(vec![0.0, 1.0, 2.0, 3.0]),
            values: vec![1.0, -1.0, -2.0, 0.5],
            chol: Arc::new(Cholesky::factor(&SymMatrix::from_fn(1, |_, _| 1.0), 0.0, 0.0).unwrap()),
            jitter: 0.0,
        };
        assert_eq!(g.sign_changes(), 2);
    }
}
