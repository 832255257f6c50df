//! Kac–Rice moments of the number of zeros of the sinc process `W`.
//!
//! With `Sigma(t)` the covariance of `(W(t_1..t_m); W'(t_1..t_m))`,
//! `E[Z^[m]] = int_{I^m} E[prod |W'(t_i)| | W(t) = 0] gamma_t(0) dt`.
//! Near the diagonals the integrand degenerates, so every integral here
//! skips the band `{|t_i - t_j| < eps}` and reports that it did.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::coeffs::RngStream;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};
use crate::quad::{integrate_2d, QuadOptions};
use crate::trigpoly::cov::{block_covariance, check_separation};
use crate::trigpoly::kernel_sc;

pub const MIN_GAP: f64 = 1e-6;
const SIGMA11_MIN_PIVOT: f64 = 1e-15;
pub const MAX_ORDER: usize = 4;
pub const MAX_REJECTION: f64 = 0.99;

/// Expected number of zeros of `W` on `[lo, hi]`.
pub fn mean_zeros(lo: f64, hi: f64) -> f64 {
    (hi - lo) * (1.0f64 / 3.0).sqrt() / PI
}

/// Law of `W'(t)` given `W(t) = 0`, plus the density of `W(t)` at zero.
#[derive(Clone, Debug)]
pub struct ConditionalGaussian {
    pub t: Vec<f64>,
    pub cond_cov: SymMatrix,
    pub marginal_density_at_zero: f64,
}

pub fn conditional_at_zeros(t: &[f64]) -> Result<ConditionalGaussian> {
    check_separation(t, MIN_GAP)?;
    let m = t.len();
    let sigma = block_covariance(t, kernel_sc);
    let s11 = SymMatrix::from_fn(m, |i, j| sigma.get(i, j));
    let chol = Cholesky::factor(&s11, 0.0, SIGMA11_MIN_PIVOT)?;
    // X = L^{-1} Sigma12, cond = Sigma22 - X^T X
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut c: Vec<f64> = (0..m).map(|i| sigma.get(i, m + j)).collect();
            chol.forward(&mut c);
            c
        })
        .collect();
    let cond_cov = SymMatrix::from_fn(m, |i, j| {
        let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
        sigma.get(m + i, m + j) - dot
    });
    let log_density = -0.5 * m as f64 * (2.0 * PI).ln() - 0.5 * chol.log_det();
    Ok(ConditionalGaussian {
        t: t.to_vec(),
        cond_cov,
        marginal_density_at_zero: log_density.exp(),
    })
}

/// `E|Y_1 Y_2|` for a centered Gaussian pair with covariance `cov`.
pub fn expected_abs_product_2(cov: &SymMatrix) -> f64 {
    let (v1, v2) = (cov.get(0, 0).max(0.0), cov.get(1, 1).max(0.0));
    let s = (v1 * v2).sqrt();
    if s == 0.0 {
        return 0.0;
    }
    let rho = (cov.get(0, 1) / s).clamp(-1.0, 1.0);
    s * (2.0 / PI) * ((1.0 - rho * rho).sqrt() + rho * rho.asin())
}

/// Second-order intensity `rho_2(t1, t2)` of the zeros of `W`.
pub fn two_point_intensity(t1: f64, t2: f64) -> Result<f64> {
    let c = conditional_at_zeros(&[t1, t2])?;
    Ok(c.marginal_density_at_zero * expected_abs_product_2(&c.cond_cov))
}

/// The set `{t : |t_i - t_j| < epsilon for some i != j}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagonalExclusion {
    pub epsilon: f64,
    pub m: usize,
}

impl DiagonalExclusion {
    pub fn excludes(&self, t: &[f64]) -> bool {
        (0..t.len()).any(|i| (0..i).any(|j| (t[i] - t[j]).abs() < self.epsilon))
    }
}

pub const TRUNCATION_CAVEAT: &str =
    "the excluded diagonal band contributes O(epsilon^(1/5)) with an unknown constant; not included";

#[derive(Clone, Debug, Serialize)]
pub struct SecondMoment {
    pub value: f64,
    pub error_estimate: f64,
    pub epsilon: f64,
    pub interval: (f64, f64),
    /// Area of the part of `I^2` that was skipped.
    pub excluded_area: f64,
    /// False if the quadrature budget ran out; `value` is then partial.
    pub converged: bool,
    pub caveat: &'static str,
}

pub const SECOND_MOMENT_REL_TOL: f64 = 1e-6;

/// `int int_{I^2, |t1 - t2| >= eps} rho_2`, by iterated adaptive quadrature
/// over `t2 >= t1 + eps` and symmetry.
pub fn second_factorial_moment(lo: f64, hi: f64, epsilon: f64) -> Result<SecondMoment> {
    let len = hi - lo;
    if !(epsilon > 0.0 && epsilon < len / 4.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < epsilon < |I|/4, got epsilon = {epsilon} on an interval of length {len}"
        )));
    }
    let failure = RefCell::new(None);
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: SECOND_MOMENT_REL_TOL,
        max_intervals: 2000,
    };
    let r = integrate_2d(
        |x, y| match two_point_intensity(x, y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        lo,
        hi - epsilon,
        |x| x + epsilon,
        |_| hi,
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(SecondMoment {
        value: 2.0 * r.value,
        error_estimate: 2.0 * r.error,
        epsilon,
        interval: (lo, hi),
        excluded_area: len * len - (len - epsilon) * (len - epsilon),
        converged: r.converged,
        caveat: TRUNCATION_CAVEAT,
    })
}

/// Monte Carlo estimate of `E prod |Y_i|`, `Y ~ N(0, cov)`, from `n` draws.
pub fn expected_abs_product(cov: &SymMatrix, n: usize, stream: &mut RngStream) -> Result<f64> {
    let scale = (0..cov.dim()).map(|i| cov.get(i, i)).fold(0.0f64, f64::max);
    abs_product_mc(cov, scale, n, stream)
}

fn abs_product_mc(cov: &SymMatrix, scale: f64, n: usize, stream: &mut RngStream) -> Result<f64> {
    let chol = psd_factor(cov, scale)?;
    let m = cov.dim();
    let mut z = vec![0.0; m];
    let mut acc = 0.0;
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = stream.normal());
        acc += chol.mul_lower(&z).iter().map(|y| y.abs()).product::<f64>();
    }
    Ok(acc / n as f64)
}

/// Factor of a covariance that may be singular up to rounding. For points
/// clustered within a few `eps` the Schur complement loses about 1e-12 of
/// `scale` (the unconditional variance) to cancellation, so jitter relative
/// to `scale` is allowed.
fn psd_factor(cov: &SymMatrix, scale: f64) -> Result<Cholesky> {
    let mut last = None;
    for rel in [0.0, 1e-14, 1e-12, 1e-10] {
        match Cholesky::factor(cov, rel * scale, 0.0) {
            Ok(c) => return Ok(c),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Clone, Debug, Serialize)]
pub struct McMoment {
    pub m: usize,
    pub epsilon: f64,
    pub estimate: f64,
    pub se: f64,
    /// Points of `I^m` drawn, and how many fell outside the band.
    pub draws: usize,
    pub accepted: usize,
    pub rejection_rate: f64,
    /// Mean inner expectation over accepted points.
    pub mean_inner: f64,
    pub caveat: &'static str,
}

/// `E[Z_W(I)^[m]]` restricted to `I^m` minus the `eps` band: uniform points
/// of `I^m`, with `|I|^m * 1{outside band} * gamma_t(0) * E prod |Y_i|`
/// averaged over `n_nodes` draws.
pub fn m_factorial_moment_mc(
    lo: f64,
    hi: f64,
    m: usize,
    epsilon: f64,
    n_nodes: usize,
    n_inner: usize,
    stream: &mut RngStream,
) -> Result<McMoment> {
    if !(2..=MAX_ORDER).contains(&m) {
        return Err(Error::InvalidInput(format!("order must be in 2..={MAX_ORDER}, got {m}")));
    }
    if !(hi > lo) || !(epsilon > 0.0) || n_nodes < 2 || n_inner == 0 {
        return Err(Error::InvalidInput(
            "need lo < hi, epsilon > 0, n_nodes >= 2 and n_inner >= 1".into(),
        ));
    }
    let len = hi - lo;
    let band = DiagonalExclusion { epsilon, m };
    let volume = len.powi(m as i32);
    let mut t = vec![0.0; m];
    let (mut sum, mut sum_sq, mut inner_sum) = (0.0, 0.0, 0.0);
    let mut accepted = 0;
    for _ in 0..n_nodes {
        t.iter_mut().for_each(|v| *v = lo + len * stream.uniform());
        if band.excludes(&t) {
            continue;
        }
        accepted += 1;
        let c = conditional_at_zeros(&t)?;
        let inner = abs_product_mc(&c.cond_cov, kernel_sc(0.0, 2).abs(), n_inner, stream)?;
        inner_sum += inner;
        let g = volume * c.marginal_density_at_zero * inner;
        sum += g;
        sum_sq += g * g;
    }
    let rejection_rate = 1.0 - accepted as f64 / n_nodes as f64;
    if rejection_rate > MAX_REJECTION {
        return Err(Error::EpsilonTooLarge {
            rate: rejection_rate,
        });
    }
    let n = n_nodes as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(McMoment {
        m,
        epsilon,
        estimate: mean,
        se: (var / n).sqrt(),
        draws: n_nodes,
        accepted,
        rejection_rate,
        mean_inner: if accepted > 0 { inner_sum / accepted as f64 } else { 0.0 },
        caveat: TRUNCATION_CAVEAT,
    })
}

/// One-dimensional reduction for stationary processes:
/// `2 int_eps^L (L - u) rho_2(0, u) du`. Used as a cross-check.
pub fn second_factorial_moment_stationary(lo: f64, hi: f64, epsilon: f64) -> Result<f64> {
    let len = hi - lo;
    let failure = RefCell::new(None);
    let r = crate::quad::integrate(
        |u| match two_point_intensity(0.0, u) {
            Ok(v) => (len - u) * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        epsilon,
        len,
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 2000,
        },
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(2.0 * r.value),
    }
}
