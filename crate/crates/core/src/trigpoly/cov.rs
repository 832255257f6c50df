//! Covariance of `(Y(t_1..t_m); Y'(t_1..t_m))` for the sinc limit and for
//! finite `N`.

use serde::Serialize;

use super::kernel::{kernel_rn, kernel_sc};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};

/// Minimum separation between evaluation points.
pub const MIN_SEPARATION: f64 = 1e-9;
/// Smallest squared Cholesky pivot accepted as positive definite.
pub const MIN_PIVOT: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CovMatrices {
    pub t: Vec<f64>,
    /// `2m x 2m`, values first then derivatives.
    #[serde(skip)]
    pub sigma: SymMatrix,
    #[serde(skip)]
    pub gamma_n: Option<SymMatrix>,
    /// Smallest squared pivot of the Cholesky factorization of `sigma`.
    pub min_pivot: f64,
}

/// Assemble the block covariance from a kernel `k(x, order)`:
/// `[k(t_i - t_j), k'(t_j - t_i); k'(t_i - t_j), -k''(t_i - t_j)]`.
pub(crate) fn block_covariance(t: &[f64], kernel: impl Fn(f64, u32) -> f64) -> SymMatrix {
    let m = t.len();
    let mut s = SymMatrix::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            let d = t[i] - t[j];
            s.set(i, j, kernel(d, 0));
            // E[Y(t_i) Y'(t_j)] = d/dt_j k(t_j - t_i)
            s.set(i, m + j, kernel(-d, 1));
            s.set(m + i, j, kernel(d, 1));
            s.set(m + i, m + j, -kernel(d, 2));
        }
    }
    s
}

pub(crate) fn check_separation(t: &[f64], min_gap: f64) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidInput("need at least one time point".into()));
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("time points must be finite".into()));
    }
    for i in 0..t.len() {
        for j in 0..i {
            if (t[i] - t[j]).abs() < min_gap {
                return Err(Error::InvalidInput(format!(
                    "time points {} and {} closer than {min_gap:e}",
                    t[j], t[i]
                )));
            }
        }
    }
    Ok(())
}

/// Sigma for the sinc process (and, if `n` is given, the finite-`N` analogue
/// built from `r_N`). Sigma is certified positive definite by Cholesky.
pub fn build_cov(t: &[f64], n: Option<usize>) -> Result<CovMatrices> {
    check_separation(t, MIN_SEPARATION)?;
    let sigma = block_covariance(t, kernel_sc);
    let chol = Cholesky::factor(&sigma, 0.0, MIN_PIVOT)?;
    let gamma_n = n.map(|n| block_covariance(t, |x, k| kernel_rn(x, n, k)));
    Ok(CovMatrices {
        t: t.to_vec(),
        sigma,
        gamma_n,
        min_pivot: chol.min_pivot(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::derivative_variance;

    #[test]
    fn single_point() {
        let c = build_cov(&[0.0], None).unwrap();
        assert_eq!(c.sigma.get(0, 0), 1.0);
        assert_eq!(c.sigma.get(0, 1), 0.0);
        assert_eq!(c.sigma.get(1, 0), 0.0);
        assert!((c.sigma.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn far_apart_points_decouple() {
        let c = build_cov(&[0.0, 1e5], None).unwrap();
        for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3), (1, 0)] {
            assert!(c.sigma.get(i, j).abs() < 2e-5);
        }
    }

    #[test]
    fn structure_invariants() {
        let t = [0.3, 1.7, 4.0];
        let c = build_cov(&t, Some(50)).unwrap();
        assert_eq!(c.sigma.max_abs_asymmetry(), 0.0);
        let g = c.gamma_n.as_ref().unwrap();
        assert!(g.max_abs_asymmetry() < 1e-15);
        for i in 0..3 {
            assert_eq!(c.sigma.get(i, i), 1.0);
            assert!((c.sigma.get(3 + i, 3 + i) - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(c.sigma.get(i, 3 + i), 0.0);
            assert!((g.get(3 + i, 3 + i) - derivative_variance(50, 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            build_cov(&[1.0, 1.0 + 1e-10], None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn near_coincident_points_are_near_singular() {
        match build_cov(&[0.0, 1e-7], None) {
            Err(Error::NearSingular { pivot, .. }) => assert!(pivot < MIN_PIVOT),
            other => panic!("{other:?}"),
        }
    }
}
