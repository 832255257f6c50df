//! Kac regularized zero count
//! `Z_delta(I) = (1/(2 delta)) int_I 1{|Y(t)| <= delta} |Y'(t)| dt`.

use super::scan::{crossings, ScanOptions};
use crate::error::{Error, Result};
use crate::path::SmoothPath;
use crate::quad::{integrate, QuadOptions};

/// Absolute tolerance on the returned estimate.
pub const KAC_ABS_TOL: f64 = 1e-6;

/// The integration domain is split at every solution of `Y = +-delta` (the
/// indicator's jumps) and every critical point (the kinks of `|Y'|`), so each
/// piece is either fully inside or fully outside the band and the integrand
/// is smooth on it.
pub fn kac_estimate<P: SmoothPath + ?Sized>(path: &P, lo: f64, hi: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let opts = ScanOptions::default();
    let mut cuts = vec![lo, hi];
    cuts.extend(crossings(path, lo, hi, 0, delta, &opts).roots);
    cuts.extend(crossings(path, lo, hi, 0, -delta, &opts).roots);
    cuts.extend(crossings(path, lo, hi, 1, 0.0, &opts).roots);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let pieces = cuts.len() - 1;
    let quad = QuadOptions {
        abs_tol: 2.0 * delta * KAC_ABS_TOL / pieces as f64,
        rel_tol: 0.0,
        max_intervals: 200,
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        if path.value(0.5 * (u + v)).abs() > delta {
            continue;
        }
        total += integrate(|t| path.derivative(t, 1).abs(), u, v, quad).value;
    }
    Ok(total / (2.0 * delta))
}
