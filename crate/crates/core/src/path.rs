//! Smooth random paths that the zero counters can scan.

/// A real-analytic path `t -> Y(t)` with cheap derivatives.
pub trait SmoothPath: Sync {
    /// k-th derivative at `t`.
    fn derivative(&self, t: f64, k: u32) -> f64;

    fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// k-th derivative at `lo + i * step` for `i in 0..count`.
    fn eval_uniform(&self, lo: f64, step: f64, count: usize, k: u32) -> Vec<f64> {
        (0..count)
            .map(|i| self.derivative(lo + i as f64 * step, k))
            .collect()
    }

    /// Upper bound on `sup_t |Y^(k)(t)|`.
    fn amplitude_bound(&self, k: u32) -> f64;
}

/// Rotate the in-phase/quadrature pair `(p, q)` by `k * pi / 2`:
/// returns `p cos(k pi/2) + q sin(k pi/2)`.
#[inline]
pub(crate) fn quarter_turn(p: f64, q: f64, k: u32) -> f64 {
    match k % 4 {
        0 => p,
        1 => q,
        2 => -p,
        _ => -q,
    }
}

/// Number of recurrence steps between exact re-anchoring of a rotating phasor.
pub(crate) const REANCHOR: usize = 32;
