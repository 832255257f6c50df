//! Grid scan with derivative-aware bracketing.
//!
//! The grid step follows from the band limit: after the `t/N` rescaling
//! every harmonic has frequency at most 1, so eight samples per length `pi`
//! resolve each half-oscillation. Inside a cell where the derivative changes
//! sign, the critical point is located first and both monotone halves are
//! bracketed separately, which recovers pairs of close zeros that leave no
//! sign change on the grid.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use super::{Flag, Method, ZeroReport};
use crate::error::{Error, Result};
use crate::path::SmoothPath;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Minimum number of grid cells.
    pub base_points: usize,
    /// Bracket width at which refinement stops; `None` means
    /// `1e-12 * (hi - lo)`.
    pub refine_tol: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            base_points: 64,
            refine_tol: None,
        }
    }
}

/// Relative size (against the amplitude bound) below which a grid value is
/// treated as an exact zero.
const ZERO_RTOL: f64 = 1e-14;
/// Relative size (against the local derivative scale) below which an
/// extremum is reported as a near tangency.
const TANGENCY_RTOL: f64 = 1e-8;
const MAX_REFINE_ITERS: usize = 200;

pub(crate) struct Crossings {
    pub roots: Vec<f64>,
    pub near_tangency: bool,
    pub endpoint: bool,
}

pub(crate) fn grid_cells(lo: f64, hi: f64, base_points: usize) -> usize {
    let len = hi - lo;
    base_points.max((8.0 * len / PI).ceil() as usize)
}

/// Find `t` in `[a, b]` with `f(t) = 0` given `fa`, `fb` of opposite signs.
/// Illinois-modified secant steps; a bisection is forced whenever three
/// steps fail to halve the bracket. Stops when the bracket or the secant
/// step drops below `tol`.
pub(crate) fn refine_bracket(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> f64 {
    debug_assert!(fa * fb < 0.0);
    let mut side = 0i8;
    let mut prev = f64::NAN;
    let mut checkpoint = b - a;
    for iter in 1..=MAX_REFINE_ITERS {
        if (b - a).abs() <= tol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || (x - prev).abs() <= 0.5 * tol {
            return x;
        }
        prev = x;
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if iter % 3 == 0 {
            if b - a > 0.5 * checkpoint {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    return m;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                    fb = fm;
                }
                side = 0;
            }
            checkpoint = b - a;
        }
    }
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

/// Solutions of `Y^(k)(t) = level` on the closed interval `[lo, hi]`.
pub(crate) fn crossings<P: SmoothPath + ?Sized>(
    path: &P,
    lo: f64,
    hi: f64,
    k: u32,
    level: f64,
    opts: &ScanOptions,
) -> Crossings {
    let cells = grid_cells(lo, hi, opts.base_points);
    let step = (hi - lo) / cells as f64;
    let mut f = path.eval_uniform(lo, step, cells + 1, k);
    let mut g = path.eval_uniform(lo, step, cells + 1, k + 1);
    f[cells] = path.derivative(hi, k);
    g[cells] = path.derivative(hi, k + 1);
    for v in f.iter_mut() {
        *v -= level;
    }
    let at = |i: usize| if i == cells { hi } else { lo + i as f64 * step };
    let value = |t: f64| path.derivative(t, k) - level;
    let slope = |t: f64| path.derivative(t, k + 1);

    let ztol = ZERO_RTOL * (path.amplitude_bound(k) + level.abs());
    let rtol = opts.refine_tol.unwrap_or(1e-12 * (hi - lo));
    let sign = |v: f64| -> i8 {
        if v.abs() <= ztol {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    };

    let mut out = Crossings {
        roots: Vec::new(),
        near_tangency: false,
        endpoint: false,
    };
    if sign(f[0]) == 0 {
        out.roots.push(lo);
        out.endpoint = true;
    }
    for i in 0..cells {
        let (a, b) = (at(i), at(i + 1));
        let (fa, fb) = (f[i], f[i + 1]);
        let (ga, gb) = (g[i], g[i + 1]);
        let mut segments: [(f64, f64, f64, f64); 2] = [(a, b, fa, fb), (0.0, 0.0, 0.0, 0.0)];
        let mut nseg = 1;
        if ga * gb < 0.0 {
            let c = refine_bracket(slope, a, b, ga, gb, rtol);
            if c > a && c < b {
                let fc = value(c);
                let local_scale = step * ga.abs().max(gb.abs());
                if fc.abs() <= TANGENCY_RTOL * local_scale {
                    out.near_tangency = true;
                }
                segments = [(a, c, fa, fc), (c, b, fc, fb)];
                nseg = 2;
            }
        }
        for &(u, v, fu, fv) in &segments[..nseg] {
            let (su, sv) = (sign(fu), sign(fv));
            if su * sv < 0 {
                out.roots.push(refine_bracket(value, u, v, fu, fv, rtol));
            }
        }
        if sign(fb) == 0 {
            out.roots.push(b);
            if i + 1 == cells {
                out.endpoint = true;
            }
        }
    }
    out
}

/// Solutions of `Y^(k)(t) = level` on `[lo, hi]`, sorted.
pub fn level_crossings<P: SmoothPath + ?Sized>(
    path: &P,
    lo: f64,
    hi: f64,
    k: u32,
    level: f64,
    opts: &ScanOptions,
) -> Result<Vec<f64>> {
    validate(lo, hi, opts)?;
    Ok(crossings(path, lo, hi, k, level, opts).roots)
}

fn validate(lo: f64, hi: f64, opts: &ScanOptions) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    if opts.base_points < 64 {
        return Err(Error::InvalidInput(format!(
            "base_points must be at least 64, got {}",
            opts.base_points
        )));
    }
    Ok(())
}

/// Zeros of a smooth path on the closed interval `[lo, hi]` by grid scan.
pub fn count_scan<P: SmoothPath + ?Sized>(
    path: &P,
    lo: f64,
    hi: f64,
    opts: &ScanOptions,
) -> Result<ZeroReport> {
    validate(lo, hi, opts)?;
    if path.amplitude_bound(0) == 0.0 {
        return Err(Error::DegenerateInput);
    }
    let c = crossings(path, lo, hi, 0, 0.0, opts);
    let mut flags = BTreeSet::new();
    if c.near_tangency {
        flags.insert(Flag::NearTangency);
    }
    if c.endpoint {
        flags.insert(Flag::EndpointZero);
    }
    Ok(ZeroReport {
        count: c.roots.len(),
        roots: c.roots,
        method: Method::Scan,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::TrigPoly;

    #[test]
    fn zeros_of_cosine() {
        let p = TrigPoly::new(vec![1.0], vec![0.0]).unwrap();
        let r = count_scan(&p, 0.0, 2.0 * PI, &ScanOptions::default()).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.roots[0] - PI / 2.0).abs() < 1e-11);
        assert!((r.roots[1] - 1.5 * PI).abs() < 1e-11);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn zeros_of_sine_on_closed_interval() {
        let p = TrigPoly::new(vec![0.0], vec![1.0]).unwrap();
        let r = count_scan(&p, 0.0, PI, &ScanOptions::default()).unwrap();
        assert_eq!(r.count, 2);
        assert!(r.has(Flag::EndpointZero));
        assert_eq!(r.roots[0], 0.0);
        assert_eq!(r.roots[1], PI);
    }

    #[test]
    fn close_pair_without_grid_sign_change() {
        // cos t - 0.99999 has two zeros ~0.0045 apart around t = 0
        struct Shifted(TrigPoly);
        impl SmoothPath for Shifted {
            fn derivative(&self, t: f64, k: u32) -> f64 {
                self.0.eval_derivative(t, k) - if k == 0 { 0.99999 } else { 0.0 }
            }
            fn amplitude_bound(&self, k: u32) -> f64 {
                self.0.amplitude(k) + 1.0
            }
        }
        let p = Shifted(TrigPoly::new(vec![1.0], vec![0.0]).unwrap());
        let r = count_scan(&p, -1.0, 1.0, &ScanOptions::default()).unwrap();
        assert_eq!(r.count, 2);
        let half = (0.99999f64).acos();
        assert!((r.roots[0] + half).abs() < 1e-10 && (r.roots[1] - half).abs() < 1e-10);
    }

    #[test]
    fn exact_tangency_is_flagged() {
        // 1 - cos t touches zero at t = 0 (and 2 pi)
        struct Touch;
        impl SmoothPath for Touch {
            fn derivative(&self, t: f64, k: u32) -> f64 {
                match k {
                    0 => 1.0 - t.cos(),
                    1 => t.sin(),
                    _ => t.cos(),
                }
            }
            fn amplitude_bound(&self, _: u32) -> f64 {
                2.0
            }
        }
        let r = count_scan(&Touch, -1.0, 1.3, &ScanOptions::default()).unwrap();
        assert!(r.has(Flag::NearTangency));
        assert!(r.count == 0 || r.count == 2);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let z = TrigPoly::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert_eq!(
            count_scan(&z, 0.0, 1.0, &ScanOptions::default()),
            Err(Error::DegenerateInput)
        );
        let p = TrigPoly::new(vec![1.0], vec![0.0]).unwrap();
        assert!(count_scan(&p, 1.0, 1.0, &ScanOptions::default()).is_err());
        let few = ScanOptions {
            base_points: 10,
            ..Default::default()
        };
        assert!(count_scan(&p, 0.0, 1.0, &few).is_err());
    }

    #[test]
    fn level_crossings_of_cosine() {
        let p = TrigPoly::new(vec![1.0], vec![0.0]).unwrap();
        let r = level_crossings(&p, 0.0, 2.0 * PI, 0, 0.5, &ScanOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - PI / 3.0).abs() < 1e-11);
    }

    #[test]
    fn refine_bracket_on_cubic() {
        let r = refine_bracket(|x| x * x * x - 2.0, 0.0, 2.0, -2.0, 6.0, 1e-14);
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }
}
