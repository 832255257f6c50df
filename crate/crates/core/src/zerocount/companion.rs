//! Real zeros of `X_N` as unit-circle roots of an algebraic polynomial.
//!
//! With `z = e^{i t/N}`, `cos(n t/N) = (z^n + z^-n)/2` and
//! `sin(n t/N) = (z^n - z^-n)/(2i)`, so `sqrt(N) z^N X_N(t)` is the
//! degree-`2N` polynomial with coefficients
//! `c_{N+n} = (a_n - i b_n)/2`, `c_{N-n} = (a_n + i b_n)/2`, `c_N = 0`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Flag, Method, ZeroReport};
use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Roots with `||z| - 1|` below this are real zeros of `X_N`.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;
/// Off-circle roots closer than this to the circle mark a near tangency.
const NEAR_CIRCLE_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug)]
pub struct AberthOptions {
    /// Target backward error `|p(z)| / sum |c_j| |z|^j`.
    pub residual: f64,
    pub max_sweeps: usize,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            residual: 1e-13,
            max_sweeps: 500,
        }
    }
}

/// Coefficients `c_0..c_{2N}` in increasing degree.
pub fn trig_to_algebraic(p: &TrigPoly) -> Vec<Complex64> {
    let n = p.degree();
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    for (j, (&a, &b)) in p.a().iter().zip(p.b()).enumerate() {
        let h = j + 1;
        c[n + h] = Complex64::new(0.5 * a, -0.5 * b);
        c[n - h] = Complex64::new(0.5 * a, 0.5 * b);
    }
    c
}

/// `(p(z), p'(z), sum |c_j| |z|^j)`, evaluating the reversed polynomial in
/// `1/z` when `|z| > 1`.
fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let d = c.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = c[d];
        let mut dp = Complex64::new(0.0, 0.0);
        let mut mag = c[d].norm();
        let r = z.norm();
        for j in (0..d).rev() {
            dp = dp * z + p;
            p = p * z + c[j];
            mag = mag * r + c[j].norm();
        }
        (p, dp, mag)
    } else {
        // p(z) = z^d q(w), w = 1/z, q_j = c_{d-j}
        let w = z.inv();
        let rw = w.norm();
        let mut q = c[0];
        let mut dq = Complex64::new(0.0, 0.0);
        let mut mag = c[0].norm();
        for j in 1..=d {
            dq = dq * w + q;
            q = q * w + c[j];
            mag = mag * rw + c[j].norm();
        }
        // scaled by w^d: p w^d = q, p' w^d = (d q - w q') w ... returned as
        // ratios only, so the common factor w^d is irrelevant
        let p = q;
        let dp = (q * d as f64 - w * dq) * w;
        (p, dp, mag)
    }
}

/// All roots of `sum c_j z^j` (leading and trailing zeros allowed) by
/// Aberth–Ehrlich simultaneous iteration. Returns the roots and the worst
/// backward error reached.
pub fn aberth_roots(coeffs: &[Complex64], opts: AberthOptions) -> Result<(Vec<Complex64>, f64)> {
    let first = coeffs.iter().position(|c| c.norm() > 0.0);
    let last = coeffs.iter().rposition(|c| c.norm() > 0.0);
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::DegenerateInput),
    };
    let mut roots = vec![Complex64::new(0.0, 0.0); first];
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let c: Vec<Complex64> = coeffs[first..=last].iter().map(|x| x / scale).collect();
    let d = c.len() - 1;
    if d == 0 {
        return Ok((roots, 0.0));
    }

    let radius = (c[0].norm() / c[d].norm()).powf(1.0 / d as f64);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.25) / d as f64 + 0.4))
        .collect();
    let mut done = vec![false; d];
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        worst = 0.0;
        for k in 0..d {
            let (p, dp, mag) = horner(&c, z[k]);
            let backward = p.norm() / mag;
            if backward <= opts.residual {
                done[k] = true;
                continue;
            }
            done[k] = false;
            worst = worst.max(backward);
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != k {
                    repulsion += (z[k] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
            }
        }
        if done.iter().all(|&x| x) {
            roots.extend(z);
            return Ok((roots, 0.0f64.max(worst)));
        }
    }
    Err(Error::NumericalFailure {
        iterations: opts.max_sweeps,
        residual: worst,
        context: format!("Aberth iteration on a degree-{d} polynomial"),
    })
}

fn polish(p: &TrigPoly, t: f64) -> f64 {
    let mut x = t;
    for _ in 0..3 {
        let f = p.eval(x);
        let df = p.eval_derivative(x, 1);
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if (next - t).abs() > 1e-6 {
            break;
        }
        x = next;
    }
    x
}

/// Zeros of `X_N` on `[lo, hi]` (at most one period long) via the
/// companion polynomial.
pub fn count_companion(p: &TrigPoly, lo: f64, hi: f64) -> Result<ZeroReport> {
    let period = p.period();
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    if hi - lo > period * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "interval length {} exceeds one period 2 pi N = {period}",
            hi - lo
        )));
    }
    if p.is_zero() {
        return Err(Error::DegenerateInput);
    }
    let n = p.degree() as f64;
    let (roots, _) = aberth_roots(&trig_to_algebraic(p), AberthOptions::default())?;

    let etol = 1e-11 * lo.abs().max(hi.abs()).max(1.0);
    let mut flags = BTreeSet::new();
    let mut found = Vec::new();
    for z in roots {
        let dev = (z.norm() - 1.0).abs();
        if dev >= UNIT_CIRCLE_TOL {
            if dev < NEAR_CIRCLE_TOL {
                flags.insert(Flag::NearTangency);
            }
            continue;
        }
        let t0 = polish(p, (n * z.arg()).rem_euclid(period));
        let first = ((lo - etol - t0) / period).ceil() as i64;
        let mut k = first;
        loop {
            let t = t0 + k as f64 * period;
            if t > hi + etol {
                break;
            }
            if (t - lo).abs() <= etol || (t - hi).abs() <= etol {
                flags.insert(Flag::EndpointZero);
            }
            found.push(t.clamp(lo, hi));
            k += 1;
        }
    }
    found.sort_by(f64::total_cmp);
    if found.windows(2).any(|w| w[1] - w[0] < 1e-6) {
        flags.insert(Flag::NearTangency);
    }
    // roots stay strictly increasing; a numerically double root keeps its
    // multiplicity in the count
    let count = found.len();
    found.dedup_by(|a, b| *a <= *b);
    Ok(ZeroReport {
        count,
        roots: found,
        method: Method::Companion,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_stream, sample_coeffs, CoeffDist};

    fn random_poly(n: usize, seed: u64) -> TrigPoly {
        let mut s = make_stream(seed, 0);
        TrigPoly::from_interleaved(&sample_coeffs(&CoeffDist::gaussian(), n, &mut s).unwrap())
            .unwrap()
    }

    #[test]
    fn cosine_maps_to_z2_plus_1() {
        let p = TrigPoly::new(vec![1.0], vec![0.0]).unwrap();
        let c = trig_to_algebraic(&p);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], Complex64::new(0.5, 0.0));
        assert_eq!(c[1], Complex64::new(0.0, 0.0));
        assert_eq!(c[2], Complex64::new(0.5, 0.0));
        let r = count_companion(&p, 0.0, 2.0 * PI * (1.0 - 1e-15)).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.roots[0] - PI / 2.0).abs() < 1e-12);
        assert!((r.roots[1] - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn aberth_on_known_cubic() {
        // (z - 1)(z - 2)(z + 3) = z^3 - 7z + 6
        let c: Vec<Complex64> = [6.0, -7.0, 0.0, 1.0]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let (mut r, _) = aberth_roots(&c, AberthOptions::default()).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (z, e) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_have_small_residual() {
        let p = random_poly(8, 17);
        let r = count_companion(&p, 0.0, p.period() * (1.0 - 1e-9)).unwrap();
        assert!(r.count <= 16);
        for &t in &r.roots {
            assert!(p.eval(t).abs() < 1e-9, "residual at {t}");
        }
    }

    #[test]
    fn at_most_2n_per_period() {
        for seed in 0..50 {
            let n = 1 + (seed as usize % 9);
            let p = random_poly(n, 100 + seed);
            let r = count_companion(&p, 0.0, p.period() * (1.0 - 1e-9)).unwrap();
            assert!(r.count <= 2 * n);
        }
    }

    #[test]
    fn interval_longer_than_period_rejected() {
        let p = TrigPoly::new(vec![1.0], vec![0.0]).unwrap();
        assert!(count_companion(&p, 0.0, 7.0).is_err());
    }

    #[test]
    fn missing_top_harmonic_is_handled() {
        // a_2 = b_2 = 0 strips both ends of the coefficient vector
        let p = TrigPoly::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let r = count_companion(&p, 0.0, p.period() * (1.0 - 1e-9)).unwrap();
        // cos(t/2) on [0, 4 pi): zeros at pi and 3 pi
        assert_eq!(r.count, 2);
        assert!((r.roots[0] - PI).abs() < 1e-12 && (r.roots[1] - 3.0 * PI).abs() < 1e-12);
    }
}
