//! Gauss rules and globally adaptive Gauss–Kronrod quadrature.

/// Eight-point Gauss–Legendre rule on `[-1, 1]`: (node, weight) pairs.
pub const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss-7 weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integrate `f` over `[a, b]` with the eight-point Gauss–Legendre rule.
pub fn gl8<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL8.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive G7/K15 quadrature: the segment with the largest error
/// estimate is bisected until the summed estimate meets
/// `max(abs_tol, rel_tol * |value|)` or the segment budget runs out.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let mut segments = vec![gk15(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || segments.len() >= opts.max_intervals {
            return QuadResult {
                value,
                error,
                evaluations,
                converged: error <= target,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // cannot split further in floating point
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        segments.push(gk15(&mut f, seg.a, mid));
        segments.push(gk15(&mut f, mid, seg.b));
        evaluations += 30;
    }
}

/// Iterated adaptive quadrature of `f(x, y)` over
/// `{lo <= x <= hi, y_lo(x) <= y <= y_hi(x)}`.
///
/// The inner integrals run at a tenth of the outer tolerances. `converged`
/// is false if any inner or the outer integration exhausted its budget.
pub fn integrate_2d<F, L, H>(
    f: F,
    lo: f64,
    hi: f64,
    y_lo: L,
    y_hi: H,
    opts: QuadOptions,
) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / 10.0,
        rel_tol: opts.rel_tol / 10.0,
        max_intervals: opts.max_intervals,
    };
    let mut inner_ok = true;
    let mut inner_evals = 0;
    let mut inner_err = 0.0f64;
    let outer = integrate(
        |x| {
            let r = integrate(|y| f(x, y), y_lo(x), y_hi(x), inner_opts);
            inner_ok &= r.converged;
            inner_evals += r.evaluations;
            inner_err = inner_err.max(r.error);
            r.value
        },
        lo,
        hi,
        opts,
    );
    QuadResult {
        value: outer.value,
        error: outer.error + inner_err * (hi - lo),
        evaluations: inner_evals,
        converged: outer.converged && inner_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl8_exact_for_degree_15() {
        let v = gl8(|x| x.powi(15) + x.powi(14), 0.0, 1.0);
        assert!((v - (1.0 / 16.0 + 1.0 / 15.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let opts = QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 200,
        };
        let r = integrate(|x: f64| x.abs(), -1.0, 2.0, opts);
        assert!(r.converged);
        assert!((r.value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn adaptive_oscillatory() {
        let r = integrate(|x: f64| (10.0 * x).sin(), 0.0, 3.0, QuadOptions::default());
        let exact = (1.0 - 30f64.cos()) / 10.0;
        assert!((r.value - exact).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, opts);
        assert!(!r.converged);
    }

    #[test]
    fn triangle_area_2d() {
        let r = integrate_2d(|_, _| 1.0, 0.0, 1.0, |x| x, |_| 1.0, QuadOptions::default());
        assert!((r.value - 0.5).abs() < 1e-12);
        let r = integrate_2d(|x, y| x * y, 0.0, 1.0, |_| 0.0, |x| x, QuadOptions::default());
        assert!((r.value - 1.0 / 8.0).abs() < 1e-12);
    }
}
