use std::sync::Arc;

use proptest::prelude::*;
use trigzeros::coeffs::{make_stream, sample_coeffs, standardize, CoeffDist, Psi, RawDist};
use trigzeros::trigpoly::{build_cov, derivative_variance, kernel_rn, kernel_sc, TrigPoly};

/// `(1/N) sum cos(n x / N)` and derivatives by direct summation.
fn rn_direct(x: f64, n: usize, order: u32) -> f64 {
    let nf = n as f64;
    (1..=n)
        .map(|k| {
            let w = k as f64 / nf;
            match order {
                0 => (w * x).cos(),
                1 => -w * (w * x).sin(),
                _ => -w * w * (w * x).cos(),
            }
        })
        .sum::<f64>()
        / nf
}

fn sample_poly(dist: &CoeffDist, n: usize, seed: u64, i: u64) -> TrigPoly {
    let mut s = make_stream(seed, i);
    TrigPoly::from_interleaved(&sample_coeffs(dist, n, &mut s).unwrap()).unwrap()
}

fn conforming() -> Vec<(String, CoeffDist)> {
    let psi = Psi::new("quartic", Arc::new(|x: f64| x.powi(4)), Arc::new(|x: f64| 4.0 * x.powi(3)));
    vec![
        ("rademacher".into(), CoeffDist::rademacher()),
        ("uniform".into(), CoeffDist::uniform()),
        ("gaussian".into(), CoeffDist::gaussian()),
        ("exp(-x^4)".into(), standardize(RawDist::ExpPsi(psi), false).unwrap()),
    ]
}

#[test]
fn gamma_n_matches_direct_sums() {
    let t = [0.0, 1.0, 3.5];
    let c = build_cov(&t, Some(100)).unwrap();
    let g = c.gamma_n.unwrap();
    let m = t.len();
    for i in 0..m {
        for j in 0..m {
            let d = t[i] - t[j];
            assert!((g.get(i, j) - rn_direct(d, 100, 0)).abs() < 1e-12);
            assert!((g.get(i, m + j) - rn_direct(-d, 100, 1)).abs() < 1e-12);
            assert!((g.get(m + i, m + j) + rn_direct(d, 100, 2)).abs() < 1e-12);
        }
    }
}

#[test]
fn gamma_n_approaches_sigma() {
    let grid = [0.0, 2.0, 5.0, 11.0, 30.0];
    let sups: Vec<f64> = [10usize, 100, 1000]
        .iter()
        .map(|&n| {
            let c = build_cov(&grid, Some(n)).unwrap();
            c.sigma.max_abs_diff(c.gamma_n.as_ref().unwrap())
        })
        .collect();
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
    assert!(sups[2] < 1e-2);
}

#[test]
fn kernel_limit_pointwise() {
    for x in [0.3, 1.0, 4.0, 9.0] {
        for k in 0..3 {
            let gap = (kernel_rn(x, 10_000, k) - kernel_sc(x, k)).abs();
            assert!(gap < 1e-3, "x={x} k={k}: {gap}");
        }
    }
}

#[test]
fn cross_block_sign_on_sampled_paths() {
    // E[X(t_i) X'(t_j)] estimated with a central difference in t_j.
    let (n, h, reps) = (100, 1e-4, 20_000);
    let (ti, tj) = (0.0, 1.3);
    let dist = CoeffDist::gaussian();
    let mut xs = Vec::with_capacity(reps);
    for r in 0..reps {
        let p = sample_poly(&dist, n, 51, r as u64);
        xs.push(p.eval(ti) * (p.eval(tj + h) - p.eval(tj - h)) / (2.0 * h));
    }
    let nf = reps as f64;
    let m = xs.iter().sum::<f64>() / nf;
    let se = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
    let c = build_cov(&[ti, tj], Some(n)).unwrap();
    let entry = c.gamma_n.unwrap().get(0, 3);
    assert!((m - entry).abs() < 4.0 * se, "{m} ± {se} vs {entry}");
    assert!((m + entry).abs() > 4.0 * se, "sign not resolved");
}

#[test]
fn derivative_bound_for_conforming_laws() {
    let (n, reps, points, len) = (50, 2000, 1000, 5.0);
    let bound = 2.0 * (1.0 + len * len);
    let grid: Vec<f64> = (0..points).map(|i| len * i as f64 / (points - 1) as f64).collect();
    for (name, dist) in conforming() {
        for k in 0..4u32 {
            let mean_sup = (0..reps)
                .map(|r| {
                    let p = sample_poly(&dist, n, 52, r as u64);
                    p.eval_batch(&grid, k).iter().fold(0.0f64, |a, v| a.max(v * v))
                })
                .sum::<f64>()
                / reps as f64;
            assert!(mean_sup <= bound, "{name} k={k}: {mean_sup}");
        }
    }
}

#[test]
fn derivative_variance_monte_carlo() {
    let (n, reps) = (20, 20_000);
    for (name, dist) in conforming() {
        for k in 0..3u32 {
            let xs: Vec<f64> = (0..reps)
                .map(|r| sample_poly(&dist, n, 53, r as u64).eval_derivative(0.7, k).powi(2))
                .collect();
            let nf = reps as f64;
            let m = xs.iter().sum::<f64>() / nf;
            let se = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
            let exact = derivative_variance(n, k);
            assert!((m - exact).abs() < 4.0 * se, "{name} k={k}: {m} ± {se} vs {exact}");
        }
    }
}

#[test]
fn batch_evaluation_on_ten_thousand_points() {
    let p = sample_poly(&CoeffDist::gaussian(), 64, 54, 0);
    let grid: Vec<f64> = (0..10_000).map(|i| -20.0 + i as f64 * 0.005).collect();
    for k in 0..3 {
        let batch = p.eval_batch(&grid, k);
        for (t, v) in grid.iter().zip(&batch) {
            let naive: f64 = (1..=64)
                .map(|j| {
                    let w = j as f64 / 64.0;
                    let (s, c) = (w * t).sin_cos();
                    let (a, b) = (p.a()[j - 1], p.b()[j - 1]);
                    w.powi(k as i32)
                        * match k {
                            0 => a * c + b * s,
                            1 => -a * s + b * c,
                            _ => -a * c - b * s,
                        }
                })
                .sum::<f64>()
                / 8.0;
            assert!((v - naive).abs() < 1e-11 * (1.0 + naive.abs()), "t={t} k={k}");
        }
    }
}

fn separated_points() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=4, prop::collection::vec(0.0f64..50.0, 4)).prop_filter_map("gap", |(m, pts)| {
        let mut t: Vec<f64> = pts[..m].to_vec();
        t.sort_by(f64::total_cmp);
        t.windows(2).all(|w| w[1] - w[0] >= 0.1).then_some(t)
    })
}

proptest! {
    #[test]
    fn sigma_is_positive_definite(t in separated_points()) {
        let c = build_cov(&t, None).unwrap();
        prop_assert!(c.min_pivot > 0.0);
        prop_assert!(c.sigma.max_abs_asymmetry() < 1e-15);
    }

    #[test]
    fn sc_is_even_and_its_derivative_odd(x in -60.0f64..60.0) {
        prop_assert!((kernel_sc(x, 0) - kernel_sc(-x, 0)).abs() < 1e-15);
        prop_assert!((kernel_sc(x, 1) + kernel_sc(-x, 1)).abs() < 1e-15);
        prop_assert!(kernel_sc(x, 0).abs() <= 1.0);
    }

    #[test]
    fn rn_is_bounded_by_one(x in -500.0f64..500.0, n in 1usize..300) {
        prop_assert!(kernel_rn(x, n, 0).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn evaluation_is_linear(
        a in prop::collection::vec(-3.0f64..3.0, 16),
        b in prop::collection::vec(-3.0f64..3.0, 16),
        alpha in -2.0f64..2.0,
        t in -30.0f64..30.0,
    ) {
        let p = TrigPoly::from_interleaved(&a).unwrap();
        let q = TrigPoly::from_interleaved(&b).unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
        let r = TrigPoly::from_interleaved(&mix).unwrap();
        let lhs = r.eval(t);
        let rhs = alpha * p.eval(t) + q.eval(t);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + p.amplitude(0) + q.amplitude(0)));
    }
}
