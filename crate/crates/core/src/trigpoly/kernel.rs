//! Covariance kernels: `r_N(x) = (1/N) sum_{n=1}^N cos(n x / N)` and its
//! limit, the cardinal sine `sc(x) = sin(x) / x`.

use std::f64::consts::PI;

/// Below this |x| both kernels switch to their Taylor series.
const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 10;

// B_j with the B_1 = +1/2 convention, j = 0..=18
const BERNOULLI: [f64; 19] = [
    1.0,
    0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
];

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(1/N) sum_{n=1}^N (n/N)^p`. Direct for small `N`, Faulhaber's formula
/// otherwise.
pub fn normalized_power_sum(n: usize, p: u32) -> f64 {
    assert!(n >= 1, "degree must be positive");
    let nf = n as f64;
    if n <= 64 || p as usize >= BERNOULLI.len() {
        return (1..=n).map(|j| (j as f64 / nf).powi(p as i32)).sum::<f64>() / nf;
    }
    let p = p as usize;
    let mut sum = 0.0;
    let mut inv = 1.0;
    for (j, &bj) in BERNOULLI.iter().enumerate().take(p + 1) {
        sum += binomial(p + 1, j) * bj * inv;
        inv /= nf;
    }
    sum / (p + 1) as f64
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Even series `sum_j (-1)^j c_j x^{2j} / (2j)!` differentiated `order` times.
fn even_series(x: f64, order: u32, coeff: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..SERIES_TERMS {
        let power = 2 * j;
        if power < order as usize {
            continue;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let e = power - order as usize;
        sum += sign * coeff(j) * x.powi(e as i32) / factorial(e);
    }
    sum
}

/// Cardinal sine and its first two derivatives.
pub fn kernel_sc(x: f64, order: u32) -> f64 {
    if x.abs() < SERIES_RADIUS {
        // sc(x) = sum (-1)^j x^{2j} / (2j+1)!  =  sum (-1)^j [1/(2j+1)] x^{2j}/(2j)!
        return even_series(x, order, |j| 1.0 / (2 * j + 1) as f64);
    }
    let (s, c) = x.sin_cos();
    match order {
        0 => s / x,
        1 => (x * c - s) / (x * x),
        2 => -s / x - 2.0 * c / (x * x) + 2.0 * s / (x * x * x),
        _ => panic!("kernel order must be 0, 1 or 2"),
    }
}

/// `r_N` and its first two derivatives. The harmonic sum uses the Dirichlet
/// closed form `sin((N+1/2) theta) / (2 sin(theta/2)) - 1/2` with
/// `theta = x/N` reduced mod `2 pi`, and a moment series near `theta = 0`.
pub fn kernel_rn(x: f64, n: usize, order: u32) -> f64 {
    assert!(n >= 1, "degree must be positive");
    assert!(order <= 2, "kernel order must be 0, 1 or 2");
    let nf = n as f64;
    let theta = x / nf;
    let theta = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    let lag = theta * nf;
    if lag.abs() < SERIES_RADIUS {
        return even_series(lag, order, |j| normalized_power_sum(n, 2 * j as u32));
    }
    let a = nf + 0.5;
    let (s, c) = (0.5 * theta).sin_cos();
    let (big_s, big_c) = (a * theta).sin_cos();
    match order {
        0 => (big_s / (2.0 * s) - 0.5) / nf,
        1 => (a * big_c / (2.0 * s) - big_s * c / (4.0 * s * s)) / (nf * nf),
        _ => {
            let d2 = -a * a * big_s / (2.0 * s) - a * big_c * c / (2.0 * s * s)
                + big_s * (s * s + 2.0 * c * c) / (8.0 * s * s * s);
            d2 / (nf * nf * nf)
        }
    }
}
