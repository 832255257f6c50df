//! Coefficient laws with density proportional to `exp(-psi)`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::quad::{gl8, GL8};

pub type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Potential `psi` of a density `exp(-psi)`, with its derivative.
#[derive(Clone)]
pub struct Psi {
    label: String,
    value: PsiFn,
    derivative: PsiFn,
    /// Bounded support and the kinks of a tabulated potential.
    table: Option<Vec<f64>>,
}

impl fmt::Debug for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Psi").field("label", &self.label).finish()
    }
}

impl Psi {
    pub fn new(label: impl Into<String>, value: PsiFn, derivative: PsiFn) -> Self {
        Self {
            label: label.into(),
            value,
            derivative,
            table: None,
        }
    }

    /// Piecewise-linear potential through `(xs[i], ys[i])`. The density is zero
    /// outside `[xs[0], xs[last]]`.
    pub fn from_table(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput(
                "psi table needs at least two (x, psi) rows".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "psi table abscissae must be finite and strictly increasing".into(),
            ));
        }
        let xs = Arc::new(xs);
        let ys = Arc::new(ys);
        let locate = {
            let xs = Arc::clone(&xs);
            move |x: f64| -> usize {
                let i = xs.partition_point(|&v| v <= x);
                i.clamp(1, xs.len() - 1) - 1
            }
        };
        let value: PsiFn = {
            let (xs, ys, locate) = (Arc::clone(&xs), Arc::clone(&ys), locate.clone());
            Arc::new(move |x| {
                if x < xs[0] || x > xs[xs.len() - 1] {
                    return f64::INFINITY;
                }
                let i = locate(x);
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                ys[i] + w * (ys[i + 1] - ys[i])
            })
        };
        let derivative: PsiFn = {
            let (xs, ys) = (Arc::clone(&xs), Arc::clone(&ys));
            Arc::new(move |x| {
                let i = locate(x);
                (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            })
        };
        Ok(Self {
            label: label.into(),
            value,
            derivative,
            table: Some(xs.as_ref().clone()),
        })
    }

    /// Read a two-column `x psi` table (whitespace or comma separated, `#`
    /// starts a comment).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!(
                        "{}:{}: `{s}` is not a number",
                        path.display(),
                        lineno + 1
                    ))
                })
            };
            match fields.as_slice() {
                [x, y] => {
                    xs.push(parse(x)?);
                    ys.push(parse(y)?);
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "{}:{}: expected two columns",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_table(path.display().to_string(), xs, ys)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerStrategy {
    /// Gaussian proposal `N(center, scale^2)` scaled by `exp(log_bound)`.
    Rejection {
        center: f64,
        scale: f64,
        log_bound: f64,
    },
    /// Numerical inversion of the tabulated CDF.
    Inversion,
}

const CELLS: usize = 4096;
const LOG_CUTOFF: f64 = 60.0;
const ENVELOPE_MARGIN: f64 = 0.05;
const INVERSION_RTOL: f64 = 1e-10;

/// Standardizing sampler for `exp(-psi)`: draws are returned as
/// `(x - mean) / sd`.
#[derive(Debug)]
pub struct ExpPsiSampler {
    psi: Psi,
    psi_min: f64,
    edges: Vec<f64>,
    cdf: Vec<f64>,
    mass: f64,
    mean: f64,
    sd: f64,
    strategy: SamplerStrategy,
}

fn eval_checked(psi: &Psi, x: f64) -> Result<f64> {
    let v = psi.eval(x);
    if v.is_nan() || v == f64::NEG_INFINITY {
        return Err(Error::SamplingFailure(format!(
            "psi `{}` evaluated to {v} at x = {x}",
            psi.label
        )));
    }
    Ok(v)
}

fn find_support(psi: &Psi) -> Result<(f64, f64, f64)> {
    if let Some(xs) = &psi.table {
        let mut min = f64::INFINITY;
        for &x in xs {
            let v = eval_checked(psi, x)?;
            if !v.is_finite() {
                return Err(Error::SamplingFailure(format!(
                    "psi `{}` is not finite at tabulated x = {x}",
                    psi.label
                )));
            }
            min = min.min(v);
        }
        return Ok((xs[0], xs[xs.len() - 1], min));
    }
    let probe = 4097;
    let mut half = 8.0;
    loop {
        let xs: Vec<f64> = (0..probe)
            .map(|i| -half + 2.0 * half * i as f64 / (probe - 1) as f64)
            .collect();
        let vals = xs
            .iter()
            .map(|&x| eval_checked(psi, x))
            .collect::<Result<Vec<_>>>()?;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return Err(Error::SamplingFailure(format!(
                "psi `{}` is infinite on all of [-{half}, {half}]",
                psi.label
            )));
        }
        let light = |v: f64| v - min < LOG_CUTOFF;
        if !light(vals[0]) && !light(vals[probe - 1]) {
            let first = vals.iter().position(|&v| light(v)).unwrap_or(0);
            let last = vals.iter().rposition(|&v| light(v)).unwrap_or(probe - 1);
            let lo = xs[first.saturating_sub(1)];
            let hi = xs[(last + 1).min(probe - 1)];
            return Ok((lo, hi, min));
        }
        half *= 2.0;
        if half > 1e6 {
            return Err(Error::SamplingFailure(format!(
                "density exp(-psi) for `{}` does not decay within |x| <= 1e6",
                psi.label
            )));
        }
    }
}

impl ExpPsiSampler {
    pub fn new(psi: Psi) -> Result<Self> {
        let (lo, hi, psi_min) = find_support(&psi)?;
        let edges: Vec<f64> = match &psi.table {
            Some(xs) => {
                let per = CELLS.div_ceil(xs.len() - 1).max(1);
                let mut e = Vec::with_capacity((xs.len() - 1) * per + 1);
                for w in xs.windows(2) {
                    for j in 0..per {
                        e.push(w[0] + (w[1] - w[0]) * j as f64 / per as f64);
                    }
                }
                e.push(xs[xs.len() - 1]);
                e
            }
            None => (0..=CELLS)
                .map(|i| lo + (hi - lo) * i as f64 / CELLS as f64)
                .collect(),
        };

        let mut failure = None;
        let mut density = |x: f64| -> f64 {
            match eval_checked(&psi, x) {
                Ok(v) => (-(v - psi_min)).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let mut cdf = Vec::with_capacity(edges.len());
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        cdf.push(0.0);
        for w in edges.windows(2) {
            m0 += gl8(&mut density, w[0], w[1]);
            m1 += gl8(|x| x * density(x), w[0], w[1]);
            cdf.push(m0);
        }
        let mean = m1 / m0;
        let mut m2 = 0.0;
        for w in edges.windows(2) {
            m2 += gl8(|x| (x - mean) * (x - mean) * density(x), w[0], w[1]);
        }
        if let Some(e) = failure {
            return Err(e);
        }
        if !(m0 > 0.0 && m0.is_finite() && m2.is_finite()) {
            return Err(Error::SamplingFailure(format!(
                "density exp(-psi) for `{}` is not normalizable",
                psi.label
            )));
        }
        let sd = (m2 / m0).sqrt();
        let mass = m0;
        for c in cdf.iter_mut() {
            *c /= mass;
        }

        let strategy = Self::choose_strategy(&psi, psi_min, &edges, mean, sd, mass)?;
        Ok(Self {
            psi,
            psi_min,
            edges,
            cdf,
            mass,
            mean,
            sd,
            strategy,
        })
    }

    fn choose_strategy(
        psi: &Psi,
        psi_min: f64,
        edges: &[f64],
        mean: f64,
        sd: f64,
        mass: f64,
    ) -> Result<SamplerStrategy> {
        let scale = 1.5 * sd;
        let log_ratio = |x: f64, v: f64| -(v - psi_min) + (x - mean).powi(2) / (2.0 * scale * scale);
        if psi.table.is_none() {
            // tails must be convex and at least as steep as the proposal's
            let lo = edges[0];
            let hi = edges[edges.len() - 1];
            let reach = lo.abs().max(hi.abs());
            let mut prev_right = f64::NEG_INFINITY;
            let mut prev_left = f64::INFINITY;
            for mult in [1.0, 2.0, 4.0, 8.0] {
                let r = mean + mult * reach;
                let l = mean - mult * reach;
                let dr = psi.eval_derivative(r);
                let dl = psi.eval_derivative(l);
                if !dr.is_finite() || !dl.is_finite() {
                    return Ok(SamplerStrategy::Inversion);
                }
                let steep = dr >= (r - mean) / (scale * scale) && dl <= (l - mean) / (scale * scale);
                if !steep || dr < prev_right || dl > prev_left {
                    return Ok(SamplerStrategy::Inversion);
                }
                prev_right = dr;
                prev_left = dl;
            }
        }
        let mut log_bound = f64::NEG_INFINITY;
        for w in edges.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            let pts = std::iter::once(w[0])
                .chain(GL8.iter().map(|&(x, _)| mid + half * x))
                .chain(std::iter::once(w[1]));
            for x in pts {
                let v = eval_checked(psi, x)?;
                if v.is_finite() {
                    log_bound = log_bound.max(log_ratio(x, v));
                }
            }
        }
        log_bound += ENVELOPE_MARGIN;
        // acceptance probability = mass / (bound * sqrt(2 pi) * scale)
        let acceptance =
            mass / (log_bound.exp() * (2.0 * std::f64::consts::PI).sqrt() * scale);
        if !(acceptance > 0.02) {
            return Ok(SamplerStrategy::Inversion);
        }
        Ok(SamplerStrategy::Rejection {
            center: mean,
            scale,
            log_bound,
        })
    }

    pub fn strategy(&self) -> SamplerStrategy {
        self.strategy
    }

    /// Mean of the raw (unstandardized) density.
    pub fn raw_mean(&self) -> f64 {
        self.mean
    }

    /// Standard deviation of the raw density.
    pub fn raw_sd(&self) -> f64 {
        self.sd
    }

    pub fn label(&self) -> &str {
        self.psi.label()
    }

    /// One standardized draw.
    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        let x = match self.strategy {
            SamplerStrategy::Rejection {
                center,
                scale,
                log_bound,
            } => self.sample_rejection(rng, center, scale, log_bound)?,
            SamplerStrategy::Inversion => self.sample_inversion(rng)?,
        };
        Ok((x - self.mean) / self.sd)
    }

    /// Draw by inverting the tabulated CDF, bypassing the chosen strategy.
    pub fn sample_by_inversion(&self, rng: &mut RngStream) -> Result<f64> {
        Ok((self.sample_inversion(rng)? - self.mean) / self.sd)
    }

    fn sample_rejection(
        &self,
        rng: &mut RngStream,
        center: f64,
        scale: f64,
        log_bound: f64,
    ) -> Result<f64> {
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        for _ in 0..100_000 {
            let x = center + scale * rng.normal();
            let u = rng.uniform_open();
            if self.psi.table.is_some() && (x < lo || x > hi) {
                continue;
            }
            let v = eval_checked(&self.psi, x)?;
            if v == f64::INFINITY {
                continue;
            }
            let log_accept = -(v - self.psi_min) + (x - center).powi(2) / (2.0 * scale * scale)
                - log_bound;
            if log_accept > 0.0 {
                return Err(Error::SamplingFailure(format!(
                    "Gaussian envelope violated for `{}` at x = {x}",
                    self.psi.label
                )));
            }
            if u.ln() < log_accept {
                return Ok(x);
            }
        }
        Err(Error::SamplingFailure(format!(
            "rejection sampler for `{}` accepted nothing in 1e5 proposals",
            self.psi.label
        )))
    }

    fn sample_inversion(&self, rng: &mut RngStream) -> Result<f64> {
        let u = rng.uniform_open();
        let cell = (self.cdf.partition_point(|&c| c <= u).max(1) - 1).min(self.edges.len() - 2);
        let (a, b) = (self.edges[cell], self.edges[cell + 1]);
        let cell_mass = (self.cdf[cell + 1] - self.cdf[cell]) * self.mass;
        let target = (u - self.cdf[cell]) * self.mass;
        let density = |x: f64| -> Result<f64> {
            Ok((-(eval_checked(&self.psi, x)? - self.psi_min)).exp())
        };
        let partial = |x: f64| -> Result<f64> {
            let mut err = None;
            let v = gl8(
                |s| match density(s) {
                    Ok(d) => d,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                a,
                x,
            );
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        };
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * (target / cell_mass).clamp(0.0, 1.0);
        for _ in 0..100 {
            let resid = partial(x)? - target;
            if resid.abs() <= INVERSION_RTOL * cell_mass {
                return Ok(x);
            }
            if resid > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = density(x)?;
            let newton = x - resid / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= INVERSION_RTOL * (b - a) {
                return Ok(x);
            }
        }
        Err(Error::SamplingFailure(format!(
            "CDF inversion for `{}` did not converge",
            self.psi.label
        )))
    }
}
