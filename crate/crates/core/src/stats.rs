//! Count-law summaries, two-sample comparisons and tail diagnostics.

use std::collections::BTreeMap;

use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::coeffs::RngStream;
use crate::error::{Error, Result};
use crate::zerocount::falling_factorial;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EnsembleMeta {
    /// Degree `N`; `None` for the limit process.
    pub n: Option<usize>,
    pub distribution: String,
    pub interval: (f64, f64),
    pub seed: u64,
    pub method: String,
    /// Outside the hypotheses of the limit theorem (e.g. Cauchy).
    pub exploratory: bool,
}

impl EnsembleMeta {
    pub fn label(&self) -> String {
        match self.n {
            Some(n) => format!("{} N={n}", self.distribution),
            None => self.distribution.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub se: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSummary {
    pub counts: Vec<u64>,
    pub pmf: BTreeMap<u64, f64>,
    /// `m -> E[Z^[m]]` for `m = 0..=m_max`.
    pub factorial_moments: BTreeMap<u32, MomentEstimate>,
    pub meta: EnsembleMeta,
}

impl EnsembleSummary {
    pub fn replications(&self) -> usize {
        self.counts.len()
    }

    pub fn with_meta(mut self, meta: EnsembleMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn mean(&self) -> MomentEstimate {
        self.factorial_moments
            .get(&1)
            .copied()
            .unwrap_or_else(|| jackknife_mean(&to_f64(&self.counts)))
    }

    /// `P(Z >= k)` estimated from the counts.
    pub fn survival(&self, k: u64) -> f64 {
        self.counts.iter().filter(|&&c| c >= k).count() as f64 / self.counts.len() as f64
    }
}

fn to_f64(v: &[u64]) -> Vec<f64> {
    v.iter().map(|&c| c as f64).collect()
}

/// Leave-one-out jackknife of the sample mean.
fn jackknife_mean(x: &[f64]) -> MomentEstimate {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    let estimate = total / n;
    if x.len() < 2 {
        return MomentEstimate { estimate, se: 0.0 };
    }
    let loo: Vec<f64> = x.iter().map(|v| (total - v) / (n - 1.0)).collect();
    let bar = loo.iter().sum::<f64>() / n;
    let ss: f64 = loo.iter().map(|v| (v - bar) * (v - bar)).sum();
    MomentEstimate {
        estimate,
        se: ((n - 1.0) / n * ss).sqrt(),
    }
}

pub fn summarize(counts: &[u64], m_max: u32) -> Result<EnsembleSummary> {
    if counts.is_empty() {
        return Err(Error::InvalidInput("no counts to summarize".into()));
    }
    let n = counts.len() as f64;
    let mut freq = BTreeMap::new();
    for &c in counts {
        *freq.entry(c).or_insert(0usize) += 1;
    }
    let pmf = freq.into_iter().map(|(k, f)| (k, f as f64 / n)).collect();
    let factorial_moments = (0..=m_max)
        .map(|m| {
            let x: Vec<f64> = counts
                .iter()
                .map(|&c| falling_factorial(c, m as u64) as f64)
                .collect();
            (m, jackknife_mean(&x))
        })
        .collect();
    Ok(EnsembleSummary {
        counts: counts.to_vec(),
        pmf,
        factorial_moments,
        meta: EnsembleMeta::default(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Largest gap between the two right-continuous empirical CDFs.
pub fn ks_two_sample(a: &[u64], b: &[u64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("both samples must be nonempty".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        n_a: a.len(),
        n_b: b.len(),
    })
}

/// Draw per-value frequencies of `n` samples from `pmf` by sequential
/// conditional binomials.
fn multinomial(pmf: &[(u64, f64)], n: u64, stream: &mut RngStream) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(pmf.len());
    for (idx, &(_, p)) in pmf.iter().enumerate() {
        let k = if left == 0 {
            0
        } else if idx + 1 == pmf.len() || p >= mass {
            left
        } else {
            Binomial::new(left, (p / mass).clamp(0.0, 1.0))
                .expect("valid binomial")
                .sample(stream)
        };
        out.push(k);
        left -= k;
        mass -= p;
    }
    out
}

fn ks_from_frequencies(fa: &[u64], fb: &[u64], na: u64, nb: u64) -> f64 {
    let (mut ca, mut cb) = (0u64, 0u64);
    let mut d = 0.0f64;
    for (x, y) in fa.iter().zip(fb) {
        ca += x;
        cb += y;
        d = d.max((ca as f64 / na as f64 - cb as f64 / nb as f64).abs());
    }
    d
}

/// Null quantile of the two-sample KS statistic for samples of sizes
/// `n_a, n_b` drawn from the same law `reference` (a pmf). Returns the
/// `1 - level` quantile over `n_boot` parametric bootstrap pairs.
pub fn ks_null_threshold(
    reference: &BTreeMap<u64, f64>,
    n_a: usize,
    n_b: usize,
    level: f64,
    n_boot: usize,
    stream: &mut RngStream,
) -> Result<f64> {
    if reference.is_empty() || n_a == 0 || n_b == 0 || n_boot == 0 {
        return Err(Error::InvalidInput("empty reference or zero sample sizes".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!("level must be in (0, 1), got {level}")));
    }
    let total: f64 = reference.values().sum();
    let pmf: Vec<(u64, f64)> = reference.iter().map(|(&k, &p)| (k, p / total)).collect();
    let mut stats: Vec<f64> = (0..n_boot)
        .map(|_| {
            let fa = multinomial(&pmf, n_a as u64, stream);
            let fb = multinomial(&pmf, n_b as u64, stream);
            ks_from_frequencies(&fa, &fb, n_a as u64, n_b as u64)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let idx = (((1.0 - level) * n_boot as f64).ceil() as usize).clamp(1, n_boot) - 1;
    Ok(stats[idx])
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `log(L^{k - 1/2} / sqrt(k! (k-1)!))`, for `k >= 1`.
pub fn tail_reference_log(len: f64, k: u64) -> f64 {
    assert!(k >= 1, "tail reference starts at k = 1");
    (k as f64 - 0.5) * len.ln() - 0.5 * (ln_factorial(k) + ln_factorial(k - 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub k: u64,
    pub survival: f64,
    pub log_survival: Option<f64>,
    pub reference_log: f64,
    pub fitted_reference: Option<f64>,
    /// Beyond the fit point and above the noise floor.
    pub checked: bool,
    pub below: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailProfile {
    pub interval_length: f64,
    pub fit_k: Option<u64>,
    pub offset: Option<f64>,
    pub noise_floor: f64,
    pub rows: Vec<TailRow>,
    pub violations: Vec<u64>,
    pub passed: bool,
}

/// Empirical log-survival against the reference curve, shifted so that the
/// two agree at the first `k` with survival below 1/2.
pub fn tail_profile(summary: &EnsembleSummary) -> TailProfile {
    let (lo, hi) = summary.meta.interval;
    let len = hi - lo;
    let reps = summary.replications() as f64;
    let noise_floor = 10.0 / reps;
    let max = summary.counts.iter().copied().max().unwrap_or(0);
    let survival: Vec<(u64, f64)> = (1..=max).map(|k| (k, summary.survival(k))).collect();
    let fit_k = survival.iter().find(|(_, s)| *s < 0.5).map(|&(k, _)| k);
    let offset = fit_k.map(|k| summary.survival(k).ln() - tail_reference_log(len, k));
    let mut violations = Vec::new();
    let rows = survival
        .into_iter()
        .map(|(k, s)| {
            let reference_log = tail_reference_log(len, k);
            let log_survival = (s > 0.0).then(|| s.ln());
            let fitted_reference = offset.map(|o| reference_log + o);
            let checked = fit_k.is_some_and(|f| k > f) && s >= noise_floor;
            let below = match (checked, log_survival, fitted_reference) {
                (true, Some(l), Some(r)) => Some(l <= r + 1e-12),
                _ => None,
            };
            if below == Some(false) {
                violations.push(k);
            }
            TailRow {
                k,
                survival: s,
                log_survival,
                reference_log,
                fitted_reference,
                checked,
                below,
            }
        })
        .collect();
    TailProfile {
        interval_length: len,
        fit_k,
        offset,
        noise_floor,
        rows,
        passed: violations.is_empty(),
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported without a verdict.
    Exploratory,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Exploratory => "exploratory",
        })
    }
}

/// A fixed table of factorial moments, e.g. from the Kac–Rice module.
#[derive(Clone, Debug, Serialize)]
pub struct MomentTable {
    pub label: String,
    pub interval: (f64, f64),
    pub moments: BTreeMap<u32, MomentEstimate>,
}

#[derive(Clone, Debug)]
pub enum Reference<'a> {
    Ensemble(&'a EnsembleSummary),
    Table(&'a MomentTable),
}

impl Reference<'_> {
    fn label(&self) -> String {
        match self {
            Reference::Ensemble(s) => s.meta.label(),
            Reference::Table(t) => t.label.clone(),
        }
    }

    fn interval(&self) -> (f64, f64) {
        match self {
            Reference::Ensemble(s) => s.meta.interval,
            Reference::Table(t) => t.interval,
        }
    }

    fn moments(&self) -> &BTreeMap<u32, MomentEstimate> {
        match self {
            Reference::Ensemble(s) => &s.factorial_moments,
            Reference::Table(t) => &t.moments,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportOptions {
    /// KS null quantile; comparisons at or above it fail.
    pub ks_threshold: f64,
    /// Moment gaps are allowed `z` combined standard errors...
    pub z: f64,
    /// ...plus `finite_n_factor / N` times the reference value when
    /// comparing a finite-`N` ensemble against a limit reference.
    pub finite_n_factor: f64,
    pub m_max: u32,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            ks_threshold: f64::NAN,
            z: 3.0,
            finite_n_factor: 3.0,
            m_max: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KsComparison {
    pub a: String,
    pub b: String,
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentComparison {
    pub ensemble: String,
    pub reference: String,
    pub m: u32,
    pub estimate: f64,
    pub se: f64,
    pub reference_estimate: f64,
    pub reference_se: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalityReport {
    pub interval: (f64, f64),
    pub options: ReportOptions,
    pub ks: Vec<KsComparison>,
    pub moments: Vec<MomentComparison>,
}

impl UniversalityReport {
    /// True iff no comparison that carries a verdict failed.
    pub fn passed(&self) -> bool {
        self.ks.iter().all(|c| c.verdict != Verdict::Fail)
            && self.moments.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

fn same_interval(a: (f64, f64), b: (f64, f64)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::IntervalMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Pairwise KS between the ensembles (and against an ensemble reference),
/// plus factorial moments `1..=m_max` against every reference.
pub fn universality_report(
    summaries: &[EnsembleSummary],
    references: &[Reference<'_>],
    opts: &ReportOptions,
) -> Result<UniversalityReport> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::InvalidInput("no ensembles to compare".into()))?;
    let interval = first.meta.interval;
    for s in summaries {
        same_interval(interval, s.meta.interval)?;
    }
    for r in references {
        same_interval(interval, r.interval())?;
    }
    let ks_verdict = |stat: f64, exploratory: bool| {
        if exploratory {
            Verdict::Exploratory
        } else if stat < opts.ks_threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    };
    let mut ks = Vec::new();
    for (i, a) in summaries.iter().enumerate() {
        for b in &summaries[i + 1..] {
            let stat = ks_two_sample(&a.counts, &b.counts)?.statistic;
            ks.push(KsComparison {
                a: a.meta.label(),
                b: b.meta.label(),
                statistic: stat,
                threshold: opts.ks_threshold,
                verdict: ks_verdict(stat, a.meta.exploratory || b.meta.exploratory),
            });
        }
    }
    let mut moments = Vec::new();
    for r in references {
        for s in summaries {
            if let Reference::Ensemble(e) = r {
                let stat = ks_two_sample(&s.counts, &e.counts)?.statistic;
                ks.push(KsComparison {
                    a: s.meta.label(),
                    b: r.label(),
                    statistic: stat,
                    threshold: opts.ks_threshold,
                    verdict: ks_verdict(stat, s.meta.exploratory || e.meta.exploratory),
                });
            }
            let allowance = match (s.meta.n, r) {
                (Some(n), Reference::Table(_)) => opts.finite_n_factor / n as f64,
                (Some(n), Reference::Ensemble(e)) if e.meta.n.is_none() => {
                    opts.finite_n_factor / n as f64
                }
                _ => 0.0,
            };
            for m in 1..=opts.m_max {
                let (Some(x), Some(y)) = (s.factorial_moments.get(&m), r.moments().get(&m)) else {
                    continue;
                };
                let gap = (x.estimate - y.estimate).abs();
                let tolerance =
                    opts.z * (x.se * x.se + y.se * y.se).sqrt() + allowance * y.estimate.abs();
                let verdict = if s.meta.exploratory {
                    Verdict::Exploratory
                } else if gap <= tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                moments.push(MomentComparison {
                    ensemble: s.meta.label(),
                    reference: r.label(),
                    m,
                    estimate: x.estimate,
                    se: x.se,
                    reference_estimate: y.estimate,
                    reference_se: y.se,
                    gap,
                    tolerance,
                    verdict,
                });
            }
        }
    }
    Ok(UniversalityReport {
        interval,
        options: opts.clone(),
        ks,
        moments,
    })
}
