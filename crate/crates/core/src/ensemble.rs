//! Replicated experiments. Replication `i` always draws from stream
//! `(seed, i)` and results come back in index order, so the output does not
//! depend on the number of workers.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::{make_stream, sample_coeffs, CoeffDist, RngStream};
use crate::error::{Error, Result};
use crate::sincproc::{count_zeros_w, sample_spectral};
use crate::trigpoly::TrigPoly;
use crate::zerocount::{count_companion, count_scan, cross_check, Flag, ScanOptions, ZeroReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Scan,
    Companion,
    /// Both counters; the companion count is kept and disagreements are
    /// flagged.
    Both,
}

impl std::str::FromStr for CountMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scan" => Ok(Self::Scan),
            "companion" => Ok(Self::Companion),
            "both" => Ok(Self::Both),
            _ => Err(Error::InvalidInput(format!(
                "unknown method '{s}' (expected scan, companion or both)"
            ))),
        }
    }
}

impl std::fmt::Display for CountMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Scan => "scan",
            Self::Companion => "companion",
            Self::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replication {
    pub index: usize,
    /// `None` if counting failed numerically.
    pub count: Option<usize>,
    pub method: String,
    pub flags: BTreeSet<Flag>,
    pub failure: Option<String>,
}

impl Replication {
    fn from_report(index: usize, method: String, r: Result<ZeroReport>) -> Self {
        match r {
            Ok(r) => Self {
                index,
                count: Some(r.count),
                method,
                flags: r.flags,
                failure: None,
            },
            Err(e) => Self {
                index,
                count: None,
                method,
                flags: BTreeSet::new(),
                failure: Some(e.to_string()),
            },
        }
    }

    pub fn flags_label(&self) -> String {
        let mut parts: Vec<String> = self.flags.iter().map(|f| f.to_string()).collect();
        if self.failure.is_some() {
            parts.push("Failed".into());
        }
        parts.join("|")
    }
}

/// Run `f(stream_i, i)` for `i in 0..reps`, on `workers` threads if given
/// (otherwise the global rayon pool).
pub fn replicate<T, F>(reps: usize, seed: u64, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream, usize) -> T + Sync,
{
    let run = || {
        (0..reps)
            .into_par_iter()
            .map(|i| f(&mut make_stream(seed, i as u64), i))
            .collect()
    };
    match workers {
        None => Ok(run()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub n: usize,
    pub interval: (f64, f64),
    pub dist: CoeffDist,
    pub replications: usize,
    pub seed: u64,
    pub method: CountMethod,
    pub scan: ScanOptions,
    /// Use this polynomial for every replication instead of sampling.
    pub pinned: Option<TrigPoly>,
    pub workers: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(n: usize, interval: (f64, f64), dist: CoeffDist, replications: usize, seed: u64) -> Self {
        Self {
            n,
            interval,
            dist,
            replications,
            seed,
            method: CountMethod::Scan,
            scan: ScanOptions::default(),
            pinned: None,
            workers: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if self.replications == 0 {
            return Err(Error::InvalidInput("need at least one replication".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("empty or invalid interval [{lo}, {hi}]")));
        }
        if self.n == 0 && self.pinned.is_none() {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        Ok(())
    }
}

fn count_one(p: &TrigPoly, spec: &EnsembleSpec) -> Result<ZeroReport> {
    let (lo, hi) = spec.interval;
    match spec.method {
        CountMethod::Scan => count_scan(p, lo, hi, &spec.scan),
        CountMethod::Companion => count_companion(p, lo, hi),
        CountMethod::Both => cross_check(p, lo, hi, &spec.scan).map(|c| c.merged()),
    }
}

/// Zero counts of `X_N` on the interval, one per replication.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Vec<Replication>> {
    spec.validate()?;
    let method = spec.method.to_string();
    replicate(spec.replications, spec.seed, spec.workers, |stream, i| {
        let poly = match &spec.pinned {
            Some(p) => Ok(p.clone()),
            None => sample_coeffs(&spec.dist, spec.n, stream).and_then(|c| TrigPoly::from_interleaved(&c)),
        };
        Replication::from_report(i, method.clone(), poly.and_then(|p| count_one(&p, spec)))
    })
}

#[derive(Clone, Debug)]
pub struct SincSpec {
    pub frequencies: usize,
    pub interval: (f64, f64),
    pub replications: usize,
    pub seed: u64,
    pub scan: ScanOptions,
    pub workers: Option<usize>,
}

/// Zero counts of spectral sample paths of the sinc process.
pub fn run_sinc_ensemble(spec: &SincSpec) -> Result<Vec<Replication>> {
    let (lo, hi) = spec.interval;
    if spec.replications == 0 || !(lo < hi) {
        return Err(Error::InvalidInput("need replications >= 1 and lo < hi".into()));
    }
    replicate(spec.replications, spec.seed, spec.workers, |stream, i| {
        let r = sample_spectral(spec.frequencies, stream).and_then(|p| count_zeros_w(&p, lo, hi, &spec.scan));
        Replication::from_report(i, "scan".into(), r)
    })
}

/// Counts of the successful replications, in index order.
pub fn successful_counts(reps: &[Replication]) -> Vec<u64> {
    reps.iter().filter_map(|r| r.count.map(|c| c as u64)).collect()
}

pub fn failure_rate(reps: &[Replication]) -> f64 {
    if reps.is_empty() {
        return 0.0;
    }
    reps.iter().filter(|r| r.failure.is_some()).count() as f64 / reps.len() as f64
}
