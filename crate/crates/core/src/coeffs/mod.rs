//! Random streams and standardized coefficient laws for the ensemble.

mod exppsi;
mod rng;

pub use exppsi::{ExpPsiSampler, Psi, PsiFn, SamplerStrategy};
pub use rng::{derive_seed, make_stream, RngStream};

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistKind {
    Rademacher,
    UniformScaled,
    Gaussian,
    Cauchy,
    ExpPsi,
}

impl DistKind {
    /// Whether the law satisfies the mean-zero, unit-variance hypothesis.
    pub fn is_conforming(self) -> bool {
        !matches!(self, DistKind::Cauchy)
    }
}

/// A coefficient law before standardization.
#[derive(Clone, Debug)]
pub enum RawDist {
    Rademacher,
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
    ExpPsi(Psi),
}

/// A coefficient law with a sampling procedure. Every variant except
/// `Cauchy` is expected to have mean 0 and variance 1 once produced by
/// [`standardize`].
#[derive(Clone, Debug)]
pub enum CoeffDist {
    Rademacher,
    UniformScaled { half_width: f64 },
    Gaussian { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
    ExpPsi(Arc<ExpPsiSampler>),
}

impl CoeffDist {
    pub fn kind(&self) -> DistKind {
        match self {
            CoeffDist::Rademacher => DistKind::Rademacher,
            CoeffDist::UniformScaled { .. } => DistKind::UniformScaled,
            CoeffDist::Gaussian { .. } => DistKind::Gaussian,
            CoeffDist::Cauchy { .. } => DistKind::Cauchy,
            CoeffDist::ExpPsi(_) => DistKind::ExpPsi,
        }
    }

    pub fn is_conforming(&self) -> bool {
        self.kind().is_conforming()
    }

    pub fn rademacher() -> Self {
        CoeffDist::Rademacher
    }

    pub fn uniform() -> Self {
        CoeffDist::UniformScaled {
            half_width: 3f64.sqrt(),
        }
    }

    pub fn gaussian() -> Self {
        CoeffDist::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn cauchy() -> Self {
        CoeffDist::Cauchy {
            location: 0.0,
            scale: 1.0,
        }
    }

    /// Parse `rademacher | uniform | gaussian | cauchy | exppsi:<file>`.
    ///
    /// `cauchy` is only accepted when `exploratory` is set.
    pub fn from_spec(spec: &str, exploratory: bool) -> Result<Self> {
        let spec = spec.trim();
        let raw = match spec {
            "rademacher" => RawDist::Rademacher,
            "uniform" => RawDist::Uniform { lo: -1.0, hi: 1.0 },
            "gaussian" => RawDist::Gaussian { mean: 0.0, sd: 1.0 },
            "cauchy" => RawDist::Cauchy {
                location: 0.0,
                scale: 1.0,
            },
            _ => match spec.strip_prefix("exppsi:") {
                Some(file) if !file.is_empty() => RawDist::ExpPsi(Psi::from_file(Path::new(file))?),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "unknown distribution `{spec}` (expected rademacher, uniform, gaussian, cauchy or exppsi:<file>)"
                    )))
                }
            },
        };
        standardize(raw, exploratory)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        Ok(match self {
            CoeffDist::Rademacher => {
                if rng.next_bit() {
                    1.0
                } else {
                    -1.0
                }
            }
            CoeffDist::UniformScaled { half_width } => half_width * (2.0 * rng.uniform() - 1.0),
            CoeffDist::Gaussian { mean, sd } => mean + sd * rng.normal(),
            CoeffDist::Cauchy { location, scale } => {
                location + scale * (std::f64::consts::PI * (rng.uniform_open() - 0.5)).tan()
            }
            CoeffDist::ExpPsi(s) => s.sample(rng)?,
        })
    }
}

impl fmt::Display for CoeffDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffDist::Rademacher => write!(f, "rademacher"),
            CoeffDist::UniformScaled { .. } => write!(f, "uniform"),
            CoeffDist::Gaussian { .. } => write!(f, "gaussian"),
            CoeffDist::Cauchy { .. } => write!(f, "cauchy"),
            CoeffDist::ExpPsi(s) => write!(f, "exppsi:{}", s.label()),
        }
    }
}

impl RngStream {
    fn next_bit(&mut self) -> bool {
        use rand::RngCore;
        self.next_u64() >> 63 == 1
    }
}

/// Rescale a raw law to mean 0 and variance 1.
///
/// Uniform on any `[lo, hi]` becomes uniform on `[-sqrt 3, sqrt 3]`. Cauchy has
/// no variance; with `exploratory` it is mapped to the standard Cauchy law,
/// otherwise it is rejected.
pub fn standardize(raw: RawDist, exploratory: bool) -> Result<CoeffDist> {
    match raw {
        RawDist::Rademacher => Ok(CoeffDist::Rademacher),
        RawDist::Uniform { lo, hi } => {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidInput(format!("empty uniform range [{lo}, {hi}]")));
            }
            Ok(CoeffDist::uniform())
        }
        RawDist::Gaussian { sd, .. } => {
            if !(sd > 0.0) {
                return Err(Error::InvalidInput(format!("gaussian sd must be positive, got {sd}")));
            }
            Ok(CoeffDist::gaussian())
        }
        RawDist::Cauchy { scale, .. } => {
            if !exploratory {
                return Err(Error::NonConforming("cauchy".into()));
            }
            if !(scale > 0.0) {
                return Err(Error::InvalidInput(format!("cauchy scale must be positive, got {scale}")));
            }
            Ok(CoeffDist::cauchy())
        }
        RawDist::ExpPsi(psi) => Ok(CoeffDist::ExpPsi(Arc::new(ExpPsiSampler::new(psi)?))),
    }
}

/// `2n` iid draws, laid out as `(a_1..a_n, b_1..b_n)`.
pub fn sample_coeffs(dist: &CoeffDist, n: usize, stream: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one coefficient pair".into()));
    }
    (0..2 * n).map(|_| dist.sample(stream)).collect()
}
