//! Counting and locating real zeros on a compact interval.
//!
//! Two independent counters: a derivative-aware grid scan with bracketed
//! refinement ([`count_scan`]), and the companion route through the
//! algebraic polynomial in `z = e^{i t/N}` ([`count_companion`]). The Kac
//! regularized count ([`kac_estimate`]) gives a third, integral view.

mod companion;
mod kac;
mod scan;

pub use companion::{aberth_roots, count_companion, trig_to_algebraic, AberthOptions};
pub use kac::{kac_estimate, KAC_ABS_TOL};
pub use scan::{count_scan, level_crossings, ScanOptions};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::trigpoly::TrigPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Scan,
    Companion,
    Kac,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Scan => "scan",
            Method::Companion => "companion",
            Method::Kac => "kac",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Flag {
    /// A local extremum came within tolerance of zero.
    NearTangency,
    /// A zero sits on an end of the closed interval.
    EndpointZero,
    /// Scan and companion counts differ.
    Disagreement,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::NearTangency => "NearTangency",
            Flag::EndpointZero => "EndpointZero",
            Flag::Disagreement => "Disagreement",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub count: usize,
    /// Strictly increasing, inside the closed interval.
    pub roots: Vec<f64>,
    pub method: Method,
    pub flags: BTreeSet<Flag>,
}

impl ZeroReport {
    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// Flags joined with `|`, empty if none.
    pub fn flags_label(&self) -> String {
        self.flags
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Both counters on the same instance.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub scan: ZeroReport,
    pub companion: ZeroReport,
}

impl CrossCheck {
    pub fn agree(&self) -> bool {
        self.scan.count == self.companion.count
    }

    /// Companion count carrying the union of both flag sets, plus
    /// `Disagreement` when the counts differ.
    pub fn merged(&self) -> ZeroReport {
        let mut flags: BTreeSet<Flag> = self.scan.flags.union(&self.companion.flags).copied().collect();
        if !self.agree() {
            flags.insert(Flag::Disagreement);
        }
        ZeroReport {
            flags,
            ..self.companion.clone()
        }
    }
}

pub fn cross_check(p: &TrigPoly, lo: f64, hi: f64, opts: &ScanOptions) -> Result<CrossCheck> {
    Ok(CrossCheck {
        scan: count_scan(p, lo, hi, opts)?,
        companion: count_companion(p, lo, hi)?,
    })
}

/// `x (x-1) ... (x-m+1)`, with `x^[0] = 1`.
pub fn falling_factorial(x: u64, m: u64) -> u128 {
    if m > x {
        return 0;
    }
    (0..m).fold(1u128, |acc, i| acc * (x - i) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 2), 20);
        assert_eq!(falling_factorial(3, 4), 0);
        assert_eq!(falling_factorial(3, 3), 6);
        assert_eq!(falling_factorial(7, 0), 1);
        assert_eq!(falling_factorial(0, 0), 1);
    }

    #[test]
    fn flags_label_is_sorted() {
        let r = ZeroReport {
            count: 0,
            roots: vec![],
            method: Method::Scan,
            flags: [Flag::EndpointZero, Flag::NearTangency].into_iter().collect(),
        };
        assert_eq!(r.flags_label(), "NearTangency|EndpointZero");
    }
}
