//! Extended reals for divergences and information densities.
//!
//! Relative entropies return `Infinity` on support violations and information
//! densities return `NegInfinity` on vanishing numerators, so both rays get a
//! dedicated variant instead of a sentinel float.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    /// Finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            _ => None,
        }
    }

    /// Panics on the infinite variants; for call sites that have already
    /// established finiteness.
    pub fn expect_finite(&self, what: &str) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::Infinity => panic!("{what}: unexpectedly +inf"),
            ExtReal::NegInfinity => panic!("{what}: unexpectedly -inf"),
        }
    }

    /// Collapse to f64 using IEEE infinities (for reports and CSV output).
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::Infinity => f64::INFINITY,
            ExtReal::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (NegInfinity, NegInfinity) | (Infinity, Infinity) => Some(Ordering::Equal),
            (NegInfinity, _) | (_, Infinity) => Some(Ordering::Less),
            (_, NegInfinity) | (Infinity, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinity => write!(f, "inf"),
            ExtReal::NegInfinity => write!(f, "-inf"),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::Finite(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        assert!(ExtReal::NegInfinity < ExtReal::Finite(-1e30));
        assert!(ExtReal::Finite(1e30) < ExtReal::Infinity);
        assert!(ExtReal::Finite(0.0) < ExtReal::Finite(1.0));
        assert_eq!(
            ExtReal::Finite(2.0).min(ExtReal::Infinity),
            ExtReal::Finite(2.0)
        );
    }
}
