//! Length-of-stay classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-way LOS class with codes `0 < 1 < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LosClass {
    Short = 0,
    Medium = 1,
    Long = 2,
}

impl LosClass {
    pub const ALL: [LosClass; 3] = [LosClass::Short, LosClass::Medium, LosClass::Long];
    pub const COUNT: usize = 3;

    #[inline]
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<LosClass> {
        LosClass::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LosClass::Short => "short",
            LosClass::Medium => "medium",
            LosClass::Long => "long",
        }
    }
}

/// Half-open class boundaries in days: `[0, short_upper)`, `[short_upper, long_lower)`, `[long_lower, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub short_upper: f64,
    pub long_lower: f64,
}

impl Default for BinEdges {
    fn default() -> Self {
        BinEdges {
            short_upper: 2.0,
            long_lower: 7.0,
        }
    }
}

impl BinEdges {
    pub fn validate(&self) -> Result<()> {
        if !(self.short_upper > 0.0 && self.short_upper < self.long_lower && self.long_lower.is_finite()) {
            return Err(Error::invalid(
                "bin_edges",
                alloc::format!(
                    "need 0 < short_upper < long_lower < inf, got [{}, {}]",
                    self.short_upper,
                    self.long_lower
                ),
            ));
        }
        Ok(())
    }

    /// Bins a strictly positive length of stay.
    pub fn bin(&self, los_days: f64) -> Result<LosClass> {
        if !(los_days > 0.0) || !los_days.is_finite() {
            return Err(Error::invalid(
                "los",
                alloc::format!("must be positive and finite, got {los_days}"),
            ));
        }
        Ok(self.bin_nonnegative(los_days))
    }

    /// Bins a duration that may be zero (remaining stay at discharge).
    pub fn bin_nonnegative(&self, days: f64) -> LosClass {
        if days < self.short_upper {
            LosClass::Short
        } else if days < self.long_lower {
            LosClass::Medium
        } else {
            LosClass::Long
        }
    }
}

/// Bins with the default `[0, 2)`, `[2, 7)`, `[7, inf)` day edges.
pub fn bin_los(los_days: f64) -> Result<LosClass> {
    BinEdges::default().bin(los_days)
}
