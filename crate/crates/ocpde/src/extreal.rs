//! Extended real values for cellwise function evaluation.
//!
//! Cell pieces may be flagged plus or minus infinity, so evaluation returns
//! a three-way value with a total order. Differences are only formed where
//! they are determinate; an infinity-minus-infinity combination is refused
//! rather than silently propagated.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExtRealError {
    #[error("indeterminate difference: infinity minus infinity")]
    IndeterminateDifference,
    #[error("value is NaN")]
    NotANumber,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(v: f64) -> Result<ExtReal, ExtRealError> {
        if v.is_nan() {
            return Err(ExtRealError::NotANumber);
        }
        if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => *v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Difference with the indeterminate cases rejected. Determinate
    /// infinite differences come back as the signed infinity.
    pub fn sub(self, other: ExtReal) -> Result<ExtReal, ExtRealError> {
        use ExtReal::*;
        match (self, other) {
            (PosInf, PosInf) | (NegInf, NegInf) => Err(ExtRealError::IndeterminateDifference),
            (PosInf, _) | (_, NegInf) => Ok(PosInf),
            (NegInf, _) | (_, PosInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(Finite(a - b)),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_total(other))
    }
}

impl ExtReal {
    fn cmp_total(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("finite values are never NaN"),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}
