//! Gauss norms `||f||_r = max_m |a_m| r^m` of truncations, in the log domain.
//!
//! For a truncation (a polynomial) the value is exact; for the full series it
//! extends, it is a lower bound. Bound checks on truncations are therefore
//! falsification tests: they can refute a claimed norm bound, never prove it.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::exactnum::{int, valuation_unchecked, LogValue, PadicVal, Rational};
use crate::series::TruncSeries;

/// `log ||f||_r`, or minus infinity for the zero truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormBound {
    MinusInfinity,
    Finite(LogValue),
}

impl NormBound {
    pub fn value(&self) -> Option<&LogValue> {
        match self {
            NormBound::MinusInfinity => None,
            NormBound::Finite(v) => Some(v),
        }
    }

    /// `self <= bound`; minus infinity always passes.
    pub fn le(&self, bound: &LogValue) -> bool {
        match self {
            NormBound::MinusInfinity => true,
            NormBound::Finite(v) => v.le(bound),
        }
    }
}

impl fmt::Display for NormBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormBound::MinusInfinity => f.write_str("-inf"),
            NormBound::Finite(v) => v.fmt(f),
        }
    }
}

impl Serialize for NormBound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NormBound::MinusInfinity => s.serialize_str("-inf"),
            NormBound::Finite(v) => v.serialize(s),
        }
    }
}

/// `log(|a_m| r^m)` for a nonzero coefficient.
fn term_log(c: &Rational, m: usize, logr: &LogValue) -> LogValue {
    let p = logr.prime();
    let v = match valuation_unchecked(c, p.get()) {
        PadicVal::Finite(v) => v,
        PadicVal::Infinity => unreachable!("zero coefficients are skipped"),
    };
    let abs = LogValue::new(p, int(-v), Rational::zero());
    &abs + &logr.scale(&int(m as i64))
}

pub fn gauss_norm_log(f: &TruncSeries, logr: &LogValue) -> NormBound {
    let mut best: Option<LogValue> = None;
    for (m, c) in f.terms() {
        let t = term_log(c, m, logr);
        best = Some(match best {
            None => t,
            Some(b) => b.max(t),
        });
    }
    best.map_or(NormBound::MinusInfinity, NormBound::Finite)
}

/// First coefficient index `m` with `|a_m| r^m > bound`, if any.
pub fn first_violation(f: &TruncSeries, bound: &LogValue, logr: &LogValue) -> Option<usize> {
    assert_eq!(bound.prime(), logr.prime(), "bound and radius at different primes");
    f.terms()
        .find(|(m, c)| term_log(c, *m, logr).compare(bound).unwrap() == Ordering::Greater)
        .map(|(m, _)| m)
}

/// `||f||_r <= exp(bound)` on the truncation.
pub fn norm_bounded_by(f: &TruncSeries, bound: &LogValue, logr: &LogValue) -> bool {
    first_violation(f, bound, logr).is_none()
}
