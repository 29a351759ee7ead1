//! Closed intervals with rational endpoints and certified enclosures of
//! logarithms of rationals.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use rug::Integer;
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use super::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RationalInterval { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        RationalInterval { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if c.is_negative() {
            RationalInterval { lo: b, hi: a }
        } else {
            RationalInterval { lo: a, hi: b }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        RationalInterval { lo, hi }
    }

    /// Snaps both endpoints outward onto the grid `2^-bits * Z`.
    pub fn round_outward(&self, bits: u32) -> Self {
        let scale = Integer::from(1) << bits;
        let s = Rational::from_integer(scale.clone());
        let lo = (&self.lo * &s).floor_int();
        let hi = (&self.hi * &s).ceil_int();
        RationalInterval {
            lo: Rational::new(lo, scale.clone()),
            hi: Rational::new(hi, scale),
        }
    }

    /// Order of two intervals when they are disjoint; `None` when they overlap.
    pub fn separate(&self, other: &Self) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Sign of every point of the interval, if uniform.
    pub fn sign(&self) -> Option<Ordering> {
        self.separate(&Self::zero())
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl Serialize for RationalInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&format_rational(&self.lo))?;
        t.serialize_element(&format_rational(&self.hi))?;
        t.end()
    }
}

/// Enclosure of `ln(a/b)` for integers `a > b > 0`, of width at most `2^-bits`.
///
/// Uses `ln(a/b) = 2 atanh(z)` with `z = (a-b)/(a+b)`, summing
/// `z^(2j+1)/(2j+1)` in fixed point with floor/ceil per term, and closes the
/// upper end with the geometric tail bound `z^(2J+1) / ((2J+1)(1-z^2))`.
pub(crate) fn ln_ratio(a: &Integer, b: &Integer, bits: u32) -> RationalInterval {
    assert!(b.cmp0() == Ordering::Greater && a > b);
    // 16 guard bits absorb the per-term rounding (one ulp each) and the factor 2.
    let prec = bits + 16;
    let n = Integer::from(a - b);
    let d = Integer::from(a + b);
    let n2 = Integer::from(&n * &n);
    let d2 = Integer::from(&d * &d);
    let gap = Integer::from(&d2 - &n2);

    let mut num_pow = n.clone();
    let mut den_pow = d.clone();
    let mut lo = Integer::new();
    let mut hi = Integer::new();
    let mut j: u64 = 0;
    loop {
        let den = Integer::from(&den_pow * (2 * j + 1));
        let (q, r) = Integer::from(&num_pow << prec).div_rem(den);
        if r.cmp0() != Ordering::Equal {
            hi += 1;
        }
        hi += &q;
        lo += q;
        num_pow *= &n2;
        den_pow *= &d2;
        j += 1;
        let top = Integer::from(&num_pow * &d2) << prec;
        let bottom = Integer::from(&den_pow * (2 * j + 1)) * &gap;
        let tail = top.div_rem_ceil(bottom).0;
        if tail <= 1 {
            hi += tail;
            break;
        }
    }
    let scale = Integer::from(1) << (prec - 1);
    RationalInterval {
        lo: Rational::new(lo, scale.clone()),
        hi: Rational::new(hi, scale),
    }
}
