//! The universal coefficient type and its canonical text form.
//!
//! Rationals travel through JSON as `"num/den"` strings in lowest terms, with
//! the denominator omitted when it is one (`"-3/7"`, `"2"`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rug::Integer;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

/// Exact arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
///
/// A thin owned-value wrapper over GMP's `mpq_t`, so that `&a * &b` and
/// friends produce a `Rational` directly.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(rug::Rational);

impl Rational {
    /// `n / d` in lowest terms; panics when `d` is zero.
    pub fn new(n: Integer, d: Integer) -> Self {
        assert!(d.cmp0() != Ordering::Equal, "zero denominator");
        Rational(rug::Rational::from((n, d)))
    }

    pub fn from_integer(n: Integer) -> Self {
        Rational(rug::Rational::from(n))
    }

    pub fn numer(&self) -> &Integer {
        self.0.numer()
    }

    pub fn denom(&self) -> &Integer {
        self.0.denom()
    }

    pub fn into_numer_denom(self) -> (Integer, Integer) {
        self.0.into_numer_denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn sign(&self) -> Ordering {
        self.0.cmp0()
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.clone().abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.clone().recip())
    }

    pub fn floor_int(&self) -> Integer {
        Integer::from(self.0.floor_ref())
    }

    pub fn ceil_int(&self) -> Integer {
        Integer::from(self.0.ceil_ref())
    }

    /// `self^e` for any integer exponent; panics on `0^e` with `e < 0`.
    pub fn pow(&self, e: i32) -> Self {
        use rug::ops::Pow;
        if e < 0 {
            assert!(!self.is_zero(), "negative power of zero");
        }
        Rational(rug::Rational::from((&self.0).pow(e)))
    }

    /// Nearest double, for human-readable output only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn as_rug(&self) -> &rug::Rational {
        &self.0
    }
}

impl From<Integer> for Rational {
    fn from(n: Integer) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational(rug::Rational::from(n))
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(rug::Rational::new())
    }

    fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(rug::Rational::from(1))
    }

    fn is_one(&self) -> bool {
        self.0 == 1
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, r: &Rational) -> Rational {
                Rational(rug::Rational::from($tr::$m(&self.0, &r.0)))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(mut self, r: &Rational) -> Rational {
                $atr::$am(&mut self.0, &r.0);
                self
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(mut self, r: Rational) -> Rational {
                $atr::$am(&mut self.0, r.0);
                self
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, r: Rational) -> Rational {
                Rational(rug::Rational::from($tr::$m(&self.0, &r.0)))
            }
        }
        impl $atr<&Rational> for Rational {
            fn $am(&mut self, r: &Rational) {
                $atr::$am(&mut self.0, &r.0);
            }
        }
        impl $atr<Rational> for Rational {
            fn $am(&mut self, r: Rational) {
                $atr::$am(&mut self.0, r.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(rug::Rational::from(-&self.0))
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, q| acc + q)
    }
}

impl Sum<Rational> for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, q| acc + q)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self))
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Integer::from(n), Integer::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from(n)
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Rational {
    let shift = u32::try_from(e.unsigned_abs()).expect("exponent fits in u32");
    let p = Integer::from(1) << shift;
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(Integer::from(1), p)
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom() == &1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn parse_integer(s: &str) -> Option<Integer> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses `"n"`, `"n/d"`, accepting a leading ASCII or Unicode minus.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse(format!("malformed rational {s:?}"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t.as_str(), "1"),
    };
    let n = parse_integer(n).ok_or_else(bad)?;
    let d = parse_integer(d).ok_or_else(bad)?;
    match d.cmp0() {
        Ordering::Equal => Err(Error::Parse(format!("zero denominator in {s:?}"))),
        Ordering::Less => Err(Error::Parse(format!("negative denominator in {s:?}"))),
        Ordering::Greater => Ok(Rational::new(n, d)),
    }
}

pub(crate) fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(serde::de::Error::custom)
}

/// Smallest `k` with `2^-k <= w`, for positive `w`.
pub(crate) fn bits_for_width(w: &Rational) -> u32 {
    debug_assert!(w.is_positive());
    let mut k = 0u32;
    let mut scaled = w.clone();
    while scaled < Rational::one() {
        scaled *= int(2);
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_form() {
        assert_eq!(format_rational(&rat(-6, 14)), "-3/7");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&int(0)), "0");
        assert_eq!(parse_rational("\u{2212}3/7").unwrap(), rat(-3, 7));
        assert_eq!(parse_rational(" 10/4 ").unwrap(), rat(5, 2));
        assert_eq!(parse_rational("2").unwrap(), int(2));
    }

    #[test]
    fn rejects_malformed() {
        for s in ["", "1/0", "a/2", "1/-2", "1//2", "1 2", "0x10"] {
            assert!(matches!(parse_rational(s), Err(Error::Parse(_))), "{s}");
        }
    }

    #[test]
    fn width_bits() {
        assert_eq!(bits_for_width(&rat(1, 1000)), 10);
        assert_eq!(bits_for_width(&rat(1, 1024)), 10);
        assert_eq!(bits_for_width(&int(3)), 0);
    }

    #[test]
    fn arithmetic_and_rounding() {
        let a = rat(7, 3);
        assert_eq!(&a * &rat(3, 7), int(1));
        assert_eq!(a.clone() - int(2), rat(1, 3));
        assert_eq!(-&a, rat(-7, 3));
        assert_eq!(a.floor_int(), 2);
        assert_eq!((-&a).floor_int(), -3);
        assert_eq!(a.ceil_int(), 3);
        assert_eq!(a.pow(-2), rat(9, 49));
        assert_eq!(pow2(-3), rat(1, 8));
        assert_eq!(pow2(4), int(16));
    }
}
