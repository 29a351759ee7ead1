//! Formal logarithms `u log p + v log 2` with exact rational coefficients.
//!
//! Every radius and Gauss norm handled by the crate lives in the multiplicative
//! group generated by `p` and `2`, so its logarithm is such a combination and
//! can be ordered exactly.
//!
//! Termination of [`LogValue::compare`]: for an odd prime `p`, `log p` and
//! `log 2` are linearly independent over Q (a relation `a log p = b log 2`
//! with integers `a, b` not both zero would give `p^a = 2^b`, impossible by
//! unique factorisation). Hence a combination with coefficients not both zero
//! is a nonzero real, and enclosures of shrinking width eventually exclude 0.
//! Precision doubles on each round, so the loop always ends.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};
use rug::Integer;
use serde::{Deserialize, Serialize};

use super::interval::{ln_ratio, RationalInterval};
use super::prime::OddPrime;
use super::rational::{bits_for_width, format_rational, int, Rational};
use crate::error::{Error, Result};

static INITIAL_BITS: AtomicU32 = AtomicU32::new(24);

/// Precision cap for comparisons that are not covered by the independence
/// argument (those involving `(log p)^2`).
const QUADRATIC_MAX_BITS: u32 = 1 << 13;

/// Sets the starting width of the enclosures used by every comparison.
pub fn set_initial_enclosure_width(width: &Rational) -> Result<()> {
    if !width.is_positive() {
        return Err(Error::invalid("enclosure width must be positive"));
    }
    INITIAL_BITS.store(bits_for_width(width).max(1), AtomicOrdering::Relaxed);
    Ok(())
}

pub(crate) fn initial_bits() -> u32 {
    INITIAL_BITS.load(AtomicOrdering::Relaxed)
}

type LnCache = Mutex<HashMap<(u64, u32), RationalInterval>>;

fn ln_cache() -> &'static LnCache {
    static CACHE: OnceLock<LnCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ln(n / 2^floor(log2 n))` for `n >= 2`, or `ln 2` itself when `n == 2`.
fn ln_reduced(n: u64, bits: u32) -> RationalInterval {
    if let Some(iv) = ln_cache().lock().unwrap().get(&(n, bits)) {
        return iv.clone();
    }
    let iv = if n == 2 {
        ln_ratio(&Integer::from(2), &Integer::from(1), bits)
    } else {
        let k = 63 - n.leading_zeros();
        ln_ratio(&Integer::from(n), &(Integer::from(1) << k), bits)
    };
    let mut cache = ln_cache().lock().unwrap();
    if cache.len() > 1 << 16 {
        cache.clear();
    }
    cache.insert((n, bits), iv.clone());
    iv
}

/// Enclosure of `ln n` for a positive integer `n`, of width at most `2^-bits`.
pub fn ln_enclosure(n: u64, bits: u32) -> RationalInterval {
    assert!(n > 0, "ln 0 is undefined");
    if n == 1 {
        return RationalInterval::zero();
    }
    let k = 63 - n.leading_zeros();
    let prec = bits + 8;
    let mut acc = ln_reduced(2, prec).scale(&int(k as i64));
    if !n.is_power_of_two() {
        acc = acc.add(&ln_reduced(n, prec));
    }
    acc
}

/// Enclosure of `ln p` with width at most `2^-bits`.
pub fn ln_prime_enclosure(p: OddPrime, bits: u32) -> RationalInterval {
    LogValue::log_p(p).enclosure_bits(bits)
}

/// The real number `log_p * ln p + log_2 * ln 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogValue {
    #[serde(rename = "logp", with = "super::rational")]
    log_p: Rational,
    #[serde(rename = "log2", with = "super::rational")]
    log_2: Rational,
    #[serde(rename = "p")]
    prime: OddPrime,
}

impl LogValue {
    pub fn new(prime: OddPrime, log_p: Rational, log_2: Rational) -> Self {
        LogValue { log_p, log_2, prime }
    }

    pub fn zero(prime: OddPrime) -> Self {
        Self::new(prime, Rational::zero(), Rational::zero())
    }

    /// `ln p`.
    pub fn log_p(prime: OddPrime) -> Self {
        Self::new(prime, Rational::one(), Rational::zero())
    }

    /// `ln 2`, tagged with `prime`.
    pub fn log_2(prime: OddPrime) -> Self {
        Self::new(prime, Rational::zero(), Rational::one())
    }

    pub fn prime(&self) -> OddPrime {
        self.prime
    }

    pub fn coef_log_p(&self) -> &Rational {
        &self.log_p
    }

    pub fn coef_log_2(&self) -> &Rational {
        &self.log_2
    }

    pub fn is_zero(&self) -> bool {
        self.log_p.is_zero() && self.log_2.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.prime, &self.log_p * c, &self.log_2 * c)
    }

    fn assert_same_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "LogValue arithmetic across different primes");
    }

    /// Enclosure of the represented real of width at most `2^-bits`.
    pub fn enclosure_bits(&self, bits: u32) -> RationalInterval {
        if self.is_zero() {
            return RationalInterval::zero();
        }
        let p = self.prime.get();
        let k = 63 - p.leading_zeros();
        // u ln p + v ln 2 = (u k + v) ln 2 + u ln(p / 2^k)
        let c2 = &self.log_p * int(k as i64) + &self.log_2;
        let mag = (c2.abs() + self.log_p.abs() + Rational::one()).ceil_int();
        let prec = bits + mag.significant_bits() + 1;
        let mut acc = RationalInterval::zero();
        if !c2.is_zero() {
            acc = acc.add(&ln_reduced(2, prec).scale(&c2));
        }
        if !self.log_p.is_zero() {
            acc = acc.add(&ln_reduced(p, prec).scale(&self.log_p));
        }
        acc
    }

    /// Enclosure of width at most `width`; precision doubles until it fits.
    pub fn enclosure(&self, width: &Rational) -> RationalInterval {
        let mut bits = initial_bits().max(bits_for_width(width));
        loop {
            let iv = self.enclosure_bits(bits);
            if &iv.width() <= width {
                return iv;
            }
            bits *= 2;
        }
    }

    /// Sign of the represented real.
    pub fn sign(&self) -> Ordering {
        use Ordering::*;
        match (self.log_p.sign(), self.log_2.sign()) {
            (Equal, Equal) => Equal,
            (Greater, Greater) | (Greater, Equal) | (Equal, Greater) => Greater,
            (Less, Less) | (Less, Equal) | (Equal, Less) => Less,
            _ => {
                let mut bits = initial_bits();
                loop {
                    if let Some(s) = self.enclosure_bits(bits).sign() {
                        return s;
                    }
                    bits *= 2;
                }
            }
        }
    }

    /// Certified order of the two represented reals.
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        if self.prime != other.prime {
            return Err(Error::invalid(format!(
                "cannot compare log-values at different primes {} and {}",
                self.prime, other.prime
            )));
        }
        if self.log_2 == other.log_2 {
            return Ok(self.log_p.cmp(&other.log_p));
        }
        if self.log_p == other.log_p {
            return Ok(self.log_2.cmp(&other.log_2));
        }
        Ok((self - other).sign())
    }

    pub(crate) fn le(&self, other: &Self) -> bool {
        self.compare(other).expect("same prime") != Ordering::Greater
    }

    pub fn max(self, other: Self) -> Self {
        if self.le(&other) {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.le(&other) {
            self
        } else {
            other
        }
    }

    /// Floating-point approximation, for human-readable output only.
    pub fn approx(&self) -> f64 {
        self.log_p.to_f64() * (self.prime.get() as f64).ln()
            + self.log_2.to_f64() * std::f64::consts::LN_2
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}*log{} + {}*log2",
            format_rational(&self.log_p),
            self.prime,
            format_rational(&self.log_2)
        )
    }
}

impl Add<&LogValue> for &LogValue {
    type Output = LogValue;

    fn add(self, rhs: &LogValue) -> LogValue {
        self.assert_same_prime(rhs);
        LogValue::new(self.prime, &self.log_p + &rhs.log_p, &self.log_2 + &rhs.log_2)
    }
}

impl Sub<&LogValue> for &LogValue {
    type Output = LogValue;

    fn sub(self, rhs: &LogValue) -> LogValue {
        self.assert_same_prime(rhs);
        LogValue::new(self.prime, &self.log_p - &rhs.log_p, &self.log_2 - &rhs.log_2)
    }
}

impl Neg for &LogValue {
    type Output = LogValue;

    fn neg(self) -> LogValue {
        LogValue::new(self.prime, -&self.log_p, -&self.log_2)
    }
}

/// `linear + sq * (log p)^2`: the shape of the closed-form radius bounds,
/// which leave the group generated by `p` and `2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogQuadratic {
    pub linear: LogValue,
    #[serde(rename = "logpSquared", with = "super::rational")]
    pub log_p_sq: Rational,
}

impl LogQuadratic {
    pub fn enclosure_bits(&self, bits: u32) -> RationalInterval {
        // ln p < 64, so the square amplifies the width of ln p by at most 128.
        let mag = (self.log_p_sq.abs() + Rational::one()).ceil_int();
        let lp = ln_prime_enclosure(self.linear.prime(), bits + mag.significant_bits() + 8);
        let sq = lp.mul(&lp).scale(&self.log_p_sq);
        self.linear.enclosure_bits(bits + 1).add(&sq)
    }

    /// Order of this quantity relative to `value`; the precision is capped
    /// because no independence result guarantees separation here.
    pub fn compare_linear(&self, value: &LogValue) -> Result<Ordering> {
        if value.prime() != self.linear.prime() {
            return Err(Error::invalid("cannot compare log-values at different primes"));
        }
        if self.log_p_sq.is_zero() {
            return self.linear.compare(value);
        }
        let diff = LogQuadratic {
            linear: &self.linear - value,
            log_p_sq: self.log_p_sq.clone(),
        };
        let mut bits = initial_bits();
        while bits <= QUADRATIC_MAX_BITS {
            if let Some(s) = diff.enclosure_bits(bits).sign() {
                return Ok(s);
            }
            bits *= 2;
        }
        Err(Error::Undecided {
            what: format!("{value} against a (log p)^2 bound"),
            bits: QUADRATIC_MAX_BITS,
        })
    }

    pub fn approx(&self) -> f64 {
        let l = (self.linear.prime().get() as f64).ln();
        self.linear.approx() + self.log_p_sq.to_f64() * l * l
    }
}
