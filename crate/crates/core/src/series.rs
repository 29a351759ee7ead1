//! Truncated formal power series over Q, and the two-variable families
//! `c(X1, X2) = sum_m c_m(X1) X2^m` built from them.
//!
//! A [`TruncSeries`] of order `N` stores the coefficients of `X^0 ..= X^N`; the
//! order is part of the value and every binary operation truncates to the
//! smaller order of its operands.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, int, parse_rational, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncSeries {
    coeffs: Vec<Rational>,
}

impl TruncSeries {
    /// Series with the given coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        TruncSeries { coeffs }
    }

    /// Sparse constructor. Terms above `order` are truncated away.
    pub fn from_terms<I>(terms: I, order: usize) -> Self
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut s = Self::zero(order);
        for (e, c) in terms {
            if e <= order {
                s.coeffs[e] += c;
            }
        }
        s
    }

    pub fn zero(order: usize) -> Self {
        TruncSeries {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(0, Rational::one(), order)
    }

    pub fn x(order: usize) -> Self {
        Self::monomial(1, Rational::one(), order)
    }

    pub fn monomial(exp: usize, c: Rational, order: usize) -> Self {
        Self::from_terms([(exp, c)], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `X^m`; panics above the order.
    pub fn coeff(&self, m: usize) -> &Rational {
        &self.coeffs[m]
    }

    pub fn set_coeff(&mut self, m: usize, c: Rational) {
        self.coeffs[m] = c;
    }

    /// Nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    /// Index of the first nonzero coefficient, `None` for the zero truncation.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// True when the series vanishes to order at least `k` (zero always does).
    pub fn vanishes_to(&self, k: usize) -> bool {
        self.valuation().is_none_or(|v| v >= k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Drops coefficients above `order`; never raises the order.
    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        TruncSeries {
            coeffs: self.coeffs[..=n].to_vec(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|a| a * c)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// `x * f'(x)`, same order.
    pub fn euler(&self) -> Self {
        TruncSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| c * int(m as i64))
                .collect(),
        }
    }

    /// `f'`, of order one less (order 0 stays 0 and is then the zero series).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        TruncSeries {
            coeffs: (1..=self.order()).map(|m| &self.coeffs[m] * int(m as i64)).collect(),
        }
    }

    /// `f / X`; requires `f(0) = 0` and loses one order.
    pub fn div_x(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::invalid("division by X needs a vanishing constant term"));
        }
        if self.order() == 0 {
            return Ok(Self::zero(0));
        }
        Ok(TruncSeries {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// `X * f`, gaining one order.
    pub fn mul_x(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        TruncSeries { coeffs }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul_trunc(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let (f, df) = integer_form(&self.coeffs[..=n]);
        let (g, dg) = integer_form(&other.coeffs[..=n]);
        let gi: Vec<usize> = (0..=n).filter(|&j| g[j].cmp0() != std::cmp::Ordering::Equal).collect();
        let mut h = vec![Integer::new(); n + 1];
        for (i, fi) in f.iter().enumerate() {
            if fi.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            for &j in &gi {
                if i + j > n {
                    break;
                }
                h[i + j] += fi * &g[j];
            }
        }
        let den = df * &dg;
        TruncSeries {
            coeffs: h.into_iter().map(|c| Rational::new(c, den.clone())).collect(),
        }
    }

    /// `f^k` in the truncated ring.
    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one(self.order());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_trunc(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_trunc(&base);
            }
        }
        acc
    }

    /// `f(g(X))` by Horner's rule in the truncated ring; needs `g(0) = 0`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::invalid("composition needs g(0) = 0"));
        }
        let n = self.order().min(g.order());
        let top = match g.valuation() {
            None => 0,
            Some(v) => self.order().min(n / v),
        };
        let g = g.truncate(n);
        let mut acc = Self::monomial(0, self.coeffs[top].clone(), n);
        for j in (0..top).rev() {
            acc = acc.mul_trunc(&g);
            acc.coeffs[0] += &self.coeffs[j];
        }
        Ok(acc)
    }

    /// Evaluation at a rational point (exact, as a polynomial).
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

/// Integer numerators over the least common denominator.
pub(crate) fn integer_form(c: &[Rational]) -> (Vec<Integer>, Integer) {
    let mut l = Integer::from(1);
    for q in c {
        if !q.is_zero() && q.denom() != &1 {
            l.lcm_mut(q.denom());
        }
    }
    let nums = c
        .iter()
        .map(|q| {
            if q.is_zero() {
                Integer::new()
            } else {
                Integer::from(l.div_exact_ref(q.denom())) * q.numer()
            }
        })
        .collect();
    (nums, l)
}

fn zip_with(a: &TruncSeries, b: &TruncSeries, f: impl Fn(&Rational, &Rational) -> Rational) -> TruncSeries {
    let n = a.order().min(b.order());
    TruncSeries {
        coeffs: (0..=n).map(|m| f(&a.coeffs[m], &b.coeffs[m])).collect(),
    }
}

impl Add<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;

    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;

    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Mul<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;

    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        self.mul_trunc(rhs)
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;

    fn neg(self) -> TruncSeries {
        self.map(|c| -c)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&TruncSeries> for TruncSeries {
            type Output = TruncSeries;
            fn $m(self, rhs: &TruncSeries) -> TruncSeries {
                (&self).$m(rhs)
            }
        }
        impl $tr<TruncSeries> for TruncSeries {
            type Output = TruncSeries;
            fn $m(self, rhs: TruncSeries) -> TruncSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<TruncSeries> for &TruncSeries {
            type Output = TruncSeries;
            fn $m(self, rhs: TruncSeries) -> TruncSeries {
                self.$m(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({})X^{e}", format_rational(c))?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(X^{})", self.order() + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    terms: Vec<(usize, String)>,
    order: usize,
}

impl Serialize for TruncSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            terms: self.terms().map(|(e, c)| (e, format_rational(c))).collect(),
            order: self.order(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SeriesRepr::deserialize(d)?;
        let mut s = TruncSeries::zero(repr.order);
        for (e, c) in repr.terms {
            if e > repr.order {
                return Err(D::Error::custom(format!("exponent {e} exceeds order {}", repr.order)));
            }
            s.coeffs[e] += parse_rational(&c).map_err(D::Error::custom)?;
        }
        Ok(s)
    }
}

/// `sum_m c_m(X1) X2^m` over a finite index set.
///
/// Families read from input carry indices `m >= 2`; the partial derivative in
/// `X2` produces families starting at `m = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFamily {
    terms: BTreeMap<usize, TruncSeries>,
    min_index: usize,
}

impl SeriesFamily {
    pub fn empty() -> Self {
        SeriesFamily {
            terms: BTreeMap::new(),
            min_index: 2,
        }
    }

    pub fn new(terms: impl IntoIterator<Item = (usize, TruncSeries)>) -> Result<Self> {
        Self::with_min_index(terms, 2)
    }

    fn with_min_index(terms: impl IntoIterator<Item = (usize, TruncSeries)>, min_index: usize) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            if m < min_index {
                return Err(Error::invalid(format!("family index {m} is below {min_index}")));
            }
            if map.insert(m, c).is_some() {
                return Err(Error::invalid(format!("family index {m} repeated")));
            }
        }
        Ok(SeriesFamily { terms: map, min_index })
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &TruncSeries)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn get(&self, m: usize) -> Option<&TruncSeries> {
        self.terms.get(&m)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Smallest order among the coefficient series; `None` for the empty family.
    pub fn order(&self) -> Option<usize> {
        self.terms.values().map(TruncSeries::order).min()
    }

    pub fn min_index(&self) -> usize {
        self.min_index
    }

    /// Applies `f(m, c_m)` to every coefficient.
    pub fn map(&self, mut f: impl FnMut(usize, &TruncSeries) -> TruncSeries) -> Self {
        SeriesFamily {
            terms: self.terms.iter().map(|(m, c)| (*m, f(*m, c))).collect(),
            min_index: self.min_index,
        }
    }

    /// `d/dX2`: the family `sum_m m c_m X2^(m-1)`.
    pub fn partial(&self) -> Self {
        SeriesFamily {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m - 1, c.scale(&int(*m as i64))))
                .collect(),
            min_index: self.min_index.saturating_sub(1),
        }
    }

    /// `sum_m c_m(x) y(x)^m`, truncated at the smallest order involved.
    /// Requires `y(0) = 0` when any index is positive.
    pub fn substitute(&self, y: &TruncSeries) -> Result<TruncSeries> {
        let n = self.order().map_or(y.order(), |o| o.min(y.order()));
        let y = y.truncate(n);
        let mut acc = TruncSeries::zero(n);
        if self.terms.is_empty() {
            return Ok(acc);
        }
        let max_m = *self.terms.keys().next_back().unwrap();
        if max_m > 0 && !y.coeff(0).is_zero() {
            return Err(Error::invalid("substitution into a family needs y(0) = 0"));
        }
        let val = y.valuation();
        let mut power = TruncSeries::one(n);
        let mut k = 0;
        for (&m, c) in &self.terms {
            if let Some(v) = val {
                if m * v > n {
                    break;
                }
            } else if m > 0 {
                break;
            }
            while k < m {
                power = power.mul_trunc(&y);
                k += 1;
            }
            acc = &acc + &c.mul_trunc(&power);
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyTerm {
    m: usize,
    series: TruncSeries,
}

impl Serialize for SeriesFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<FamilyTerm> = self
            .terms
            .iter()
            .map(|(m, c)| FamilyTerm { m: *m, series: c.clone() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeriesFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<FamilyTerm>::deserialize(d)?;
        SeriesFamily::new(v.into_iter().map(|t| (t.m, t.series))).map_err(serde::de::Error::custom)
    }
}
