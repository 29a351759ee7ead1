//! Building blocks at a regular singular point: the logarithmic primitive
//! `B = sum b_m/m X^m` solving `x B' = b`, the resolvent `A = sum a_m/(m+alpha) X^m`
//! solving `x A' + alpha A = a`, the radii on which their norms are controlled,
//! the truncated exponential, and the gauge transform removing the linear term.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{int, pow2, rat, Integer, LogValue, OddPrime, Rational};
use crate::gauss::first_violation;
use crate::series::{integer_form, SeriesFamily, TruncSeries};

/// The exponent `alpha = s/t` with `1 <= s, t <= p - 1` coprime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Alpha {
    s: u64,
    t: u64,
}

impl Alpha {
    pub fn new(s: u64, t: u64, p: OddPrime) -> Result<Self> {
        let p = p.get();
        if s == 0 || t == 0 || s >= p || t >= p {
            return Err(Error::invalid(format!("need 1 <= s, t <= p - 1, got s = {s}, t = {t}, p = {p}")));
        }
        if num_integer::gcd(s, t) != 1 {
            return Err(Error::invalid(format!("s = {s} and t = {t} are not coprime")));
        }
        Ok(Alpha { s, t })
    }

    pub fn s(self) -> u64 {
        self.s
    }

    pub fn t(self) -> u64 {
        self.t
    }

    pub fn value(self) -> Rational {
        rat(self.s as i64, self.t as i64)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.s, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LemmaClause {
    /// `r exp(-2/(p(p-1)) log p)` for the primitive.
    ChangeOfVariableP,
    /// `r exp(-(k+1)/2^k log 2)` for the primitive.
    ChangeOfVariableTwo,
    /// `r exp(-t/(p-1)^2 log p)` for the resolvent.
    SpecialOdeP,
    /// `r exp(-kt/2^(k-1) log 2)` for the resolvent, when `2^k >= alpha + 2`.
    SpecialOdeTwo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusPair {
    pub r1: LogValue,
    pub r2: LogValue,
    pub regime: [LemmaClause; 2],
}

fn check_vanishing(f: &TruncSeries, k: u32, what: &str) -> Result<()> {
    let need = 1usize << k;
    match f.valuation() {
        Some(v) if v < need => Err(Error::invalid(format!(
            "{what} must vanish to order 2^{k} = {need}, but has a nonzero X^{v} coefficient"
        ))),
        _ => Ok(()),
    }
}

/// `B = sum_m b_m/m X^m` for `b` vanishing to order `2^k`.
pub fn b_map(b: &TruncSeries, k: u32) -> Result<TruncSeries> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    check_vanishing(b, k, "b")?;
    Ok(primitive(b))
}

/// `sum_m b_m/m X^m`, assuming `b(0) = 0`.
pub(crate) fn primitive(b: &TruncSeries) -> TruncSeries {
    debug_assert!(b.coeff(0).is_zero());
    let mut out = TruncSeries::zero(b.order());
    for (m, c) in b.terms() {
        out.set_coeff(m, c / int(m as i64));
    }
    out
}

pub fn b_map_radius(k: u32, p: OddPrime, logr: &LogValue) -> Result<RadiusPair> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if logr.prime() != p {
        return Err(Error::invalid("radius tagged with a different prime"));
    }
    if logr.sign() == std::cmp::Ordering::Greater {
        return Err(Error::invalid("the radius must satisfy r <= 1"));
    }
    let pv = p.get() as i64;
    let r1 = logr - &LogValue::log_p(p).scale(&rat(2, pv * (pv - 1)));
    let r2 = logr - &LogValue::log_2(p).scale(&(int(k as i64 + 1) * pow2(-(k as i64))));
    Ok(RadiusPair {
        r1,
        r2,
        regime: [LemmaClause::ChangeOfVariableP, LemmaClause::ChangeOfVariableTwo],
    })
}

/// `log p^(-2/(p-1))`, the common bound on `||B||` in both clauses.
pub fn b_norm_bound(p: OddPrime) -> LogValue {
    LogValue::log_p(p).scale(&rat(-2, p.get() as i64 - 1))
}

/// The unique `A` with `x A' + alpha A = a`, for `a` vanishing to order `2^k`.
pub fn resolvent(a: &TruncSeries, alpha: Alpha, k: u32) -> Result<TruncSeries> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    check_vanishing(a, k, "a")?;
    Ok(euler_inverse(a, alpha))
}

/// Coefficientwise `a_m / (m + alpha)`; every `m >= 0` is admissible since alpha > 0.
pub(crate) fn euler_inverse(a: &TruncSeries, alpha: Alpha) -> TruncSeries {
    let (s, t) = (alpha.s as i64, alpha.t as i64);
    let mut out = TruncSeries::zero(a.order());
    for (m, c) in a.terms() {
        out.set_coeff(m, c * rat(t, t * m as i64 + s));
    }
    out
}

/// Clause (1) radius alone: `logr - t/(p-1)^2 log p`.
pub fn resolvent_radius_p(p: OddPrime, alpha: Alpha, logr: &LogValue) -> LogValue {
    let pm1 = p.get() as i64 - 1;
    logr - &LogValue::log_p(p).scale(&rat(alpha.t as i64, pm1 * pm1))
}

/// Both radii; clause (2) needs `2^k >= alpha + 2`.
pub fn resolvent_radius(k: u32, p: OddPrime, alpha: Alpha, logr: &LogValue) -> Result<RadiusPair> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if logr.prime() != p {
        return Err(Error::invalid("radius tagged with a different prime"));
    }
    // 2^k >= s/t + 2  <=>  t 2^k >= s + 2t
    if int(alpha.t as i64) * pow2(k as i64) < int((alpha.s + 2 * alpha.t) as i64) {
        return Err(Error::precondition(format!(
            "second resolvent radius needs 2^k >= alpha + 2, but 2^{k} < {alpha} + 2"
        )));
    }
    let r1 = resolvent_radius_p(p, alpha, logr);
    let coef = int(k as i64 * alpha.t as i64) * pow2(1 - k as i64);
    let r2 = logr - &LogValue::log_2(p).scale(&coef);
    Ok(RadiusPair {
        r1,
        r2,
        regime: [LemmaClause::SpecialOdeP, LemmaClause::SpecialOdeTwo],
    })
}

/// Formal `exp(B) = sum B^m/m!` for `B(0) = 0`, via `m E_m = sum_i i B_i E_(m-i)`.
///
/// The recurrence runs on integers: `E_j * L` for a common denominator `L`
/// of the coefficients found so far, widened whenever a new one needs it.
pub fn exp_trunc(b: &TruncSeries) -> Result<TruncSeries> {
    if !b.coeff(0).is_zero() {
        return Err(Error::invalid("exp needs B(0) = 0"));
    }
    let n = b.order();
    let (db, d) = integer_form(b.euler().coeffs());
    let support: Vec<usize> = (1..=n).filter(|&i| db[i].cmp0() != std::cmp::Ordering::Equal).collect();
    let mut out = Vec::with_capacity(n + 1);
    out.push(Rational::one());
    let mut l = Integer::from(1);
    let mut scaled = vec![Integer::from(1)];
    for m in 1..=n {
        let mut acc = Integer::new();
        for &i in &support {
            if i > m {
                break;
            }
            acc += &db[i] * &scaled[m - i];
        }
        let e = Rational::new(acc, Integer::from(&d * &l) * m as u64);
        if !l.is_divisible(e.denom()) {
            let wider = l.clone().lcm(e.denom());
            let factor = Integer::from(wider.div_exact_ref(&l));
            for v in scaled.iter_mut() {
                *v *= &factor;
            }
            l = wider;
        }
        scaled.push(Integer::from(l.div_exact_ref(e.denom())) * e.numer());
        out.push(e);
    }
    Ok(TruncSeries::from_coeffs(out))
}

/// Output of [`gauge_strip`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaugeStrip {
    pub a0: TruncSeries,
    pub c0: SeriesFamily,
    /// The primitive `B` of `b / x`.
    pub b_primitive: TruncSeries,
    /// `exp(B)`, needed to map the stripped solution back.
    #[serde(skip)]
    pub exp_b: TruncSeries,
    pub logr1: LogValue,
}

/// Checks the norm hypotheses of the nonlinear equation at radius `logr`:
/// `a(0) = a'(0) = 0`, `b(0) = b'(0) = 0`, `||a||_r, ||b||_r <= r/p`, `||c_m||_r <= 1/p`.
pub fn check_hypotheses(a: &TruncSeries, b: &TruncSeries, c: &SeriesFamily, logr: &LogValue) -> Result<()> {
    let p = logr.prime();
    if !a.coeff(0).is_zero() {
        return Err(Error::hypothesis("a(0) = 0", Some(0)));
    }
    if a.order() >= 1 && !a.coeff(1).is_zero() {
        return Err(Error::hypothesis("a'(0) = 0", Some(1)));
    }
    if !b.coeff(0).is_zero() {
        return Err(Error::hypothesis("b(0) = 0", Some(0)));
    }
    if b.order() >= 1 && !b.coeff(1).is_zero() {
        return Err(Error::hypothesis(
            "b must vanish to order 2 (a nonzero linear coefficient of b is not supported)",
            Some(1),
        ));
    }
    let r_over_p = logr - &LogValue::log_p(p);
    if let Some(i) = first_violation(a, &r_over_p, logr) {
        return Err(Error::hypothesis("||a||_r <= r/p", Some(i)));
    }
    if let Some(i) = first_violation(b, &r_over_p, logr) {
        return Err(Error::hypothesis("||b||_r <= r/p", Some(i)));
    }
    let inv_p = -&LogValue::log_p(p);
    for (m, cm) in c.terms() {
        if let Some(i) = first_violation(cm, &inv_p, logr) {
            return Err(Error::hypothesis(format!("||c_{m}||_r <= 1/p"), Some(i)));
        }
    }
    Ok(())
}

/// Removes the linear term `b y` by the gauge `y = z exp(B)`, `x B' = b`.
///
/// The stripped equation is `x z' + alpha z = a0 + sum_m c0_m z^m` with
/// `a0 = a exp(-B)` and `c0_m = c_m exp((m-1) B)`, valid on the radius
/// `logr1 = logr - 3/(p(p-1)) log p`.
pub fn gauge_strip(a: &TruncSeries, b: &TruncSeries, c: &SeriesFamily, logr: &LogValue) -> Result<GaugeStrip> {
    check_hypotheses(a, b, c, logr)?;
    let p = logr.prime();
    let pv = p.get() as i64;
    let logr1 = logr - &LogValue::log_p(p).scale(&rat(3, pv * (pv - 1)));
    let big_b = b_map(b, 1)?;
    let exp_b = exp_trunc(&big_b)?;
    if big_b.is_zero() {
        return Ok(GaugeStrip {
            a0: a.clone(),
            c0: c.clone(),
            b_primitive: big_b,
            exp_b,
            logr1,
        });
    }
    let exp_minus_b = exp_trunc(&-&big_b)?;
    let a0 = a * &exp_minus_b;
    let mut powers = vec![TruncSeries::one(exp_b.order())];
    let c0 = c.map(|m, cm| {
        while powers.len() < m {
            let next = powers.last().unwrap() * &exp_b;
            powers.push(next);
        }
        cm * &powers[m - 1]
    });
    Ok(GaugeStrip {
        a0,
        c0,
        b_primitive: big_b,
        exp_b,
        logr1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::norm_bounded_by;

    fn p(n: u64) -> OddPrime {
        OddPrime::new(n).unwrap()
    }

    fn s(terms: &[(usize, i64, i64)], order: usize) -> TruncSeries {
        TruncSeries::from_terms(terms.iter().map(|&(e, n, d)| (e, rat(n, d))), order)
    }

    #[test]
    fn b_map_examples() {
        assert_eq!(b_map(&s(&[(2, 5, 1), (4, 1, 1)], 5), 1).unwrap(), s(&[(2, 5, 2), (4, 1, 4)], 5));
        assert_eq!(b_map(&s(&[(3, 1, 1), (4, 3, 1)], 5), 1).unwrap(), s(&[(3, 1, 3), (4, 3, 4)], 5));
        assert!(b_map(&TruncSeries::zero(4), 2).unwrap().is_zero());
        assert!(b_map(&s(&[(3, 1, 1)], 5), 2).is_err());
    }

    #[test]
    fn b_map_radius_examples() {
        let r = b_map_radius(1, p(3), &LogValue::zero(p(3))).unwrap();
        assert_eq!(r.r1, LogValue::new(p(3), rat(-1, 3), int(0)));
        assert_eq!(r.r2, LogValue::new(p(3), int(0), int(-1)));
        let r = b_map_radius(3, p(5), &LogValue::zero(p(5))).unwrap();
        assert_eq!(r.r2, LogValue::new(p(5), int(0), rat(-1, 2)));
        let r = b_map_radius(1, p(7), &-&LogValue::log_p(p(7))).unwrap();
        assert_eq!(r.r1, LogValue::new(p(7), rat(-22, 21), int(0)));
        assert!(b_map_radius(1, p(3), &LogValue::log_2(p(3))).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let half = Alpha::new(1, 2, p(5)).unwrap();
        assert_eq!(resolvent(&s(&[(4, 1, 1)], 5), half, 2).unwrap(), s(&[(4, 2, 9)], 5));
        let one = Alpha::new(1, 1, p(3)).unwrap();
        assert_eq!(resolvent(&s(&[(2, 1, 1), (3, 1, 1)], 4), one, 1).unwrap(), s(&[(2, 1, 3), (3, 1, 4)], 4));
        assert!(resolvent(&TruncSeries::zero(4), one, 1).unwrap().is_zero());
        assert!(Alpha::new(2, 2, p(5)).is_err());
        assert!(Alpha::new(1, 3, p(3)).is_err());
    }

    #[test]
    fn resolvent_radius_examples() {
        let five = p(5);
        let alpha = Alpha::new(1, 2, five).unwrap();
        let r = resolvent_radius(2, five, alpha, &LogValue::zero(five)).unwrap();
        assert_eq!(r.r1, LogValue::new(five, rat(-1, 8), int(0)));
        assert_eq!(r.r2, LogValue::new(five, int(0), int(-2)));
        let two = Alpha::new(2, 1, p(3)).unwrap();
        assert!(matches!(
            resolvent_radius(1, p(3), two, &LogValue::zero(p(3))),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn exp_examples() {
        assert_eq!(
            exp_trunc(&TruncSeries::x(3)).unwrap(),
            s(&[(0, 1, 1), (1, 1, 1), (2, 1, 2), (3, 1, 6)], 3)
        );
        assert_eq!(exp_trunc(&TruncSeries::zero(4)).unwrap(), TruncSeries::one(4));
        assert_eq!(
            exp_trunc(&s(&[(1, 3, 1)], 4)).unwrap(),
            s(&[(0, 1, 1), (1, 3, 1), (2, 9, 2), (3, 9, 2), (4, 27, 8)], 4)
        );
        assert!(exp_trunc(&TruncSeries::one(3)).is_err());
    }

    #[test]
    fn exp_inverse_and_primitive_ode() {
        let b = s(&[(2, 3, 1), (3, -1, 5), (5, 7, 2)], 12);
        let big_b = b_map(&b, 1).unwrap();
        assert_eq!(big_b.euler(), b);
        let e = exp_trunc(&big_b).unwrap();
        assert_eq!(&e * &exp_trunc(&-&big_b).unwrap(), TruncSeries::one(12));
        // x y' = b y with y(0) = 1
        assert_eq!(e.euler(), &b * &e);
        // Horner evaluation of sum B^m/m! as an independent route
        let mut horner = TruncSeries::one(12);
        for m in (1..=12).rev() {
            horner = &TruncSeries::one(12) + &(&horner * &big_b).scale(&rat(1, m));
        }
        assert_eq!(horner, e);
    }

    #[test]
    fn gauge_examples() {
        let three = p(3);
        let r0 = LogValue::zero(three);
        let a = s(&[(2, 3, 1), (4, 9, 1)], 8);
        let g = gauge_strip(&a, &TruncSeries::zero(8), &SeriesFamily::empty(), &r0).unwrap();
        assert_eq!(g.a0, a);
        assert!(g.b_primitive.is_zero());
        assert_eq!(g.logr1, LogValue::new(three, rat(-1, 2), int(0)));

        let a = s(&[(2, 3, 1)], 8);
        let b = s(&[(2, 3, 1)], 8);
        let g = gauge_strip(&a, &b, &SeriesFamily::empty(), &r0).unwrap();
        assert_eq!(g.b_primitive, s(&[(2, 3, 2)], 8));
        let expect = &a * &exp_trunc(&s(&[(2, -3, 2)], 8)).unwrap();
        assert_eq!(g.a0, expect);

        let bad = s(&[(2, 1, 1)], 8);
        assert!(matches!(
            gauge_strip(&bad, &b, &SeriesFamily::empty(), &r0),
            Err(Error::HypothesisViolated { index: Some(2), .. })
        ));
        let linear_b = s(&[(1, 3, 1)], 8);
        assert!(matches!(
            gauge_strip(&a, &linear_b, &SeriesFamily::empty(), &r0),
            Err(Error::HypothesisViolated { index: Some(1), .. })
        ));
    }

    #[test]
    fn gauge_bounds_hold_on_sample() {
        let five = p(5);
        let r0 = LogValue::zero(five);
        let a = s(&[(2, 5, 1), (3, 25, 3), (6, 5, 7)], 24);
        let b = s(&[(2, 10, 1), (5, 5, 1), (10, 5, 3)], 24);
        let c = SeriesFamily::new([(2, s(&[(0, 5, 1), (1, 5, 2)], 24)), (3, s(&[(3, 25, 1)], 24))]).unwrap();
        let g = gauge_strip(&a, &b, &c, &r0).unwrap();
        let r1 = &g.logr1;
        let inv_p = -&LogValue::log_p(five);
        assert!(norm_bounded_by(&g.a0, &(r1 + &inv_p), r1));
        for (_, cm) in g.c0.terms() {
            assert!(norm_bounded_by(cm, &inv_p, r1));
        }
        assert!(norm_bounded_by(&g.exp_b, &LogValue::zero(five), r1));
    }
}
