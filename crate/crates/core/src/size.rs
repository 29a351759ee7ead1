//! Size bounds for formal graphs `y = phi(x)`: the exponent
//! `lambda = inf_m v_p(c_(m+1)) / m` (in units of `log p`), the blow-up proper
//! transform `psi = phi / X`, and the sum over primes controlling
//! arithmetic analyticity.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, int, rat, is_prime, ln_enclosure, primes_up_to, vp, PadicVal, Rational, RationalInterval};
use crate::series::TruncSeries;

/// A rational or `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended {
    Finite(Rational),
    PlusInfinity,
}

impl Extended {
    fn min(self, q: Rational) -> Extended {
        match self {
            Extended::Finite(r) if r <= q => Extended::Finite(r),
            _ => Extended::Finite(q),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(q) => f.write_str(&format_rational(q)),
            Extended::PlusInfinity => f.write_str("+inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeEstimate {
    /// `inf_(m>=1) v_p(c_(m+1)) / m` over the nonzero coefficients of the truncation.
    pub lambda_p: Extended,
    /// `min(0, lambda_p)`: the size is at least `p^lower_bound_log_p`.
    #[serde(serialize_with = "ser_rational")]
    pub lower_bound_log_p: Rational,
    /// The lower bound is the size, because `phi'(0)` is a p-adic unit.
    pub exact: bool,
    /// `inf_(m>=1) v_p(c_m) / m`, a proxy for the convergence-radius exponent.
    pub rho_lower_log_p: Extended,
    /// Truncation order the infima range over.
    pub order: usize,
}

fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{p} is not prime")))
    }
}

fn val(q: &Rational, p: u64) -> PadicVal {
    vp(q, p).expect("prime checked by caller")
}

pub fn lambda_exponent(phi: &TruncSeries, p: u64) -> Result<SizeEstimate> {
    check_prime(p)?;
    if !phi.coeff(0).is_zero() {
        return Err(Error::invalid("the graph must pass through the origin"));
    }
    let v1 = if phi.order() >= 1 { val(phi.coeff(1), p) } else { PadicVal::Infinity };
    if v1 < PadicVal::Finite(0) {
        return Err(Error::hypothesis("phi'(0) must be p-integral", Some(1)));
    }
    let mut lambda = Extended::PlusInfinity;
    let mut rho = Extended::PlusInfinity;
    for (m, c) in phi.terms() {
        let v = int(val(c, p).finite().expect("nonzero coefficient"));
        rho = rho.min(&v / int(m as i64));
        if m >= 2 {
            lambda = lambda.min(v / int(m as i64 - 1));
        }
    }
    let lower = match &lambda {
        Extended::Finite(q) if q < &Rational::zero() => q.clone(),
        _ => Rational::zero(),
    };
    Ok(SizeEstimate {
        lambda_p: lambda,
        lower_bound_log_p: lower,
        exact: v1 == PadicVal::Finite(0),
        rho_lower_log_p: rho,
        order: phi.order(),
    })
}

/// `psi = phi / X`, for `phi` vanishing to order 2 with `c_2` p-integral.
pub fn proper_transform(phi: &TruncSeries, p: u64) -> Result<TruncSeries> {
    check_prime(p)?;
    if !phi.vanishes_to(2) {
        return Err(Error::invalid("the proper transform needs phi to vanish to order 2"));
    }
    if phi.order() >= 2 && val(phi.coeff(2), p) < PadicVal::Finite(0) {
        return Err(Error::invalid("the proper transform needs c_2 to be p-integral"));
    }
    phi.div_x()
}

/// `f2 * f1 == phi(f1)` through the smallest order involved.
pub fn straightening_check(f1: &TruncSeries, f2: &TruncSeries, phi: &TruncSeries) -> Result<bool> {
    if !f1.coeff(0).is_zero() {
        return Err(Error::invalid("f1 must vanish at 0"));
    }
    let n = f1.order().min(f2.order()).min(phi.order());
    let f1 = f1.truncate(n);
    Ok(&f2.truncate(n) * &f1 == phi.truncate(n).compose(&f1)?)
}

/// Sum of `C t (log p)^2 / (p-1)^2` over the admissible primes up to `p_max`,
/// and an enclosure of `C t ((log P)^2 + 2 log P + 2) / P` bounding the rest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Budget {
    pub partial: RationalInterval,
    pub tail: RationalInterval,
    pub p_max: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetParams {
    pub s: u64,
    pub t: u64,
    pub c: Rational,
    pub excluded: BTreeSet<u64>,
}

impl BudgetParams {
    pub fn new(s: u64, t: u64) -> Self {
        BudgetParams {
            s,
            t,
            c: int(crate::ode::RADIUS_CONSTANT),
            excluded: BTreeSet::new(),
        }
    }

    fn admits(&self, p: u64) -> bool {
        p > 2 && p > self.s.max(self.t) && !self.excluded.contains(&p)
    }
}

/// Every summand is computed to this many bits and snapped outward to the
/// dyadic grid, so the sums stay small dyadic rationals.
const TERM_BITS: u32 = 56;

/// Enclosure of `C t (ln p)^2 / (p-1)^2`.
pub fn budget_summand(params: &BudgetParams, p: u64) -> RationalInterval {
    let lp = ln_enclosure(p, TERM_BITS + 8);
    let d = int(p as i64 - 1);
    let coef = &params.c * int(params.t as i64) / (&d * &d);
    lp.mul(&lp).scale(&coef).round_outward(TERM_BITS)
}

/// Sum of [`budget_summand`] over admissible primes in `(lo, hi]`.
pub fn budget_range_sum(params: &BudgetParams, lo: u64, hi: u64) -> RationalInterval {
    primes_up_to(hi)
        .into_par_iter()
        .filter(|&p| p > lo && params.admits(p))
        .map(|p| budget_summand(params, p))
        .reduce(RationalInterval::zero, |a, b| a.add(&b))
}

/// Enclosure of `C t ((ln P)^2 + 2 ln P + 2) / P`, the integral of
/// `C t (ln x)^2 / x^2` over `[P, inf)`.
pub fn budget_tail(params: &BudgetParams, p_max: u64) -> RationalInterval {
    let l = ln_enclosure(p_max, TERM_BITS + 16);
    let poly = l.mul(&l).add(&l.scale(&int(2))).add(&RationalInterval::point(int(2)));
    let coef = &params.c * int(params.t as i64) / int(p_max as i64);
    poly.scale(&coef).round_outward(TERM_BITS)
}

pub fn aanalyticity_budget(params: &BudgetParams, p_max: u64) -> Result<Budget> {
    if p_max < 3 {
        return Err(Error::invalid("pMax must be at least 3"));
    }
    if params.t == 0 || params.c < Rational::zero() {
        return Err(Error::invalid("need t >= 1 and C >= 0"));
    }
    let partial = budget_range_sum(params, 0, p_max);
    debug_assert!(partial.width() <= rat(1, 1_000_000));
    Ok(Budget {
        partial,
        tail: budget_tail(params, p_max),
        p_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(terms: &[(usize, Rational)], order: usize) -> TruncSeries {
        TruncSeries::from_terms(terms.iter().cloned(), order)
    }

    fn p_pow(p: i64, e: i64) -> Rational {
        int(p).pow(e as i32)
    }

    #[test]
    fn lambda_examples() {
        let n = 10;
        let mut terms = vec![(1, int(1))];
        terms.extend((2..=n).map(|m| (m, p_pow(5, 1 - m as i64))));
        let est = lambda_exponent(&s(&terms, n), 5).unwrap();
        assert_eq!(est.lambda_p, Extended::Finite(int(-1)));
        assert_eq!(est.lower_bound_log_p, int(-1));
        assert!(est.exact);

        let est = lambda_exponent(&s(&[(1, int(3)), (2, rat(1, 2)), (4, int(7))], 6), 3).unwrap();
        assert_eq!(est.lower_bound_log_p, int(0));
        assert!(!est.exact);

        let est = lambda_exponent(&TruncSeries::x(5), 7).unwrap();
        assert_eq!(est.lambda_p, Extended::PlusInfinity);
        assert_eq!(est.lower_bound_log_p, int(0));
        assert_eq!(est.rho_lower_log_p, Extended::Finite(int(0)));

        assert!(matches!(
            lambda_exponent(&s(&[(1, rat(1, 3))], 4), 3),
            Err(Error::HypothesisViolated { index: Some(1), .. })
        ));
        assert!(lambda_exponent(&TruncSeries::one(3), 3).is_err());
        assert!(lambda_exponent(&TruncSeries::x(3), 9).is_err());
    }

    #[test]
    fn proper_transform_examples() {
        let phi = s(&[(2, int(1)), (3, int(5))], 6);
        assert_eq!(proper_transform(&phi, 5).unwrap(), s(&[(1, int(1)), (2, int(5))], 5));
        assert_eq!(proper_transform(&s(&[(2, int(1))], 4), 3).unwrap(), TruncSeries::x(3));
        assert_eq!(proper_transform(&s(&[(3, int(1))], 4), 3).unwrap(), s(&[(2, int(1))], 3));
        assert!(proper_transform(&TruncSeries::x(4), 3).is_err());
        assert!(proper_transform(&s(&[(2, rat(1, 3))], 4), 3).is_err());
    }

    #[test]
    fn straightening_examples() {
        let phi = s(&[(2, int(1)), (3, int(5)), (5, rat(2, 7))], 8);
        let psi = proper_transform(&phi, 5).unwrap();
        let t = TruncSeries::x(8);
        assert!(straightening_check(&t, &psi, &phi).unwrap());
        let bumped = &psi + &TruncSeries::monomial(4, int(1), 7);
        assert!(!straightening_check(&t, &bumped, &phi).unwrap());
        let two_t = s(&[(1, int(2))], 6);
        assert!(straightening_check(&two_t, &two_t, &s(&[(2, int(1))], 6)).unwrap());
    }

    #[test]
    fn budget_examples() {
        let params = BudgetParams::new(1, 1);
        let b = aanalyticity_budget(&params, 3).unwrap();
        let ln3 = 1.0986122886681098_f64;
        let expect = 14.0 * ln3 * ln3 / 4.0;
        let lo: f64 = b.partial.lo.to_f64();
        let hi: f64 = b.partial.hi.to_f64();
        assert!(lo <= expect + 1e-12 && expect - 1e-12 <= hi && hi - lo < 1e-9, "{lo} {hi} {expect}");

        let mut all = BudgetParams::new(1, 1);
        all.excluded = primes_up_to(50).into_iter().collect();
        assert_eq!(aanalyticity_budget(&all, 50).unwrap().partial, RationalInterval::zero());

        // p must exceed max(s, t)
        let b = aanalyticity_budget(&BudgetParams::new(4, 3), 5).unwrap();
        assert_eq!(b.partial, budget_summand(&BudgetParams::new(4, 3), 5));
        assert!(aanalyticity_budget(&params, 2).is_err());
    }

    #[test]
    fn budget_json_shape() {
        let b = aanalyticity_budget(&BudgetParams::new(1, 1), 10).unwrap();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["pMax"], 10);
        assert!(v["partial"][0].is_string() && v["tail"][1].is_string());
    }

    proptest! {
        #[test]
        fn proper_transform_round_trip(coeffs in proptest::collection::vec((-20i64..20, 1i64..6), 1..8)) {
            let order = coeffs.len() + 1;
            let phi = s(&coeffs.iter().enumerate().map(|(i, &(n, d))| (i + 2, rat(n, d * 7 + 1))).collect::<Vec<_>>(), order);
            let psi = proper_transform(&phi, 7).unwrap();
            prop_assert_eq!(psi.mul_x(), phi.clone());
            prop_assert!(straightening_check(&TruncSeries::x(order), &psi, &phi).unwrap());
        }

        #[test]
        fn integral_graphs_have_size_one(coeffs in proptest::collection::vec(-30i64..30, 1..10)) {
            let phi = s(&coeffs.iter().enumerate().map(|(i, &n)| (i + 1, int(n))).collect::<Vec<_>>(), coeffs.len());
            let est = lambda_exponent(&phi, 3).unwrap();
            prop_assert_eq!(est.lower_bound_log_p, int(0));
        }
    }
}
