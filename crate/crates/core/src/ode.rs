//! The nonlinear equation `x y' + alpha y = a + b y + sum_{m>=2} c_m y^m`
//! with `y(0) = y'(0) = 0`: a coefficient-recursion solver, the Newton
//! iteration with its ledger of certified radii, and random admissible
//! instances for testing the two against each other.

use std::cmp::Ordering;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{int, pow2, rat, Integer, LogQuadratic, LogValue, OddPrime, Rational};
use crate::gauss::norm_bounded_by;
use crate::regsing::{b_map, check_hypotheses, euler_inverse, exp_trunc, gauge_strip, resolvent, Alpha};
use crate::series::{SeriesFamily, TruncSeries};

/// The constant in the closed-form radius `r exp(-C t (log p)^2 / (p-1)^2)`.
pub const RADIUS_CONSTANT: i64 = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeProblem {
    a: TruncSeries,
    b: TruncSeries,
    c: SeriesFamily,
    alpha: Alpha,
    logr: LogValue,
}

impl OdeProblem {
    /// Checks the algebraic side conditions `a(0) = a'(0) = 0` and `b(0) = 0`.
    /// The norm hypotheses are checked separately by [`OdeProblem::check_hypotheses`].
    pub fn new(a: TruncSeries, b: TruncSeries, c: SeriesFamily, alpha: Alpha, logr: LogValue) -> Result<Self> {
        if !a.coeff(0).is_zero() || (a.order() >= 1 && !a.coeff(1).is_zero()) {
            return Err(Error::invalid("a must vanish to order 2"));
        }
        if !b.coeff(0).is_zero() {
            return Err(Error::invalid("b must vanish at 0"));
        }
        if let Some(m) = c.terms().map(|(m, _)| m).find(|&m| m < 2) {
            return Err(Error::invalid(format!("nonlinear terms start at m = 2, got m = {m}")));
        }
        Ok(OdeProblem { a, b, c, alpha, logr })
    }

    pub fn a(&self) -> &TruncSeries {
        &self.a
    }

    pub fn b(&self) -> &TruncSeries {
        &self.b
    }

    pub fn c(&self) -> &SeriesFamily {
        &self.c
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn prime(&self) -> OddPrime {
        self.logr.prime()
    }

    pub fn logr(&self) -> &LogValue {
        &self.logr
    }

    /// Largest order to which the data determines the solution.
    pub fn data_order(&self) -> usize {
        let mut n = self.a.order().min(self.b.order());
        if let Some(o) = self.c.order() {
            n = n.min(o);
        }
        n
    }

    /// `||a||_r, ||b||_r <= r/p`, `||c_m||_r <= 1/p` and `b'(0) = 0`, on the stored truncations.
    pub fn check_hypotheses(&self) -> Result<()> {
        check_hypotheses(&self.a, &self.b, &self.c, &self.logr)
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.data_order() {
            return Err(Error::invalid(format!(
                "order {n} exceeds the order {} to which the coefficients are known",
                self.data_order()
            )));
        }
        Ok(())
    }

    /// `x y' + alpha y - a - b y - sum c_m y^m`, truncated at the order of `y`.
    pub fn residual(&self, y: &TruncSeries) -> Result<TruncSeries> {
        let n = y.order();
        self.check_order(n)?;
        let lhs = &y.euler() + &y.scale(&self.alpha.value());
        let rhs = &(&self.a.truncate(n) + &(&self.b.truncate(n) * y)) + &self.c.substitute(y)?;
        Ok(&lhs - &rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct OdeProblemRepr {
    a: TruncSeries,
    #[serde(default)]
    b: Option<TruncSeries>,
    #[serde(default)]
    c: Option<SeriesFamily>,
    s: u64,
    t: u64,
    p: OddPrime,
    #[serde(default)]
    logr: Option<LogValue>,
}

impl Serialize for OdeProblem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OdeProblemRepr {
            a: self.a.clone(),
            b: Some(self.b.clone()),
            c: Some(self.c.clone()),
            s: self.alpha.s(),
            t: self.alpha.t(),
            p: self.prime(),
            logr: Some(self.logr.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OdeProblem {
    /// `b` and `c` default to zero, `logr` to `0` (radius one).
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = OdeProblemRepr::deserialize(d)?;
        let alpha = Alpha::new(r.s, r.t, r.p).map_err(D::Error::custom)?;
        let logr = r.logr.unwrap_or_else(|| LogValue::zero(r.p));
        if logr.prime() != r.p {
            return Err(D::Error::custom("logr is tagged with a different prime than p"));
        }
        let b = r.b.unwrap_or_else(|| TruncSeries::zero(r.a.order()));
        OdeProblem::new(r.a, b, r.c.unwrap_or_else(SeriesFamily::empty), alpha, logr).map_err(D::Error::custom)
    }
}

/// Coefficient recursion `(m + alpha) y_m = [X^m](a + b y + sum c_j y^j)`.
///
/// The right side at order `m` only involves `y_i` with `i < m`, because `y`
/// vanishes to order 2 and `b(0) = 0`.
pub fn solve_direct(prob: &OdeProblem, n: usize) -> Result<TruncSeries> {
    prob.check_order(n)?;
    let alpha = prob.alpha.value();
    let b: Vec<(usize, Rational)> = prob.b.terms().map(|(i, c)| (i, c.clone())).collect();
    let c: Vec<(usize, Vec<(usize, Rational)>)> = prob
        .c
        .terms()
        .map(|(j, cj)| (j, cj.terms().map(|(i, q)| (i, q.clone())).collect()))
        .collect();
    let max_j = c.last().map_or(1, |(j, _)| *j);
    let mut y = vec![Rational::zero(); n + 1];
    // pow[j][m] = [X^m] y^j, filled one index per step
    let mut pow: Vec<Vec<Rational>> = vec![Vec::new(); max_j + 1];
    for row in pow.iter_mut().skip(2) {
        row.resize(n + 1, Rational::zero());
    }
    for m in 2..=n {
        for j in 2..=max_j {
            // y^j vanishes to order 2j, and [X^m] y^j = sum_i y_i [X^(m-i)] y^(j-1)
            let lo = 2 * (j - 1);
            if m < 2 * j {
                continue;
            }
            let mut acc = Rational::zero();
            for i in 2..=m - lo {
                if y[i].is_zero() {
                    continue;
                }
                let prev = if j == 2 { &y[m - i] } else { &pow[j - 1][m - i] };
                if !prev.is_zero() {
                    acc += &y[i] * prev;
                }
            }
            pow[j][m] = acc;
        }
        let mut rhs = if m <= prob.a.order() { prob.a.coeff(m).clone() } else { Rational::zero() };
        for (i, bi) in &b {
            if *i > m {
                break;
            }
            let yi = &y[m - i];
            if !yi.is_zero() {
                rhs += bi * yi;
            }
        }
        for (j, cj) in &c {
            for (i, q) in cj {
                if *i > m {
                    break;
                }
                let pj = &pow[*j][m - i];
                if !pj.is_zero() {
                    rhs += q * pj;
                }
            }
        }
        y[m] = rhs / (int(m as i64) + &alpha);
    }
    Ok(TruncSeries::from_coeffs(y))
}

/// Smallest positive `k` with `(k+1)/2^k <= 1/p^2`.
pub fn find_k1(p: OddPrime) -> u32 {
    let p2 = Integer::from(p.get()) * p.get();
    let mut k = 1u32;
    // (k+1) p^2 <= 2^k
    while Integer::from(&p2 * (k + 1)) > Integer::from(1) << k {
        k += 1;
    }
    assert!(Integer::from(1) << k > p2, "2^k1 >= p^2 + 1 must hold at k1 = {k}");
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Regime {
    PreK1,
    PostK1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LedgerEntry {
    pub k: u32,
    pub logr: LogValue,
    pub regime: Regime,
    /// `log r_(k-1) - log r_k`, with `r_(-1)` the gauge radius.
    pub decrement: LogValue,
    /// `||z_k||_(r_k) <= r_k` on the computed truncation.
    pub correction_bounded: bool,
    /// `||exp(+-B_k)||_(r_k) <= 1` on the computed truncation.
    pub gauge_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RadiusLedger {
    pub k1: u32,
    /// The input radius.
    pub logr: LogValue,
    /// Radius after removing the linear term.
    pub gauge_logr: LogValue,
    pub entries: Vec<LedgerEntry>,
    /// The limit of the full infinite sequence of radii.
    pub certified_r: LogValue,
    /// `logr - 14 t (log p)^2 / (p-1)^2`.
    pub paper_r: LogQuadratic,
    /// `logr - 14 t (log p)^2 / p^2`, the larger radius of the closed-form statement.
    pub statement_r: LogQuadratic,
}

impl RadiusLedger {
    pub fn new(p: OddPrime, alpha: Alpha, logr: &LogValue, steps: u32) -> Self {
        let pv = p.get() as i64;
        let t = alpha.t() as i64;
        let k1 = find_k1(p);
        let lp = LogValue::log_p(p);
        let gauge_logr = logr - &lp.scale(&rat(3, pv * (pv - 1)));
        let mut entries = Vec::with_capacity(steps as usize + 1);
        let mut cur = gauge_logr.clone();
        for k in 0..=steps {
            let dec = step_decrement(k, k1, p, t);
            cur = &cur - &dec;
            entries.push(LedgerEntry {
                k,
                logr: cur.clone(),
                regime: if k < k1 { Regime::PreK1 } else { Regime::PostK1 },
                decrement: dec,
                correction_bounded: true,
                gauge_bounded: true,
            });
        }
        let certified_r = &cur - &tail_decrement(steps + 1, k1, p, t);
        let sq = |d: i64| rat(-RADIUS_CONSTANT * t, d * d);
        RadiusLedger {
            k1,
            logr: logr.clone(),
            gauge_logr,
            entries,
            certified_r,
            paper_r: LogQuadratic { linear: logr.clone(), log_p_sq: sq(pv - 1) },
            statement_r: LogQuadratic { linear: logr.clone(), log_p_sq: sq(pv) },
        }
    }

    /// `log r - log r_infinity`.
    pub fn total_decrement(&self) -> LogValue {
        &self.logr - &self.certified_r
    }

    /// Certified check of `certifiedR >= paperR`, i.e. the total decrement is
    /// at most `14 t (log p)^2 / (p-1)^2`.
    pub fn within_paper_bound(&self) -> Result<bool> {
        Ok(self.paper_r.compare_linear(&self.certified_r)? != Ordering::Greater)
    }

    pub fn strictly_decreasing(&self) -> bool {
        let mut prev = &self.gauge_logr;
        for e in &self.entries {
            if e.logr.compare(prev).ok() != Some(Ordering::Less) {
                return false;
            }
            prev = &e.logr;
        }
        self.certified_r.le(prev)
    }
}

/// `log r_(k-1) - log r_k` for `k >= 1`, and `t/(p-1)^2 log p` for `k = 0`.
fn step_decrement(k: u32, k1: u32, p: OddPrime, t: i64) -> LogValue {
    let pm1 = p.get() as i64 - 1;
    if k == 0 {
        LogValue::log_p(p).scale(&rat(t, pm1 * pm1))
    } else if k < k1 {
        LogValue::log_p(p).scale(&rat(2 * t, pm1 * pm1))
    } else {
        let c = int((k as i64 + 1) * t) * pow2(1 - k as i64);
        LogValue::log_2(p).scale(&c)
    }
}

/// `sum_{k >= n} step_decrement(k)`, using `sum_{k>=m} (k+1)/2^(k-1) = (m+2)/2^(m-2)`.
fn tail_decrement(n: u32, k1: u32, p: OddPrime, t: i64) -> LogValue {
    let mut acc = LogValue::zero(p);
    let mut k = n;
    while k < k1 {
        acc = &acc + &step_decrement(k, k1, p, t);
        k += 1;
    }
    let m = k as i64;
    let closed = int((m + 2) * t) * pow2(2 - m);
    &acc + &LogValue::log_2(p).scale(&closed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NewtonSolution {
    pub y: TruncSeries,
    /// The corrections `z_k` of the gauge-stripped equation.
    #[serde(skip)]
    pub corrections: Vec<TruncSeries>,
    pub ledger: RadiusLedger,
}

/// One Newton correction with the gauge `exp(+-B_k)` used to compute it.
struct Step {
    z: TruncSeries,
    gauge: Option<(TruncSeries, TruncSeries)>,
}

/// Newton iteration on the stripped equation `x z' + alpha z = a0 + c(x, z)`.
///
/// Produces `z_0, ..., z_K`, where `z_k` vanishes to order `2^(k+1)` and
/// `2^(K+2) > n`; step 0 carries no gauge.
fn newton_corrections(a0: &TruncSeries, c: &SeriesFamily, alpha: Alpha, n: usize) -> Result<Vec<Step>> {
    let z0 = resolvent(&a0.truncate(n), alpha, 1)?;
    let dc = c.partial();
    let mut y_cur = z0.clone(); // y_(k-1)
    let mut c_prev = TruncSeries::zero(n); // c(x, y_(k-2))
    let mut dc_prev = TruncSeries::zero(n); // d2 c(x, y_(k-2))
    let mut steps = vec![Step { z: z0, gauge: None }];
    let mut k = 1u32;
    while (1usize << (k + 1)) <= n {
        let c_cur = c.substitute(&y_cur)?.truncate(n);
        let dc_cur = dc.substitute(&y_cur)?.truncate(n);
        let z_last = &steps.last().unwrap().z;
        let a_k = &(&c_cur - &c_prev) - &(z_last * &dc_prev);
        let big_b = b_map(&dc_cur, 1)?;
        let exp_plus = exp_trunc(&big_b)?;
        let exp_minus = exp_trunc(&-&big_b)?;
        let w = resolvent(&(&a_k * &exp_minus), alpha, k + 1)?;
        let z = &w * &exp_plus;
        debug_assert!(z.vanishes_to(1 << (k + 1)));
        y_cur = &y_cur + &z;
        c_prev = c_cur;
        dc_prev = dc_cur;
        steps.push(Step { z, gauge: Some((exp_plus, exp_minus)) });
        k += 1;
    }
    Ok(steps)
}

/// The series produced by the Newton scheme, with no norm hypotheses.
///
/// Needs only the algebraic conditions of [`OdeProblem::new`] and `b'(0) = 0`.
pub fn newton_series(prob: &OdeProblem, n: usize) -> Result<TruncSeries> {
    prob.check_order(n)?;
    if prob.b.order() >= 1 && !prob.b.coeff(1).is_zero() {
        return Err(Error::hypothesis("b must vanish to order 2", Some(1)));
    }
    let b = prob.b.truncate(n);
    let big_b = b_map(&b, 1)?;
    let (a0, c0, exp_b) = strip(&prob.a.truncate(n), &prob.c, &big_b, n)?;
    let steps = newton_corrections(&a0, &c0, prob.alpha, n)?;
    Ok(&sum(&steps, n) * &exp_b)
}

fn strip(a: &TruncSeries, c: &SeriesFamily, big_b: &TruncSeries, n: usize) -> Result<(TruncSeries, SeriesFamily, TruncSeries)> {
    let exp_b = exp_trunc(big_b)?;
    if big_b.is_zero() {
        return Ok((a.clone(), c.map(|_, cm| cm.truncate(n)), exp_b));
    }
    let a0 = a * &exp_trunc(&-big_b)?;
    let mut powers = vec![TruncSeries::one(n)];
    let c0 = c.map(|m, cm| {
        while powers.len() < m {
            let next = powers.last().unwrap() * &exp_b;
            powers.push(next);
        }
        &cm.truncate(n) * &powers[m - 1]
    });
    Ok((a0, c0, exp_b))
}

fn sum(steps: &[Step], n: usize) -> TruncSeries {
    steps.iter().fold(TruncSeries::zero(n), |acc, s| &acc + &s.z)
}

/// Newton iteration under the norm hypotheses, with the ledger of radii.
pub fn solve_newton(prob: &OdeProblem, n: usize) -> Result<NewtonSolution> {
    prob.check_order(n)?;
    let trunc_c = prob.c.map(|_, cm| cm.truncate(n));
    let g = gauge_strip(&prob.a.truncate(n), &prob.b.truncate(n), &trunc_c, &prob.logr)?;
    let steps = newton_corrections(&g.a0, &g.c0, prob.alpha, n)?;
    let y = &sum(&steps, n) * &g.exp_b;
    let mut ledger = RadiusLedger::new(prob.prime(), prob.alpha, &prob.logr, steps.len() as u32 - 1);
    let zero = LogValue::zero(prob.prime());
    for (entry, step) in ledger.entries.iter_mut().zip(&steps) {
        entry.correction_bounded = norm_bounded_by(&step.z, &entry.logr, &entry.logr);
        entry.gauge_bounded = step.gauge.as_ref().is_none_or(|(plus, minus)| {
            norm_bounded_by(plus, &zero, &entry.logr) && norm_bounded_by(minus, &zero, &entry.logr)
        });
    }
    let corrections = steps.into_iter().map(|s| s.z).collect();
    Ok(NewtonSolution { y, corrections, ledger })
}

/// `||y||_R <= R` on the truncation.
pub fn check_self_bounded(y: &TruncSeries, log_big_r: &LogValue) -> bool {
    norm_bounded_by(y, log_big_r, log_big_r)
}

/// The resolvent of the linear problem `x y' + alpha y = a`, all orders.
pub fn solve_linear(a: &TruncSeries, alpha: Alpha) -> TruncSeries {
    euler_inverse(a, alpha)
}

/// Shape of the random instances drawn by [`random_admissible`].
#[derive(Debug, Clone)]
pub struct InstanceShape {
    pub order: usize,
    /// Terms of `a`, `b` and each `c_m` live in degrees below this.
    pub max_degree: usize,
    pub max_terms: usize,
    /// Nonlinear powers `m` to draw from.
    pub powers: Vec<usize>,
}

impl InstanceShape {
    pub fn new(order: usize) -> Self {
        InstanceShape {
            order,
            max_degree: 7,
            max_terms: 3,
            powers: vec![2, 3],
        }
    }
}

fn small_unit<R: Rng>(rng: &mut R, p: u64) -> Rational {
    loop {
        let num: i64 = rng.gen_range(1..=6);
        let den: i64 = rng.gen_range(1..=4);
        if !(num as u64).is_multiple_of(p) && !(den as u64).is_multiple_of(p) {
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            return rat(sign * num, den);
        }
    }
}

fn p_power(p: u64, v: i64) -> Rational {
    Rational::from(Integer::from(p)).pow(v as i32)
}

/// `p^v * unit` terms with `v >= min_v(degree)`, at most `max_terms` of them.
fn random_sparse<R: Rng>(
    rng: &mut R,
    p: u64,
    degrees: std::ops::Range<usize>,
    shape: &InstanceShape,
    min_v: impl Fn(usize) -> i64,
) -> TruncSeries {
    let count = rng.gen_range(1..=shape.max_terms);
    let mut s = TruncSeries::zero(shape.order);
    for _ in 0..count {
        let e = rng.gen_range(degrees.clone());
        let v = min_v(e) + rng.gen_range(0..=1);
        s.set_coeff(e, p_power(p, v) * small_unit(rng, p));
    }
    s
}

/// A random problem at `p` satisfying every hypothesis of the Newton solver.
///
/// The radius is `p^(-u)` for `u` in `{0, 1/2, 1/3, 1}`; coefficients are
/// `p^v` times small units with `v` as small as the norm hypotheses allow
/// (plus at most one), so the hypotheses are often tight.
pub fn random_admissible<R: Rng>(rng: &mut R, p: OddPrime, shape: &InstanceShape) -> OdeProblem {
    let pv = p.get();
    loop {
        let s = rng.gen_range(1..pv);
        let t = rng.gen_range(1..pv);
        let Ok(alpha) = Alpha::new(s, t, p) else { continue };
        let u = [rat(0, 1), rat(1, 2), rat(1, 3), rat(1, 1)][rng.gen_range(0..4)].clone();
        let logr = LogValue::log_p(p).scale(&-u.clone());
        let top = shape.max_degree.min(shape.order) + 1;
        // -v + m logr/log p <= target  <=>  v >= m (-u) - target
        let need = |m: usize, target: &Rational| -> i64 {
            (-(int(m as i64) * &u) - target).ceil_int().to_i64().expect("small exponent")
        };
        let r_over_p = -(&u) - int(1);
        let inv_p = int(-1);
        let a = random_sparse(rng, pv, 2..top, shape, |m| need(m, &r_over_p));
        let b = if rng.gen_bool(0.7) {
            random_sparse(rng, pv, 2..top, shape, |m| need(m, &r_over_p))
        } else {
            TruncSeries::zero(shape.order)
        };
        let mut terms = Vec::new();
        for &m in &shape.powers {
            if rng.gen_bool(0.75) {
                terms.push((m, random_sparse(rng, pv, 0..top, shape, |j| need(j, &inv_p))));
            }
        }
        let c = SeriesFamily::new(terms).expect("distinct powers >= 2");
        let prob = OdeProblem::new(a, b, c, alpha, logr).expect("algebraic conditions hold by construction");
        if prob.check_hypotheses().is_ok() {
            return prob;
        }
    }
}
