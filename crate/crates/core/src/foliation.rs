//! Polynomial plane vector fields `D = P d/dx1 + Q d/dx2` near a singular
//! point at the origin: linear-part classification, the two separatrices of
//! a non-degenerate reduced singularity in normal form, and the two affine
//! charts of the blow-up.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Integer, Rational};
use crate::series::TruncSeries;

/// Sparse bivariate polynomial over Q; `(i, j)` keys the monomial `x1^i x2^j`.
/// Zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        Self::from_terms([((i, j), c)])
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn x1() -> Self {
        Self::monomial(1, 0, Rational::one())
    }

    pub fn x2() -> Self {
        Self::monomial(0, 1, Rational::one())
    }

    /// Repeated exponents are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Rational)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    /// Lowest total degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).min()
    }

    /// Terms of total degree at least `d`.
    pub fn part_from(&self, d: u32) -> Self {
        Poly2 {
            terms: self.terms.iter().filter(|(&(i, j), _)| i + j >= d).map(|(&e, c)| (e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(&e, q)| (e, q * c)).collect(),
        }
    }

    pub fn partial_x1(&self) -> Self {
        Self::from_terms(self.terms().filter(|((i, _), _)| *i > 0).map(|((i, j), c)| ((i - 1, j), c * Rational::from(i as i64))))
    }

    pub fn partial_x2(&self) -> Self {
        Self::from_terms(self.terms().filter(|((_, j), _)| *j > 0).map(|((i, j), c)| ((i, j - 1), c * Rational::from(j as i64))))
    }

    /// Exact division by `x1`; a term free of `x1` is an error.
    pub fn div_x1(&self) -> Result<Self> {
        self.div_monomial(1, 0)
    }

    pub fn div_x2(&self) -> Result<Self> {
        self.div_monomial(0, 1)
    }

    fn div_monomial(&self, a: u32, b: u32) -> Result<Self> {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if i < a || j < b {
                return Err(Error::invalid(format!("x1^{a} x2^{b} does not divide the term x1^{i} x2^{j}")));
            }
            out.terms.insert((i - a, j - b), c.clone());
        }
        Ok(out)
    }

    pub fn eval(&self, x1: &Rational, x2: &Rational) -> Rational {
        self.terms().map(|((i, j), c)| c * x1.pow(i as i32) * x2.pow(j as i32)).sum()
    }

    /// `self(a, b)` for polynomial arguments.
    pub fn compose(&self, a: &Poly2, b: &Poly2) -> Poly2 {
        let (da, db) = self.terms.keys().fold((0, 0), |(x, y), &(i, j)| (x.max(i), y.max(j)));
        let pa = powers(a, da, Poly2::constant(Rational::one()), |u, v| u * v);
        let pb = powers(b, db, Poly2::constant(Rational::one()), |u, v| u * v);
        let mut out = Poly2::zero();
        for ((i, j), c) in self.terms() {
            out = out + (&pa[i as usize] * &pb[j as usize]).scale(c);
        }
        out
    }

    /// `self(a(T), b(T))` in the truncated series ring; needs `a(0) = b(0) = 0`
    /// unless the polynomial is free of the corresponding variable.
    pub fn eval_series(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        let n = a.order().min(b.order());
        let (da, db) = self.terms.keys().fold((0, 0), |(x, y), &(i, j)| (x.max(i), y.max(j)));
        let pa = powers(a, da, TruncSeries::one(n), |u, v| u.mul_trunc(v));
        let pb = powers(b, db, TruncSeries::one(n), |u, v| u.mul_trunc(v));
        let mut out = TruncSeries::zero(n);
        for ((i, j), c) in self.terms() {
            out = out + pa[i as usize].mul_trunc(&pb[j as usize]).scale(c);
        }
        out
    }
}

fn powers<T: Clone>(base: &T, top: u32, one: T, mul: impl Fn(&T, &T) -> T) -> Vec<T> {
    let mut out = Vec::with_capacity(top as usize + 1);
    out.push(one);
    for k in 1..=top as usize {
        let next = mul(&out[k - 1], base);
        out.push(next);
    }
    out
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(mut self, r: Poly2) -> Poly2 {
        for (e, c) in r.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, r: Poly2) -> Poly2 {
        self + (-r)
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, r: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), c) in self.terms() {
            for ((k, l), d) in r.terms() {
                out.add_term((i + k, j + l), c * d);
            }
        }
        out
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        // Lowest degree first, then by descending power of x1.
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| (i + j, std::cmp::Reverse(i)));
        for (n, e) in keys.into_iter().enumerate() {
            let c = &self.terms[&e];
            let mag = c.abs();
            match (n, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mono: Vec<String> = [("x1", e.0), ("x2", e.1)]
                .into_iter()
                .filter(|&(_, k)| k > 0)
                .map(|(v, k)| if k == 1 { v.to_string() } else { format!("{v}^{k}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<((u32, u32), String)> = self.terms().map(|(e, c)| (e, format_rational(c))).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Vec::<((u32, u32), String)>::deserialize(d)?;
        let mut out = Poly2::zero();
        for (e, c) in v {
            out.add_term(e, parse_rational(&c).map_err(D::Error::custom)?);
        }
        Ok(out)
    }
}

/// 2x2 rational matrix, row major.
pub type Mat2 = [[Rational; 2]; 2];

#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VectorField {
    #[serde(rename = "P")]
    p: Poly2,
    #[serde(rename = "Q")]
    q: Poly2,
}

impl VectorField {
    pub fn new(p: Poly2, q: Poly2) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::invalid("the zero vector field defines no foliation"));
        }
        Ok(VectorField { p, q })
    }

    /// `x1 d/dx1 + lambda x2 d/dx2 + f1 d/dx1 + f2 d/dx2`.
    pub fn normal_form(lambda: Rational, f1: Poly2, f2: Poly2) -> Result<Self> {
        Self::new(Poly2::x1() + f1, Poly2::x2().scale(&lambda) + f2)
    }

    pub fn p(&self) -> &Poly2 {
        &self.p
    }

    pub fn q(&self) -> &Poly2 {
        &self.q
    }

    pub fn max_degree(&self) -> u32 {
        self.p.degree().into_iter().chain(self.q.degree()).max().unwrap_or(0)
    }

    /// `D(f) = P df/dx1 + Q df/dx2`.
    pub fn apply(&self, f: &Poly2) -> Poly2 {
        &self.p * &f.partial_x1() + &self.q * &f.partial_x2()
    }

    /// `[[dP/dx1, dP/dx2], [dQ/dx1, dQ/dx2]]` at the origin.
    pub fn linear_part(&self) -> Mat2 {
        [
            [self.p.coeff(1, 0), self.p.coeff(0, 1)],
            [self.q.coeff(1, 0), self.q.coeff(0, 1)],
        ]
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.p.coeff(0, 0).is_zero() && self.q.coeff(0, 0).is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::invalid("scaling a vector field by zero"));
        }
        Ok(VectorField {
            p: self.p.scale(c),
            q: self.q.scale(c),
        })
    }

    /// The same field in coordinates `u` with `x = S u`.
    pub fn linear_change(&self, s: &Mat2) -> Result<Self> {
        let det = &s[0][0] * &s[1][1] - &s[0][1] * &s[1][0];
        if det.is_zero() {
            return Err(Error::invalid("singular change of coordinates"));
        }
        let u1 = Poly2::x1();
        let u2 = Poly2::x2();
        let x1 = u1.scale(&s[0][0]) + u2.scale(&s[0][1]);
        let x2 = u1.scale(&s[1][0]) + u2.scale(&s[1][1]);
        let p = self.p.compose(&x1, &x2);
        let q = self.q.compose(&x1, &x2);
        let inv = det.recip();
        Self::new(
            (p.scale(&s[1][1]) - q.scale(&s[0][1])).scale(&inv),
            (q.scale(&s[0][0]) - p.scale(&s[1][0])).scale(&inv),
        )
    }

    /// If the linear part is `diag(1, lambda)`, returns `lambda`.
    pub fn normal_form_lambda(&self) -> Option<Rational> {
        let [[a, b], [c, d]] = self.linear_part();
        (a.is_one() && b.is_zero() && c.is_zero()).then_some(d)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) d/dx1 + ({}) d/dx2", self.p, self.q)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'de> Deserialize<'de> for VectorField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            #[serde(rename = "P", default)]
            p: Poly2,
            #[serde(rename = "Q", default)]
            q: Poly2,
        }
        let r = Repr::deserialize(d)?;
        VectorField::new(r.p, r.q).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SingularityKind {
    NondegenerateReduced,
    DegenerateReduced,
    NonReduced,
    /// The eigenvalues are conjugate irrationals with irrational ratio.
    IrrationalRatio,
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularityKind::NondegenerateReduced => "nondegenerateReduced",
            SingularityKind::DegenerateReduced => "degenerateReduced",
            SingularityKind::NonReduced => "nonReduced",
            SingularityKind::IrrationalRatio => "irrationalRatio",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityClass {
    pub kind: SingularityKind,
    /// `(alpha1, alpha2)` when both are rational. For a diagonal linear part
    /// this is `(dP/dx1, dQ/dx2)`; otherwise a positive eigenvalue comes first.
    pub eigenvalues: Option<(Rational, Rational)>,
    /// `alpha2 / alpha1 = -s/t`, for the non-degenerate reduced kind only.
    pub alpha: Option<Rational>,
    pub s: Option<u64>,
    pub t: Option<u64>,
}

impl Serialize for SingularityClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            kind: SingularityKind,
            #[serde(skip_serializing_if = "Option::is_none")]
            eigenvalues: Option<[String; 2]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            alpha: Option<String>,
            #[serde(skip_serializing_if = "Option::is_none")]
            s: Option<u64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            t: Option<u64>,
        }
        Repr {
            kind: self.kind,
            eigenvalues: self.eigenvalues.as_ref().map(|(a, b)| [format_rational(a), format_rational(b)]),
            alpha: self.alpha.as_ref().map(format_rational),
            s: self.s,
            t: self.t,
        }
        .serialize(s)
    }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() || !q.numer().is_perfect_square() || !q.denom().is_perfect_square() {
        return None;
    }
    Some(Rational::new(q.numer().clone().sqrt(), q.denom().clone().sqrt()))
}

/// Rational eigenvalues of the linear part in the order described on
/// [`SingularityClass::eigenvalues`].
fn rational_eigenvalues(m: &Mat2) -> Option<(Rational, Rational)> {
    let [[a, b], [c, d]] = m;
    if b.is_zero() && c.is_zero() {
        return Some((a.clone(), d.clone()));
    }
    let tr = a + d;
    let det = a * d - b * c;
    let disc = &tr * &tr - det * Rational::from(4);
    let r = rational_sqrt(&disc)?;
    let half = Rational::new(Integer::from(1), Integer::from(2));
    let hi = (&tr + &r) * &half;
    let lo = (&tr - &r) * &half;
    Some(if lo.is_positive() && !hi.is_positive() { (lo, hi) } else { (hi, lo) })
}

pub fn classify_singularity(v: &VectorField) -> Result<SingularityClass> {
    if !v.vanishes_at_origin() {
        return Err(Error::invalid("the field does not vanish at the origin"));
    }
    let m = v.linear_part();
    let Some((e1, e2)) = rational_eigenvalues(&m) else {
        // Conjugate roots (tr +- sqrt(disc))/2 have rational ratio only when
        // the trace vanishes, in which case the ratio is -1.
        let trace_free = (&m[0][0] + &m[1][1]).is_zero();
        return Ok(if trace_free {
            SingularityClass {
                kind: SingularityKind::NondegenerateReduced,
                eigenvalues: None,
                alpha: Some(Rational::from(-1)),
                s: Some(1),
                t: Some(1),
            }
        } else {
            SingularityClass {
                kind: SingularityKind::IrrationalRatio,
                eigenvalues: None,
                alpha: None,
                s: None,
                t: None,
            }
        });
    };
    let bare = |kind| SingularityClass {
        kind,
        eigenvalues: Some((e1.clone(), e2.clone())),
        alpha: None,
        s: None,
        t: None,
    };
    Ok(match (e1.is_zero(), e2.is_zero()) {
        (true, true) => bare(SingularityKind::NonReduced),
        (true, false) | (false, true) => bare(SingularityKind::DegenerateReduced),
        (false, false) => {
            let alpha = &e2 / &e1;
            if alpha.is_positive() {
                bare(SingularityKind::NonReduced)
            } else {
                let (s, t) = (alpha.numer().clone().abs().to_u64(), alpha.denom().to_u64());
                SingularityClass {
                    alpha: Some(alpha),
                    s,
                    t,
                    ..bare(SingularityKind::NondegenerateReduced)
                }
            }
        }
    })
}

/// Change of basis `x = S u` and rescaling by `1/alpha1` bringing the linear
/// part to `diag(1, alpha)`. Returns the normalized field and `S`.
pub fn normalize(v: &VectorField) -> Result<(VectorField, Mat2)> {
    let class = classify_singularity(v)?;
    let (Some((e1, e2)), SingularityKind::NondegenerateReduced) = (&class.eigenvalues, class.kind) else {
        return Err(Error::precondition(format!(
            "normalization needs a non-degenerate reduced singularity with rational eigenvalues, found {}",
            class.kind
        )));
    };
    let m = v.linear_part();
    let s = [unit_at(eigenvector(&m, e1), 0), unit_at(eigenvector(&m, e2), 1)];
    let s: Mat2 = [[s[0][0].clone(), s[1][0].clone()], [s[0][1].clone(), s[1][1].clone()]];
    let w = v.linear_change(&s)?.scale(&e1.recip())?;
    Ok((w, s))
}

/// Rescales `v` so that entry `k` is one, when that entry is nonzero.
fn unit_at(v: [Rational; 2], k: usize) -> [Rational; 2] {
    if v[k].is_zero() {
        return v;
    }
    let c = v[k].recip();
    v.map(|x| x * &c)
}

/// A kernel vector of `m - e` for a simple eigenvalue `e`.
fn eigenvector(m: &Mat2, e: &Rational) -> [Rational; 2] {
    let a = &m[0][0] - e;
    let b = m[0][1].clone();
    let c = m[1][0].clone();
    let d = &m[1][1] - e;
    if !a.is_zero() || !b.is_zero() {
        if b.is_zero() {
            [Rational::zero(), Rational::one()]
        } else {
            [b, -a]
        }
    } else if c.is_zero() {
        [Rational::one(), Rational::zero()]
    } else {
        [-d, c]
    }
}

/// Which separatrix: `X2 = phi(X1)` (2) or `X1 = phi(X2)` (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Which {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl TryFrom<u8> for Which {
    type Error = Error;
    fn try_from(w: u8) -> Result<Self> {
        match w {
            1 => Ok(Which::One),
            2 => Ok(Which::Two),
            _ => Err(Error::invalid(format!("separatrix index must be 1 or 2, got {w}"))),
        }
    }
}

/// Left side of the invariance equation for the graph of `phi`, truncated at
/// order `n`. For `Which::Two` this is `Q(T, phi) - phi' P(T, phi)`; for
/// `Which::One`, `P(phi, T) - phi' Q(phi, T)`. On a normal form these are the
/// two displayed separatrix equations.
pub fn invariance_defect(v: &VectorField, phi: &TruncSeries, which: Which, n: usize) -> Result<TruncSeries> {
    if !phi.coeff(0).is_zero() {
        return Err(Error::invalid("the graph must pass through the origin"));
    }
    let phi = TruncSeries::from_terms(phi.terms().map(|(e, c)| (e, c.clone())), n);
    let t = TruncSeries::x(n);
    let dphi = TruncSeries::from_terms(phi.derivative().terms().map(|(e, c)| (e, c.clone())), n);
    let (along, across) = match which {
        Which::Two => (&v.p, &v.q),
        Which::One => (&v.q, &v.p),
    };
    let (a, b) = match which {
        Which::Two => (&t, &phi),
        Which::One => (&phi, &t),
    };
    Ok(across.eval_series(a, b) - dphi.mul_trunc(&along.eval_series(a, b)))
}

/// The unique separatrix vanishing to order two, through order `n`.
pub fn separatrix_series(v: &VectorField, which: Which, n: usize) -> Result<TruncSeries> {
    let lambda = v
        .normal_form_lambda()
        .ok_or_else(|| Error::precondition("the linear part is not diag(1, lambda)"))?;
    let class = classify_singularity(v)?;
    if class.kind != SingularityKind::NondegenerateReduced {
        return Err(Error::precondition(format!("separatrices need a non-degenerate reduced singularity, found {}", class.kind)));
    }
    let mut phi = TruncSeries::zero(n);
    for m in 2..=n {
        // The coefficient of T^m in the defect is affine in a_m with slope
        // (lambda - m) or (1 - m lambda); lower coefficients are final.
        let known = invariance_defect(v, &phi.truncate(m), which, m)?.coeff(m).clone();
        let mr = Rational::from(m as i64);
        let slope = match which {
            Which::Two => &lambda - &mr,
            Which::One => Rational::one() - &mr * &lambda,
        };
        phi.set_coeff(m, -known / slope);
    }
    Ok(phi)
}

/// Chart 1 is `(x1, x2) = (y1 y2, y2)`, chart 2 is `(x1, x2) = (u1, u1 u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl TryFrom<u8> for Chart {
    type Error = Error;
    fn try_from(c: u8) -> Result<Self> {
        match c {
            1 => Ok(Chart::One),
            2 => Ok(Chart::Two),
            _ => Err(Error::invalid(format!("chart must be 1 or 2, got {c}"))),
        }
    }
}

/// The transform of `D` to one chart of the blow-up at the origin, without
/// dividing out any power of the exceptional divisor.
pub fn blowup_chart(v: &VectorField, chart: Chart) -> Result<VectorField> {
    if !v.vanishes_at_origin() {
        return Err(Error::invalid("the field does not vanish at the origin"));
    }
    let (y1, y2) = (Poly2::x1(), Poly2::x2());
    let (p, q) = match chart {
        Chart::One => {
            let x1 = &y1 * &y2;
            let p = v.p.compose(&x1, &y2);
            let q = v.q.compose(&x1, &y2);
            ((p - &y1 * &q).div_x2()?, q)
        }
        Chart::Two => {
            let x2 = &y1 * &y2;
            let p = v.p.compose(&y1, &x2);
            let q = v.q.compose(&y1, &x2);
            (p.clone(), (q - &y2 * &p).div_x1()?)
        }
    };
    VectorField::new(p, q)
}
