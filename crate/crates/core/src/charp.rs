//! Reduction of a vector field modulo `p` and the test whether the reduced
//! derivation is closed under `p`-th powers, i.e. `D^p` is proportional to `D`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{Integer, OddPrime, Rational};
use crate::foliation::VectorField;

/// Sparse bivariate polynomial over the prime field, coefficients in `[0, p)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyModP {
    p: u64,
    terms: BTreeMap<(u32, u32), u64>,
}

impl PolyModP {
    pub fn zero(p: u64) -> Self {
        PolyModP { p, terms: BTreeMap::new() }
    }

    /// Coefficients are reduced on the way in; repeated exponents are summed.
    pub fn from_terms(p: u64, terms: impl IntoIterator<Item = ((u32, u32), i64)>) -> Self {
        let mut out = Self::zero(p);
        for (e, c) in terms {
            out.add_term(e, c.rem_euclid(p as i64) as u64);
        }
        out
    }

    fn add_term(&mut self, e: (u32, u32), c: u64) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0);
        *slot = add_mod(*slot, c, self.p);
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> u64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero(self.p);
        for ((i, j), c) in self.terms() {
            let k = if var == 0 { i } else { j };
            if k == 0 {
                continue;
            }
            let e = if var == 0 { (i - 1, j) } else { (i, j - 1) };
            out.add_term(e, mul_mod(c, k as u64 % self.p, self.p));
        }
        out
    }

    /// Product with every term of total degree above `horizon` dropped.
    fn mul_upto(&self, other: &Self, horizon: u32) -> Self {
        let mut out = Self::zero(self.p);
        for ((i, j), c) in self.terms() {
            for ((k, l), d) in other.terms() {
                if i + j + k + l <= horizon {
                    out.add_term((i + k, j + l), mul_mod(c, d, self.p));
                }
            }
        }
        out
    }

    fn sub(mut self, other: &Self) -> Self {
        for (e, c) in other.terms() {
            self.add_term(e, self.p - c);
        }
        self
    }

    fn scale(&self, c: u64) -> Self {
        let mut out = Self::zero(self.p);
        for (e, d) in self.terms() {
            out.add_term(e, mul_mod(c % self.p, d, self.p));
        }
        out
    }
}

fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl fmt::Display for PolyModP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| (i + j, std::cmp::Reverse(i)));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|e| {
                let c = self.terms[&e];
                let mono: Vec<String> = [("x1", e.0), ("x2", e.1)]
                    .into_iter()
                    .filter(|&(_, k)| k > 0)
                    .map(|(v, k)| if k == 1 { v.to_string() } else { format!("{v}^{k}") })
                    .collect();
                match (c, mono.is_empty()) {
                    (_, true) => c.to_string(),
                    (1, false) => mono.join("*"),
                    _ => format!("{c}*{}", mono.join("*")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for PolyModP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (mod {})", self.p)
    }
}

impl Serialize for PolyModP {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<((u32, u32), u64)> = self.terms().collect();
        v.serialize(s)
    }
}

/// `P d/dx1 + Q d/dx2` over the prime field, with the total degree above
/// which iterated derivatives are discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModPField {
    p: u64,
    #[serde(rename = "P")]
    pbar: PolyModP,
    #[serde(rename = "Q")]
    qbar: PolyModP,
    degree_budget: usize,
}

impl ModPField {
    /// The budget defaults to [`ModPField::required_budget`].
    pub fn new(p: OddPrime, pbar: PolyModP, qbar: PolyModP) -> Result<Self> {
        let p = p.get();
        if pbar.p != p || qbar.p != p {
            return Err(Error::invalid("components reduced modulo a different prime"));
        }
        let mut f = ModPField {
            p,
            pbar,
            qbar,
            degree_budget: 0,
        };
        f.degree_budget = f.required_budget();
        Ok(f)
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.degree_budget = budget;
        self
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn p_bar(&self) -> &PolyModP {
        &self.pbar
    }

    pub fn q_bar(&self) -> &PolyModP {
        &self.qbar
    }

    pub fn degree_budget(&self) -> usize {
        self.degree_budget
    }

    pub fn max_degree(&self) -> usize {
        self.pbar.degree().into_iter().chain(self.qbar.degree()).max().unwrap_or(0) as usize
    }

    /// `p (d - 1) + 1`: each application of `D` raises degree by at most
    /// `d - 1`, starting from the degree-one coordinates.
    pub fn required_budget(&self) -> usize {
        self.p as usize * self.max_degree().saturating_sub(1) + 1
    }

    fn apply(&self, f: &PolyModP, horizon: u32) -> PolyModP {
        let mut out = self.pbar.mul_upto(&f.partial(0), horizon);
        for (e, c) in self.qbar.mul_upto(&f.partial(1), horizon).terms() {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, c: u64) -> Result<Self> {
        if c.is_multiple_of(self.p) {
            return Err(Error::invalid("scaling by zero in the prime field"));
        }
        Ok(ModPField {
            pbar: self.pbar.scale(c),
            qbar: self.qbar.scale(c),
            ..self.clone()
        })
    }
}

fn reduce(q: &Rational, p: u64) -> Option<u64> {
    let pz = Integer::from(p);
    let den = Integer::from(q.denom() % &pz);
    let inv = den.invert(&pz).ok()?;
    let mut r = Integer::from(q.numer() % &pz) * inv % &pz;
    if r.cmp0() == std::cmp::Ordering::Less {
        r += &pz;
    }
    Some(r.to_u64().expect("residue below p"))
}

pub fn reduce_mod_p(v: &VectorField, p: OddPrime) -> Result<ModPField> {
    let red = |poly: &crate::foliation::Poly2| -> Result<PolyModP> {
        let mut out = PolyModP::zero(p.get());
        for (e, c) in poly.terms() {
            let r = reduce(c, p.get()).ok_or_else(|| Error::BadReduction {
                prime: p.get(),
                detail: format!("p divides the denominator of {c}"),
            })?;
            out.add_term(e, r);
        }
        Ok(out)
    };
    ModPField::new(p, red(v.p())?, red(v.q())?)
}

/// `D^p(x1)` and `D^p(x2)`, exact in every degree up to `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PthPower {
    pub dp_x1: PolyModP,
    pub dp_x2: PolyModP,
    pub horizon: usize,
}

pub fn pth_power_on_coords(f: &ModPField) -> Result<PthPower> {
    let required = f.required_budget();
    if f.degree_budget < required {
        return Err(Error::InsufficientBudget {
            required,
            given: f.degree_budget,
        });
    }
    let horizon = u32::try_from(f.degree_budget).map_err(|_| Error::invalid("degree budget too large"))?;
    let iterate = |start: PolyModP| (0..f.p).fold(start, |g, _| f.apply(&g, horizon));
    Ok(PthPower {
        dp_x1: iterate(PolyModP::from_terms(f.p, [((1, 0), 1)])),
        dp_x2: iterate(PolyModP::from_terms(f.p, [((0, 1), 1)])),
        horizon: f.degree_budget,
    })
}

/// Whether `D^p(x1) Q - D^p(x2) P` vanishes, i.e. `D^p` is proportional to `D`.
pub fn p_closed_test(f: &ModPField) -> Result<bool> {
    let pw = pth_power_on_coords(f)?;
    let top = u32::MAX;
    let det = pw.dp_x1.mul_upto(&f.qbar, top).sub(&pw.dp_x2.mul_upto(&f.pbar, top));
    Ok(det.is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Closure {
    Closed,
    NotClosed,
    BadReduction,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Closure::Closed => "closed",
            Closure::NotClosed => "not-closed",
            Closure::BadReduction => "bad-reduction",
        })
    }
}

impl Serialize for Closure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn closure_at(v: &VectorField, p: OddPrime) -> Result<Closure> {
    match reduce_mod_p(v, p) {
        Err(Error::BadReduction { .. }) => Ok(Closure::BadReduction),
        Err(e) => Err(e),
        Ok(f) => Ok(if p_closed_test(&f)? { Closure::Closed } else { Closure::NotClosed }),
    }
}

/// [`closure_at`] for every odd prime in `lo..=hi`, in increasing order.
pub fn closure_scan(v: &VectorField, lo: u64, hi: u64) -> Result<Vec<(u64, Closure)>> {
    crate::exactnum::primes_up_to(hi)
        .into_par_iter()
        .filter(|&p| p >= lo && p > 2)
        .map(|p| Ok((p, closure_at(v, OddPrime::new(p)?)?)))
        .collect()
}
