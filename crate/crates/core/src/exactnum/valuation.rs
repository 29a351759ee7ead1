use std::fmt;
use std::ops::Add;

use rug::Integer;
use num_traits::Zero;

use super::prime::is_prime;
use super::rational::Rational;
use crate::error::{Error, Result};

/// A p-adic valuation: an integer, or infinity for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PadicVal {
    Finite(i64),
    Infinity,
}

impl PadicVal {
    pub fn finite(self) -> Option<i64> {
        match self {
            PadicVal::Finite(v) => Some(v),
            PadicVal::Infinity => None,
        }
    }
}

impl Add for PadicVal {
    type Output = PadicVal;

    fn add(self, rhs: PadicVal) -> PadicVal {
        match (self, rhs) {
            (PadicVal::Finite(a), PadicVal::Finite(b)) => PadicVal::Finite(a + b),
            _ => PadicVal::Infinity,
        }
    }
}

impl fmt::Display for PadicVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadicVal::Finite(v) => v.fmt(f),
            PadicVal::Infinity => f.write_str("inf"),
        }
    }
}

pub(crate) fn int_valuation(n: &Integer, p: u64) -> i64 {
    debug_assert!(n.cmp0() != std::cmp::Ordering::Equal);
    let p = Integer::from(p);
    if !n.is_divisible(&p) {
        return 0;
    }
    n.clone().remove_factor(&p).1 as i64
}

/// Valuation of a nonzero-or-zero rational at a prime already known to be prime.
pub(crate) fn valuation_unchecked(x: &Rational, p: u64) -> PadicVal {
    if x.is_zero() {
        return PadicVal::Infinity;
    }
    PadicVal::Finite(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// Exponent of `p` in `x`, with `v_p(0) = Infinity`.
pub fn vp(x: &Rational, p: u64) -> Result<PadicVal> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    Ok(valuation_unchecked(x, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(vp(&rat(9, 5), 3).unwrap(), PadicVal::Finite(2));
        assert_eq!(vp(&int(0), 5).unwrap(), PadicVal::Infinity);
        assert_eq!(vp(&rat(3, 7), 7).unwrap(), PadicVal::Finite(-1));
        assert!(matches!(vp(&int(4), 4), Err(Error::InvalidArgument(_))));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-2000i64..2000, 1i64..2000).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn valuation_laws(x in arb_rational(), y in arb_rational(), pi in 0usize..4) {
            let p = [2u64, 3, 5, 7][pi];
            let (vx, vy) = (vp(&x, p).unwrap(), vp(&y, p).unwrap());
            prop_assert_eq!(vp(&(&x * &y), p).unwrap(), vx + vy);
            let vs = vp(&(&x + &y), p).unwrap();
            prop_assert!(vs >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
        }
    }
}
