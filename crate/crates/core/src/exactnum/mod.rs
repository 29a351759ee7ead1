//! Exact rationals, p-adic valuations, and certified comparison of formal
//! logarithms of radii.

mod interval;
mod logvalue;
mod prime;
pub(crate) mod rational;
mod valuation;

pub use interval::RationalInterval;
pub use logvalue::{ln_enclosure, ln_prime_enclosure, set_initial_enclosure_width, LogQuadratic, LogValue};
pub use prime::{is_prime, primes_up_to, OddPrime};
pub use rational::{format_rational, int, parse_rational, pow2, rat, Rational};
pub use rug::Integer;
pub use valuation::{vp, PadicVal};

pub(crate) use valuation::valuation_unchecked;
