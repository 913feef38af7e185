//! Exact rationals and the integer combinatorics used by the Leibniz rules.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{format, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`. The literal must already be in lowest terms with
/// a positive denominator so that printing it back gives the same string.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .or_else(|_| format(format!("bad rational literal {s:?}")))?;
    let d: BigInt = d
        .parse()
        .or_else(|_| format(format!("bad rational literal {s:?}")))?;
    if !d.is_positive() {
        return format(format!("non-positive denominator in {s:?}"));
    }
    let r = Rat::new(n.clone(), d.clone());
    if *r.numer() != n || *r.denom() != d {
        return format(format!("rational {s:?} is not in lowest terms"));
    }
    Ok(r)
}

pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

/// Generalized binomial C(n, k) = n(n-1)...(n-k+1)/k! for any integer n.
pub fn binom(n: i64, k: u32) -> Rat {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..k as i64 {
        num *= BigInt::from(n - t);
        den *= BigInt::from(t + 1);
    }
    Rat::new(num, den)
}

/// Falling factorial n(n-1)...(n-k+1), for any integer n.
pub fn falling(n: i64, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..k as i64 {
        acc *= BigInt::from(n - t);
    }
    acc
}

pub fn factorial(k: u32) -> BigInt {
    falling(k as i64, k)
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

pub fn floor_rat(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

pub fn zero() -> Rat {
    Rat::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_binomials() {
        // (1+y)^{-1} = 1 - y + y^2 - ...
        assert_eq!(binom(-1, 3), rat(-1));
        assert_eq!(binom(-2, 2), rat(3));
        assert_eq!(binom(5, 7), rat(0));
        assert_eq!(binom(4, 2), rat(6));
    }

    #[test]
    fn literals_round_trip() {
        for s in ["0", "-3", "7/2", "-11/6"] {
            assert_eq!(fmt_rat(&parse_rat(s).unwrap()), s);
        }
        assert!(parse_rat("2/4").is_err());
        assert!(parse_rat("1/-2").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling(5, 2), BigInt::from(20));
        assert_eq!(falling(-1, 3), BigInt::from(-6));
        assert_eq!(factorial(4), BigInt::from(24));
    }
}
