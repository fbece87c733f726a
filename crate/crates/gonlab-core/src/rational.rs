//! Exact rational scalars used for edge lengths and point offsets.
//!
//! All metric data in this crate is exact: lengths and offsets are
//! `num_rational::Rational64` values, serialized as decimal-free strings
//! like `"1"`, `"3/2"`.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = Rational64;

/// Shorthand constructor, panics on zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer, denom)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"p"` or `"p/q"` (optionally signed) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RatParseError::Empty);
    }
    let (numer, denom) = match s.split_once('/') {
        None => (s, "1"),
        Some((n, d)) => (n, d),
    };
    let n: i64 = numer
        .parse()
        .map_err(|_| RatParseError::Malformed(s.to_string()))?;
    let d: i64 = denom
        .parse()
        .map_err(|_| RatParseError::Malformed(s.to_string()))?;
    if d == 0 {
        return Err(RatParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(n, d))
}

/// Formats a rational as `"p"` when integral, `"p/q"` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of the denominators of the given rationals.
///
/// Returns 1 for an empty iterator. The result is the smallest positive
/// integer `L` such that `L * r` is an integer for every input `r`.
pub fn lcm_of_denominators<'a, I: IntoIterator<Item = &'a Rat>>(items: I) -> i64 {
    items
        .into_iter()
        .fold(1i64, |acc, r| acc.lcm(r.denom()))
}

/// True when `r * scale` is an integer.
pub fn is_integral_after(r: &Rat, scale: i64) -> bool {
    (r * Rat::from_integer(scale)).is_integer()
}

pub fn rat_is_positive(r: &Rat) -> bool {
    r.is_positive() && !r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "1", "-3", "3/2", "-7/5", "2/4"] {
            let r = parse_rat(s).unwrap();
            let t = format_rat(&r);
            assert_eq!(parse_rat(&t).unwrap(), r);
        }
        // stored reduced
        assert_eq!(format_rat(&parse_rat("2/4").unwrap()), "1/2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1.5").is_err());
    }

    #[test]
    fn lcm_denominators() {
        let xs = [rat(1, 2), rat(1, 3)];
        assert_eq!(lcm_of_denominators(xs.iter()), 6);
        let ys = [rat(2, 4)];
        assert_eq!(lcm_of_denominators(ys.iter()), 2);
        assert_eq!(lcm_of_denominators([].iter()), 1);
    }
}
