use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact non-negative scaling exponent `p/q`, always stored reduced with `q > 0`.
///
/// Parsed only from `"p/q"` or integer strings: decimal input is rejected so that
/// exponent matching never depends on floating comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalExp {
    num: i64,
    den: i64,
}

impl RationalExp {
    pub const ZERO: RationalExp = RationalExp { num: 0, den: 1 };
    pub const ONE: RationalExp = RationalExp { num: 1, den: 1 };
    pub const HALF: RationalExp = RationalExp { num: 1, den: 2 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidRational(format!("{num}/{den}")));
        }
        let g = num.gcd(&den);
        let sign = den.signum();
        Ok(Self {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Space exponent `a ∈ [0, 1]`.
    pub fn check_a(self) -> Result<Self> {
        if self.num < 0 || self.num > self.den {
            return Err(Error::ExponentOutOfRange {
                name: "a",
                value: self.to_string(),
                range: "[0, 1]",
            });
        }
        Ok(self)
    }

    /// Angle exponent `b ∈ (0, 1]`.
    pub fn check_b(self) -> Result<Self> {
        if self.num <= 0 || self.num > self.den {
            return Err(Error::ExponentOutOfRange {
                name: "b",
                value: self.to_string(),
                range: "(0, 1]",
            });
        }
        Ok(self)
    }
}

impl fmt::Display for RationalExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RationalExp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational(s.to_string());
        let int = |t: &str| -> Result<i64> {
            let t = t.trim();
            if t.is_empty() || !t.trim_start_matches(['+', '-']).bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        match s.split_once('/') {
            Some((p, q)) => RationalExp::new(int(p)?, int(q)?).map_err(|_| bad()),
            None => RationalExp::new(int(s)?, 1),
        }
    }
}

impl Serialize for RationalExp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalExp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!("2/4".parse::<RationalExp>().unwrap(), RationalExp::HALF);
        assert_eq!("1".parse::<RationalExp>().unwrap(), RationalExp::ONE);
        assert_eq!("-3/-6".parse::<RationalExp>().unwrap(), RationalExp::HALF);
        assert_eq!(RationalExp::new(3, 9).unwrap().to_string(), "1/3");
    }

    #[test]
    fn rejects_floats_and_zero_denominator() {
        for s in ["0.5", "1/0", "1e0", "", "/2", "1/2/3", "a/b", "0.5/1"] {
            assert!(s.parse::<RationalExp>().is_err(), "{s}");
        }
    }

    #[test]
    fn ranges() {
        assert!(RationalExp::ZERO.check_a().is_ok());
        assert!(RationalExp::ZERO.check_b().is_err());
        assert!(RationalExp::new(3, 2).unwrap().check_a().is_err());
        assert!(RationalExp::new(-1, 2).unwrap().check_a().is_err());
    }

    #[test]
    fn serde_as_string() {
        let r = RationalExp::new(1, 3).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"1/3\"");
        assert_eq!(serde_json::from_str::<RationalExp>(&s).unwrap(), r);
        assert!(serde_json::from_str::<RationalExp>("0.5").is_err());
    }
}
