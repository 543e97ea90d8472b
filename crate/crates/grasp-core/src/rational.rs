//! Exact rational arithmetic for metrics and monetary cost.
//!
//! Security rates and secure-pass@k values are stored as exact fractions
//! and only rounded for display; costs are computed in decimal so cent-scale
//! amounts do not pick up binary-float drift. An `i128` numerator and
//! denominator is far more head-room than the workloads here need (counts
//! in the thousands, binomials up to C(25,12)).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

/// An exact rational number, always stored in lowest terms with a
/// positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct Rational {
    num: i128,
    den: i128,
}

/// Wire shape: `{ "num": .., "den": .. }`.
#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: i128,
    den: i128,
}

impl TryFrom<RationalRepr> for Rational {
    type Error = String;
    fn try_from(r: RationalRepr) -> Result<Self, String> {
        if r.den == 0 {
            return Err("rational denominator must be non-zero".into());
        }
        Ok(Rational::new(r.num, r.den))
    }
}

impl From<Rational> for RationalRepr {
    fn from(r: Rational) -> Self {
        RationalRepr { num: r.num, den: r.den }
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Build `num/den`, reducing to lowest terms. Panics on a zero
    /// denominator; fraction inputs here are always program-constructed.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational denominator must be non-zero");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational { num: sign * num / g, den: sign * den / g }
    }

    pub fn from_int(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    /// Parse a plain decimal literal such as `"0.150"`, `"25573.6"` or
    /// `"-2"`. Scientific notation is not accepted.
    pub fn parse_decimal(s: &str) -> Result<Self, ParseRationalError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError(s.to_string()));
        }
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (-1i128, r),
            None => (1i128, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseRationalError(s.to_string()));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(ParseRationalError(s.to_string()));
        }
        let mut num: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            num = num
                .checked_mul(10)
                .and_then(|n| n.checked_add((c as u8 - b'0') as i128))
                .ok_or_else(|| ParseRationalError(s.to_string()))?;
        }
        let mut den: i128 = 1;
        for _ in 0..frac_part.len() {
            den = den.checked_mul(10).ok_or_else(|| ParseRationalError(s.to_string()))?;
        }
        Ok(Rational::new(sign * num, den))
    }

    /// Exact conversion from an `f64` via its shortest round-trip decimal
    /// representation, so a config value written as `0.15` means 15/100.
    pub fn from_f64_literal(v: f64) -> Result<Self, ParseRationalError> {
        if !v.is_finite() {
            return Err(ParseRationalError(v.to_string()));
        }
        let s = format!("{}", v);
        if s.contains(['e', 'E']) {
            return Err(ParseRationalError(s));
        }
        Self::parse_decimal(&s)
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Round half away from zero to `places` decimal digits and render
    /// with exactly that many digits. `62/75` displays as `"0.83"` at two
    /// places and `5/8` as `"0.63"`, matching conventional table rounding.
    pub fn display_rounded(&self, places: u32) -> String {
        let scale = 10i128.pow(places);
        let scaled_num = self.num * scale;
        let q = scaled_num / self.den;
        let r = (scaled_num % self.den).abs();
        let half = r * 2 >= self.den; // den is positive by invariant
        let rounded = if half { q + self.num.signum() } else { q };
        let sign = if rounded < 0 { "-" } else { "" };
        let abs = rounded.abs();
        let int = abs / scale;
        if places == 0 {
            return format!("{sign}{int}");
        }
        let frac = abs % scale;
        format!("{sign}{int}.{frac:0width$}", width = places as usize)
    }

    pub fn abs(&self) -> Rational {
        Rational { num: self.num.abs(), den: self.den }
    }
}

/// Failed to parse a decimal literal into a rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a plain decimal literal: {0:?}")]
pub struct ParseRationalError(pub String);

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational::new(self.num * rhs.den - rhs.num * self.den, self.den * rhs.den)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        // Cross-reduce before multiplying to keep intermediates small.
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        Rational::new((self.num / g1) * (rhs.num / g2), (self.den / g2) * (rhs.den / g1))
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(rhs.num != 0, "division by zero rational");
        self * Rational::new(rhs.den, rhs.num)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        assert_eq!(Rational::new(62, 75), Rational::new(124, 150));
        assert_eq!(Rational::new(-4, -8), Rational::new(1, 2));
        assert_eq!(Rational::new(4, -8), Rational::new(-1, 2));
    }

    #[test]
    fn parses_decimal_literals() {
        assert_eq!(Rational::parse_decimal("0.150").unwrap(), Rational::new(3, 20));
        assert_eq!(Rational::parse_decimal("25573.6").unwrap(), Rational::new(255736, 10));
        assert_eq!(Rational::parse_decimal("-2").unwrap(), Rational::from_int(-2));
        assert_eq!(Rational::parse_decimal(".5").unwrap(), Rational::new(1, 2));
        assert!(Rational::parse_decimal("1e3").is_err());
        assert!(Rational::parse_decimal("").is_err());
    }

    #[test]
    fn f64_literal_uses_shortest_decimal() {
        assert_eq!(Rational::from_f64_literal(0.15).unwrap(), Rational::new(3, 20));
        assert_eq!(Rational::from_f64_literal(0.6).unwrap(), Rational::new(3, 5));
    }

    #[test]
    fn display_rounds_half_away_from_zero() {
        assert_eq!(Rational::new(62, 75).display_rounded(2), "0.83");
        assert_eq!(Rational::new(5, 8).display_rounded(2), "0.63");
        assert_eq!(Rational::new(-5, 8).display_rounded(2), "-0.63");
        assert_eq!(Rational::new(1, 1).display_rounded(2), "1.00");
        assert_eq!(Rational::new(129, 149).display_rounded(2), "0.87");
        assert_eq!(Rational::ZERO.display_rounded(4), "0.0000");
    }

    #[test]
    fn arithmetic_is_exact() {
        let c = Rational::new(255736, 10) * Rational::new(3, 20) / Rational::from_int(1_000_000)
            + Rational::new(995089, 100) * Rational::new(3, 5) / Rational::from_int(1_000_000);
        assert_eq!(c.display_rounded(4), "0.0098");
    }

    #[test]
    fn ordering_is_total() {
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
        assert!(Rational::new(-1, 2) < Rational::ZERO);
    }
}
