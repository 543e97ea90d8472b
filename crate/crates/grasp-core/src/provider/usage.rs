//! Token usage accounting and pricing.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Token counts for one or more provider calls. Merging is plain
/// addition, so totals are order-independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub calls: u64,
}

impl Usage {
    pub const ZERO: Usage = Usage { input_tokens: 0, output_tokens: 0, calls: 0 };

    pub fn one_call(input_tokens: u64, output_tokens: u64) -> Self {
        Usage { input_tokens, output_tokens, calls: 1 }
    }

    pub fn merge(self, other: Usage) -> Usage {
        Usage {
            input_tokens: self.input_tokens + other.input_tokens,
            output_tokens: self.output_tokens + other.output_tokens,
            calls: self.calls + other.calls,
        }
    }
}

impl Add for Usage {
    type Output = Usage;
    fn add(self, rhs: Usage) -> Usage {
        self.merge(rhs)
    }
}

impl AddAssign for Usage {
    fn add_assign(&mut self, rhs: Usage) {
        *self = self.merge(rhs);
    }
}

impl std::iter::Sum for Usage {
    fn sum<I: Iterator<Item = Usage>>(iter: I) -> Usage {
        iter.fold(Usage::ZERO, Usage::merge)
    }
}

/// Currency per million tokens, held exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pricing {
    pub input_rate: Rational,
    pub output_rate: Rational,
}

impl Pricing {
    /// Parse rates from decimal literals, e.g. `"0.150"` and `"0.600"`.
    pub fn parse(
        input_rate: &str,
        output_rate: &str,
    ) -> Result<Self, crate::rational::ParseRationalError> {
        Ok(Pricing {
            input_rate: Rational::parse_decimal(input_rate)?,
            output_rate: Rational::parse_decimal(output_rate)?,
        })
    }

    /// Cost of fractional token amounts (averages are fractional):
    /// `input × input_rate/10⁶ + output × output_rate/10⁶`, exact.
    /// Round only for display, four decimal places by convention.
    pub fn cost(&self, input_tokens: Rational, output_tokens: Rational) -> Rational {
        let million = Rational::from_int(1_000_000);
        input_tokens * self.input_rate / million + output_tokens * self.output_rate / million
    }

    /// Cost of one usage record.
    pub fn cost_of(&self, usage: &Usage) -> Rational {
        self.cost(
            Rational::from_int(usage.input_tokens as i128),
            Rational::from_int(usage.output_tokens as i128),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_associative_and_commutative() {
        let a = Usage::one_call(10, 20);
        let b = Usage::one_call(1, 2);
        let c = Usage::one_call(100, 200);
        assert_eq!((a + b) + c, a + (b + c));
        assert_eq!(a + b, b + a);
        assert_eq!(a + Usage::ZERO, a);
    }

    #[test]
    fn averaged_fractional_tokens_cost_matches_published_figure() {
        let pricing = Pricing::parse("0.150", "0.600").unwrap();
        let cost = pricing.cost(
            Rational::parse_decimal("25573.6").unwrap(),
            Rational::parse_decimal("9950.89").unwrap(),
        );
        assert_eq!(cost.display_rounded(4), "0.0098");
    }

    #[test]
    fn zero_usage_costs_nothing() {
        let pricing = Pricing::parse("0.150", "0.600").unwrap();
        assert_eq!(pricing.cost_of(&Usage::ZERO), Rational::ZERO);
    }

    #[test]
    fn one_million_tokens_each_way() {
        let pricing = Pricing::parse("0.150", "0.600").unwrap();
        let cost =
            pricing.cost_of(&Usage { input_tokens: 1_000_000, output_tokens: 1_000_000, calls: 1 });
        assert_eq!(cost.display_rounded(4), "0.7500");
    }
}
