//! Exact percentages with half-up rounding to one decimal.

use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// A count ratio kept exact until it is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    /// Percentage at full precision; 0 for an empty denominator.
    pub fn percent(&self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            100.0 * self.num as f64 / self.den as f64
        }
    }

    /// Percentage in tenths, rounded half-up with integer arithmetic.
    pub fn tenths(&self) -> i64 {
        if self.den == 0 {
            return 0;
        }
        let (n, d) = (self.num as u128, self.den as u128);
        ((2000 * n + d) / (2 * d)) as i64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_tenths(self.tenths()))
    }
}

/// Render tenths as `12.3`.
pub fn format_tenths(t: i64) -> String {
    let sign = if t < 0 { "-" } else { "" };
    let a = t.abs();
    format!("{sign}{}.{}", a / 10, a % 10)
}

/// Round a float percentage half-up to tenths. Only for values that did not
/// come from counts; count ratios should go through [`Ratio::tenths`].
pub fn round_tenths(p: f64) -> i64 {
    (p * 10.0 + 0.5 + 1e-9).floor() as i64
}

/// Delta suffix in the `(+x.y)` style; a zero delta is written `(+0)`.
pub fn format_delta(tenths: i64) -> String {
    if tenths == 0 {
        "(+0)".to_string()
    } else if tenths > 0 {
        format!("(+{})", format_tenths(tenths))
    } else {
        format!("({})", format_tenths(tenths))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up() {
        assert_eq!(Ratio::new(14, 44).to_string(), "31.8");
        assert_eq!(Ratio::new(1, 8).to_string(), "12.5");
        assert_eq!(Ratio::new(1, 16).to_string(), "6.3");
        assert_eq!(Ratio::new(1, 3).to_string(), "33.3");
        assert_eq!(Ratio::new(2, 3).to_string(), "66.7");
        assert_eq!(Ratio::new(0, 0).to_string(), "0.0");
        assert_eq!(Ratio::new(5, 5).to_string(), "100.0");
    }

    #[test]
    fn deltas() {
        assert_eq!(format_delta(0), "(+0)");
        assert_eq!(format_delta(125), "(+12.5)");
        assert_eq!(format_delta(-3), "(-0.3)");
    }

    #[test]
    fn float_rounding() {
        assert_eq!(round_tenths(31.75), 318);
        assert_eq!(round_tenths(64.28), 643);
    }
}
