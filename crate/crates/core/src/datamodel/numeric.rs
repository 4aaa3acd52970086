//! Fixed-point numbers at milli resolution.
//!
//! Every numeric value in the system is an `i64` count of thousandths, so
//! grounding, deduplication and comparison are exact. Overflow is always an
//! error, never wraparound.

use core::fmt;
use core::str::FromStr;

/// One thousandth units per whole unit.
pub const SCALE: i64 = 1000;

/// A signed fixed-point number with three fractional decimal digits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Numeric {
    scaled: i64,
}

/// Why an arithmetic step could not produce a value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithmeticKind {
    DivideByZero,
    NegativeSqrt,
    Overflow,
    NonIntegerExponent,
    NegativeExponent,
    NonNumericOperand,
    UnboundVariable,
}

impl fmt::Display for ArithmeticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticKind::DivideByZero => write!(f, "division by zero"),
            ArithmeticKind::NegativeSqrt => write!(f, "sqrt of negative value"),
            ArithmeticKind::Overflow => write!(f, "fixed-point overflow"),
            ArithmeticKind::NonIntegerExponent => write!(f, "exponent is not an integer"),
            ArithmeticKind::NegativeExponent => write!(f, "exponent is negative"),
            ArithmeticKind::NonNumericOperand => write!(f, "non-numeric operand"),
            ArithmeticKind::UnboundVariable => write!(f, "unbound variable in expression"),
        }
    }
}

/// Errors from [`Numeric::from_str`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumericParseError {
    Malformed,
    TooManyFractionDigits,
    OutOfRange,
}

impl fmt::Display for NumericParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericParseError::Malformed => write!(f, "malformed numeric literal"),
            NumericParseError::TooManyFractionDigits => {
                write!(f, "more than 3 fractional digits")
            }
            NumericParseError::OutOfRange => write!(f, "numeric literal out of range"),
        }
    }
}

impl core::error::Error for NumericParseError {}

/// Round an i128 quotient numerator/denominator to the nearest integer,
/// ties away from zero. `den` must be positive.
fn div_round(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    if num >= 0 {
        (num + den / 2) / den
    } else {
        (num - den / 2) / den
    }
}

fn clamp_i64(v: i128) -> Result<i64, ArithmeticKind> {
    i64::try_from(v).map_err(|_| ArithmeticKind::Overflow)
}

impl Numeric {
    pub const ZERO: Numeric = Numeric { scaled: 0 };
    pub const ONE: Numeric = Numeric { scaled: SCALE };

    /// Build from a raw milli count.
    pub const fn from_scaled(scaled: i64) -> Numeric {
        Numeric { scaled }
    }

    /// Build from a whole number of units.
    pub fn from_int(v: i64) -> Result<Numeric, ArithmeticKind> {
        v.checked_mul(SCALE)
            .map(Numeric::from_scaled)
            .ok_or(ArithmeticKind::Overflow)
    }

    pub const fn scaled(self) -> i64 {
        self.scaled
    }

    /// True when the value has no fractional part.
    pub const fn is_integer(self) -> bool {
        self.scaled % SCALE == 0
    }

    /// Whole-unit part, valid only when `is_integer`.
    pub const fn to_integer(self) -> i64 {
        self.scaled / SCALE
    }

    pub fn checked_add(self, rhs: Numeric) -> Result<Numeric, ArithmeticKind> {
        self.scaled
            .checked_add(rhs.scaled)
            .map(Numeric::from_scaled)
            .ok_or(ArithmeticKind::Overflow)
    }

    pub fn checked_sub(self, rhs: Numeric) -> Result<Numeric, ArithmeticKind> {
        self.scaled
            .checked_sub(rhs.scaled)
            .map(Numeric::from_scaled)
            .ok_or(ArithmeticKind::Overflow)
    }

    pub fn checked_neg(self) -> Result<Numeric, ArithmeticKind> {
        self.scaled
            .checked_neg()
            .map(Numeric::from_scaled)
            .ok_or(ArithmeticKind::Overflow)
    }

    /// Product rounded to the nearest milli, ties away from zero.
    pub fn checked_mul(self, rhs: Numeric) -> Result<Numeric, ArithmeticKind> {
        let wide = self.scaled as i128 * rhs.scaled as i128;
        clamp_i64(div_round(wide, SCALE as i128)).map(Numeric::from_scaled)
    }

    /// Quotient rounded to the nearest milli, ties away from zero.
    pub fn checked_div(self, rhs: Numeric) -> Result<Numeric, ArithmeticKind> {
        if rhs.scaled == 0 {
            return Err(ArithmeticKind::DivideByZero);
        }
        let num = self.scaled as i128 * SCALE as i128;
        let den = rhs.scaled as i128;
        // Normalize so the rounding helper sees a positive denominator.
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        clamp_i64(div_round(num, den)).map(Numeric::from_scaled)
    }

    /// Exponentiation by a non-negative integer exponent.
    pub fn checked_pow(self, exponent: Numeric) -> Result<Numeric, ArithmeticKind> {
        if !exponent.is_integer() {
            return Err(ArithmeticKind::NonIntegerExponent);
        }
        let e = exponent.to_integer();
        if e < 0 {
            return Err(ArithmeticKind::NegativeExponent);
        }
        let mut acc = Numeric::ONE;
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Square root rounded to the nearest milli, ties away from zero.
    pub fn checked_sqrt(self) -> Result<Numeric, ArithmeticKind> {
        if self.scaled < 0 {
            return Err(ArithmeticKind::NegativeSqrt);
        }
        // result = round(sqrt(scaled * 1000)): both sides carry milli scaling.
        let t = self.scaled as i128 * SCALE as i128;
        let r = t.isqrt();
        // Round up when sqrt(t) >= r + 1/2, i.e. (2r+1)^2 <= 4t. Exact ties
        // land on the away-from-zero side.
        let r = if (2 * r + 1).pow(2) <= 4 * t { r + 1 } else { r };
        clamp_i64(r).map(Numeric::from_scaled)
    }

    pub fn abs(self) -> Result<Numeric, ArithmeticKind> {
        self.scaled
            .checked_abs()
            .map(Numeric::from_scaled)
            .ok_or(ArithmeticKind::Overflow)
    }
}

impl FromStr for Numeric {
    type Err = NumericParseError;

    /// Accepts `[-]digits[.digits]` with at most three fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (rest, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(NumericParseError::Malformed);
        }
        let mut scaled: i128 = 0;
        for b in int_part.bytes() {
            scaled = scaled * 10 + (b - b'0') as i128;
            if scaled > i64::MAX as i128 {
                return Err(NumericParseError::OutOfRange);
            }
        }
        scaled *= SCALE as i128;
        if let Some(frac) = frac_part {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(NumericParseError::Malformed);
            }
            if frac.len() > 3 {
                return Err(NumericParseError::TooManyFractionDigits);
            }
            let mut f: i64 = 0;
            for b in frac.bytes() {
                f = f * 10 + (b - b'0') as i64;
            }
            for _ in frac.len()..3 {
                f *= 10;
            }
            scaled += f as i128;
        }
        if neg {
            scaled = -scaled;
        }
        i64::try_from(scaled)
            .map(Numeric::from_scaled)
            .map_err(|_| NumericParseError::OutOfRange)
    }
}

impl fmt::Display for Numeric {
    /// Canonical minimal form: no trailing zeros, no point for whole values.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.scaled < 0 { "-" } else { "" };
        let abs = (self.scaled as i128).unsigned_abs();
        let int = abs / SCALE as u128;
        let frac = (abs % SCALE as u128) as u32;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else if frac % 100 == 0 {
            write!(f, "{sign}{int}.{}", frac / 100)
        } else if frac % 10 == 0 {
            write!(f, "{sign}{int}.{:02}", frac / 10)
        } else {
            write!(f, "{sign}{int}.{frac:03}")
        }
    }
}

impl fmt::Debug for Numeric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Numeric({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn n(s: &str) -> Numeric {
        s.parse().unwrap()
    }

    #[test]
    fn parse_format_round_trip() {
        for s in [
            "0",
            "15.2",
            "45.8",
            "0.5",
            "1622541987.1",
            "-3.125",
            "30",
            "50",
            "0.001",
            "-0.001",
            "9223372036854775.807",
            "-9223372036854775.808",
        ] {
            assert_eq!(n(s).to_string(), s, "round trip of {s}");
        }
    }

    #[test]
    fn parse_rejects_bad_literals() {
        assert_eq!("1.2345".parse::<Numeric>(), Err(NumericParseError::TooManyFractionDigits));
        assert_eq!("1.".parse::<Numeric>(), Err(NumericParseError::Malformed));
        assert_eq!(".5".parse::<Numeric>(), Err(NumericParseError::Malformed));
        assert_eq!("--1".parse::<Numeric>(), Err(NumericParseError::Malformed));
        assert_eq!("9223372036854775.808".parse::<Numeric>(), Err(NumericParseError::OutOfRange));
    }

    #[test]
    fn exact_add_sub() {
        assert_eq!(n("1622541987.1").checked_add(n("0")).unwrap(), n("1622541987.1"));
        assert_eq!(n("18.7").checked_sub(n("15.2")).unwrap(), n("3.5"));
        assert_eq!(n("0.1").checked_add(n("0.2")).unwrap(), n("0.3"));
    }

    #[test]
    fn mul_div_round_to_nearest() {
        assert_eq!(n("3.5").checked_mul(n("3.5")).unwrap(), n("12.25"));
        assert_eq!(n("25").checked_div(n("5")).unwrap(), n("5"));
        assert_eq!(n("1").checked_div(n("3")).unwrap(), n("0.333"));
        assert_eq!(n("2").checked_div(n("3")).unwrap(), n("0.667"));
        // ties away from zero
        assert_eq!(n("0.001").checked_div(n("2")).unwrap(), n("0.001"));
        assert_eq!(n("-0.001").checked_div(n("2")).unwrap(), n("-0.001"));
    }

    #[test]
    fn sqrt_nearest_milli() {
        // sqrt(2) = 1.41421..., nearest milli is 1.414
        assert_eq!(n("2").checked_sqrt().unwrap(), n("1.414"));
        assert_eq!(n("12.25").checked_sqrt().unwrap(), n("3.5"));
        assert_eq!(n("0").checked_sqrt().unwrap(), n("0"));
        assert_eq!(n("-1").checked_sqrt(), Err(ArithmeticKind::NegativeSqrt));
    }

    #[test]
    fn pow_integer_exponents_only() {
        assert_eq!(n("3.5").checked_pow(n("2")).unwrap(), n("12.25"));
        assert_eq!(n("2").checked_pow(n("0")).unwrap(), n("1"));
        assert_eq!(n("2").checked_pow(n("0.5")), Err(ArithmeticKind::NonIntegerExponent));
        assert_eq!(n("2").checked_pow(n("-1")), Err(ArithmeticKind::NegativeExponent));
    }

    #[test]
    fn overflow_is_an_error() {
        let max = Numeric::from_scaled(i64::MAX);
        assert_eq!(max.checked_add(n("0.001")), Err(ArithmeticKind::Overflow));
        assert_eq!(max.checked_mul(n("2")), Err(ArithmeticKind::Overflow));
        assert_eq!(Numeric::from_scaled(i64::MIN).checked_neg(), Err(ArithmeticKind::Overflow));
    }
}
