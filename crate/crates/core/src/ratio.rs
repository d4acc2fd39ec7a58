//! Exact rational helpers. Loads and memory ratios stay rational end to end;
//! floats only appear when rendering CSV.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Ratio = BigRational;

pub fn ratio(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Ratio {
    Ratio::new(numer.into(), denom.into())
}

pub fn int(value: impl Into<BigInt>) -> Ratio {
    Ratio::from_integer(value.into())
}

/// `"num/den"` in lowest terms, including integers (`"5/1"`).
pub fn fraction_string(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"a/b"` or a plain integer.
pub fn parse_fraction(s: &str) -> Option<Ratio> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Ratio::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Ratio::from_integer),
    }
}

/// Decimal rendering with `digits` significant digits and trailing zeros
/// trimmed.
pub fn decimal_string(r: &Ratio, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let x = r.to_f64().unwrap_or(f64::NAN);
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn is_nonnegative(r: &Ratio) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_round_trip() {
        let r = ratio(4, 6);
        assert_eq!(fraction_string(&r), "2/3");
        assert_eq!(parse_fraction("2/3"), Some(r));
        assert_eq!(fraction_string(&int(5)), "5/1");
        assert_eq!(parse_fraction("7"), Some(int(7)));
        assert_eq!(parse_fraction("1/0"), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&ratio(2, 3), 12), "0.666666666667");
        assert_eq!(decimal_string(&int(20), 12), "20");
        assert_eq!(decimal_string(&ratio(97, 6), 12), "16.1666666667");
        assert_eq!(decimal_string(&int(0), 12), "0");
    }
}
