//! Exact rational values and their text renderings.
//!
//! Every probability in the crate is an [`ExactRational`]. Decimal output is
//! a presentation concern only; the `p/q` form is always authoritative.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, kept in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Default number of significant digits for decimal rendering.
pub const DEFAULT_DIGITS: usize = 12;

pub fn ratio(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> ExactRational {
    BigRational::new(numer.into(), denom.into())
}

/// Renders `r` as `p/q`, always including the denominator (`1/1`, `0/1`).
pub fn to_fraction_string(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_fraction(s: &str) -> Result<ExactRational> {
    let bad = || Error::ParseRational(s.to_string());
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// Renders `r` in positional decimal notation rounded half-to-even to
/// `digits` significant digits. Trailing zeros are trimmed but at least one
/// fractional digit is kept, so `1` renders as `1.0`.
pub fn to_decimal(r: &ExactRational, digits: usize) -> String {
    let digits = digits.max(1);
    if r.is_zero() {
        return "0.0".to_string();
    }
    let negative = r.numer().sign() == Sign::Minus;
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();

    // Decimal exponent e with 10^e <= num/den < 10^(e+1).
    let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
    if !ge_power_of_ten(&num, &den, exp) {
        exp -= 1;
    }

    let mut shift = digits as i64 - 1 - exp;
    let mut mantissa = round_half_even_scaled(&num, &den, shift);
    let ten = BigUint::from(10u32);
    if mantissa == Pow::pow(&ten, digits as u32) {
        mantissa /= &ten;
        shift -= 1;
    }

    let body = mantissa.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&body);
        out.extend(std::iter::repeat_n('0', (-shift) as usize));
        out.push_str(".0");
        return out;
    }
    let shift = shift as usize;
    let padded = if body.len() <= shift {
        format!("{}{}", "0".repeat(shift + 1 - body.len()), body)
    } else {
        body
    };
    let (int_part, frac_part) = padded.split_at(padded.len() - shift);
    let frac = frac_part.trim_end_matches('0');
    out.push_str(int_part);
    out.push('.');
    out.push_str(if frac.is_empty() { "0" } else { frac });
    out
}

/// `num/den >= 10^exp`?
fn ge_power_of_ten(num: &BigUint, den: &BigUint, exp: i64) -> bool {
    let ten = BigUint::from(10u32);
    if exp >= 0 {
        *num >= den * Pow::pow(&ten, exp as u32)
    } else {
        num * Pow::pow(&ten, (-exp) as u32) >= *den
    }
}

/// round_half_even(num/den * 10^shift)
fn round_half_even_scaled(num: &BigUint, den: &BigUint, shift: i64) -> BigUint {
    let ten = BigUint::from(10u32);
    let (n, d) = if shift >= 0 {
        (num * Pow::pow(&ten, shift as u32), den.clone())
    } else {
        (num.clone(), den * Pow::pow(&ten, (-shift) as u32))
    };
    let (q, rem) = n.div_rem(&d);
    let twice = rem << 1;
    if twice > d || (twice == d && q.is_odd()) {
        q + BigUint::one()
    } else {
        q
    }
}
