//! Exact rational helpers.

use alloc::format;
use alloc::string::String;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Serializes as `num/den`, always with an explicit denominator.
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.25`.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let frac: BigInt = frac.parse().ok()?;
        let frac = Rational::new(frac, scale);
        let whole = Rational::from_integer(whole.abs());
        let v = whole + frac;
        return Some(if negative { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Returns `Some(r)` when `q` is the square of a rational `r >= 0`.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Smallest multiple of `1/den` that is `>= x`.
pub fn ceil_to_denominator(x: f64, den: u64) -> Rational {
    let scaled = libm::ceil(x * den as f64);
    let num = BigInt::from(scaled as i128);
    Rational::new(num, BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/4"), Some(ratio(3, 4)));
        assert_eq!(parse("2"), Some(int(2)));
        assert_eq!(parse("0.32"), Some(ratio(8, 25)));
        assert_eq!(parse("-0.5"), Some(ratio(-1, 2)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("x"), None);
    }

    #[test]
    fn format_keeps_denominator() {
        assert_eq!(format(&int(1)), "1/1");
        assert_eq!(format(&ratio(2, 4)), "1/2");
    }

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(exact_sqrt(&ratio(1, 10000)), Some(ratio(1, 100)));
        assert_eq!(exact_sqrt(&ratio(1, 2)), None);
    }
}
