//! Scalar abstraction shared by the density and matrix code.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`],
//! so the same routine runs exactly over [`Rational`] or approximately over
//! `f64`/`f32`.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Field-like number type usable by the generic algorithms in this crate.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r) as f32
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Converts via a 20-digit scaled quotient so huge numerators and
/// denominators do not overflow `f64` individually.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let (mantissa, exp) = decimal_digits(r, 20);
    let m: f64 = mantissa.to_f64().unwrap_or(f64::NAN);
    m * 10f64.powi(exp)
}

/// Parses `p/q`, an integer, or a plain decimal such as `-0.4446` or `1e-3`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (body, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match body.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

/// `p/q` rendering, or plain `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Always `p/q`, even for integers. Used by the file formats.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounds `|r|` to `sig` significant digits (half away from zero) and returns
/// `(m, e)` with `r ≈ m · 10^e` and `m` carrying the sign.
fn decimal_digits(r: &Rational, sig: usize) -> (BigInt, i32) {
    if r.is_zero() {
        return (BigInt::zero(), 0);
    }
    let ten = BigInt::from(10u32);
    let a = r.abs();
    // estimate the decimal exponent of the leading digit
    let mut e = a.numer().to_string().len() as i32 - a.denom().to_string().len() as i32;
    let pow10 = |k: i32| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a >= pow10(e) {
        e += 1;
    }
    while a < pow10(e - 1) {
        e -= 1;
    }
    // now 10^(e-1) <= a < 10^e
    let shift = sig as i32 - e;
    let scaled = &a * pow10(shift);
    let mut m = round_half_away(&scaled);
    let mut exp = -shift;
    if m.to_string().len() > sig {
        let (q, _) = m.div_rem(&ten);
        m = q;
        exp += 1;
    }
    if r.is_negative() {
        m = -m;
    }
    (m, exp)
}

/// Round half away from zero.
pub fn round_half_away(r: &Rational) -> BigInt {
    let two = BigInt::from(2u32);
    let n = r.numer() * &two + if r.is_negative() { -r.denom() } else { r.denom().clone() };
    let d = r.denom() * &two;
    // truncating division toward zero
    let (q, _) = n.div_rem(&d);
    q
}

/// Decimal scientific rendering `d.ddd…e±x` with exactly `sig` significant
/// digits, computed exactly from the rational.
pub fn format_sig(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return format!("0.{}e+00", "0".repeat(sig - 1));
    }
    let (m, exp) = decimal_digits(r, sig);
    let sign = if m.sign() == Sign::Minus { "-" } else { "" };
    let digits = m.abs().to_string();
    let lead_exp = exp + digits.len() as i32 - 1;
    let (head, tail) = digits.split_at(1);
    let mut out = format!("{sign}{head}");
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    let es = if lead_exp < 0 { '-' } else { '+' };
    out.push_str(&format!("e{es}{:02}", lead_exp.abs()));
    out
}

/// Fixed-point rendering with `places` digits after the point.
pub fn format_fixed<T: Scalar>(x: &T, places: usize) -> String {
    format!("{:.places$}", x.to_f64_lossy())
}

/// Smallest rational with denominator at most `max_den` that is `>= x`.
pub fn ceil_with_bounded_denominator(x: &Rational, max_den: u64) -> Rational {
    assert!(max_den >= 1);
    let mut best: Option<Rational> = None;
    for q in 1..=max_den {
        let qb = BigInt::from(q);
        let p = (x * Rational::from_integer(qb.clone())).ceil().to_integer();
        let cand = Rational::new(p, qb);
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    best.expect("max_den >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("6/10000").unwrap(), rat(3, 5000));
        assert_eq!(parse_rational("0.4446").unwrap(), rat(4446, 10000));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("2").unwrap(), int(2));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(&rat(1, 3), 17), "3.3333333333333333e-01");
        assert_eq!(format_sig(&rat(2, 3), 5), "6.6667e-01");
        assert_eq!(format_sig(&rat(-1, 1), 3), "-1.00e+00");
        assert_eq!(format_sig(&rat(9999, 10000), 2), "1.0e+00");
        assert_eq!(format_sig(&rat(123456, 1), 3), "1.23e+05");
        assert_eq!(format_sig(&Rational::zero(), 3), "0.00e+00");
        let back = parse_rational(&format_sig(&rat(1, 7), 17)).unwrap();
        assert!((back - rat(1, 7)).abs() < rat(1, 10i64.pow(17)));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_away(&rat(5, 2)), BigInt::from(3));
        assert_eq!(round_half_away(&rat(-5, 2)), BigInt::from(-3));
        assert_eq!(round_half_away(&rat(7, 3)), BigInt::from(2));
        assert_eq!(round_half_away(&rat(-7, 3)), BigInt::from(-2));
    }

    #[test]
    fn bounded_ceiling() {
        assert_eq!(ceil_with_bounded_denominator(&rat(1, 3), 10), rat(1, 3));
        assert_eq!(ceil_with_bounded_denominator(&rat(3, 10), 4), rat(1, 3));
        let x = rat(44455, 100000);
        let c = ceil_with_bounded_denominator(&x, 10_000);
        assert!(c >= x && c <= rat(4446, 10000));
    }

    #[test]
    fn f64_conversion() {
        assert_eq!(rational_to_f64(&rat(3, 4)), 0.75);
        let huge = Rational::new(
            num_traits::pow(BigInt::from(10), 400),
            num_traits::pow(BigInt::from(10), 401),
        );
        assert!((rational_to_f64(&huge) - 0.1).abs() < 1e-15);
    }
}
