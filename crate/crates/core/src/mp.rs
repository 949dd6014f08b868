//! Working precision and small helpers around MPFR floats.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Extra decimal digits carried internally on top of the requested precision.
pub const GUARD_DIGITS: u32 = 20;

/// Residual guard `g` in the root and differential checks: `10^(-digits + g)`.
pub const RESIDUAL_GUARD: i64 = 10;

/// Working precision expressed in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { digits: 50 }
    }
}

impl Precision {
    pub fn new(digits: u32) -> Self {
        assert!(digits >= 1, "precision must be at least one digit");
        Precision { digits }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Binary precision of every float created at this working precision.
    pub fn bits(self) -> u32 {
        ((self.digits + GUARD_DIGITS) as f64 * std::f64::consts::LOG2_10).ceil() as u32
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits())
    }

    pub fn one(self) -> Float {
        Float::with_val(self.bits(), 1)
    }

    pub fn int(self, v: i64) -> Float {
        Float::with_val(self.bits(), v)
    }

    pub fn rational(self, q: &Rational) -> Float {
        Float::with_val(self.bits(), q)
    }

    pub fn integer(self, z: &Integer) -> Float {
        Float::with_val(self.bits(), z)
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }

    pub fn two_pi(self) -> Float {
        self.pi() * 2u32
    }

    pub fn czero(self) -> Complex {
        Complex::new(self.bits())
    }

    pub fn complex(self, re: &Float, im: &Float) -> Complex {
        Complex::with_val(self.bits(), (re, im))
    }

    pub fn creal(self, re: &Float) -> Complex {
        Complex::with_val(self.bits(), re)
    }

    /// `10^e` at working precision.
    pub fn pow10(self, e: i64) -> Float {
        let ten = Float::with_val(self.bits(), 10);
        ten.pow(e as i32)
    }

    /// `10^(-digits + g)`: residual bound for roots and exact-zero checks.
    pub fn residual_tol(self) -> Float {
        self.pow10(-(self.digits as i64) + RESIDUAL_GUARD)
    }

    /// `10^(-digits/2)`: real/complex split, numerical rank, float-vs-exact agreement.
    pub fn half_tol(self) -> Float {
        self.pow10(-(self.digits as i64) / 2)
    }

    /// `10^(-digits/3)`: lattice membership.
    pub fn lattice_tol(self) -> Float {
        self.pow10(-(self.digits as i64) / 3)
    }
}

/// Parse an exact rational from `"p/q"`, an integer, or a finite decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse(format!("empty rational '{s}'")));
    }
    if t.contains('/') {
        return Rational::parse(t)
            .map(Rational::from)
            .map_err(|e| Error::Parse(format!("rational '{s}': {e}")));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let neg = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let num = Integer::parse(if digits.is_empty() { "0" } else { &digits })
            .map(Integer::from)
            .map_err(|e| Error::Parse(format!("decimal '{s}': {e}")))?;
        let den = Integer::from(10).pow(frac_part.len() as u32);
        let q = Rational::from((num, den));
        return Ok(if neg { -q } else { q });
    }
    Integer::parse(t)
        .map(|z| Rational::from(Integer::from(z)))
        .map_err(|e| Error::Parse(format!("integer '{s}': {e}")))
}

/// Parse a real at working precision: rationals are converted exactly, anything else goes
/// through MPFR's decimal parser.
pub fn parse_float(s: &str, prec: Precision) -> Result<Float> {
    let t = s.trim();
    if t.contains('/') {
        return Ok(prec.rational(&parse_rational(t)?));
    }
    Float::parse(t)
        .map(|p| Float::with_val(prec.bits(), p))
        .map_err(|e| Error::Parse(format!("real '{s}': {e}")))
}

/// Decimal rendering with `digits` significant digits. Positional notation for moderate
/// exponents, `d.ddd e±x` otherwise.
pub fn fmt_float(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, mant, exp) = x.to_sign_string_exp(10, Some(digits.max(1) as usize));
    let exp = exp.unwrap_or(0);
    let mant = mant.trim_end_matches('0');
    let mant = if mant.is_empty() { "0" } else { mant };
    let sign = if neg { "-" } else { "" };
    // value = 0.MANT * 10^exp
    if (-6..=30).contains(&exp) {
        let body = if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), mant)
        } else if (exp as usize) >= mant.len() {
            format!("{}{}", mant, "0".repeat(exp as usize - mant.len()))
        } else {
            format!("{}.{}", &mant[..exp as usize], &mant[exp as usize..])
        };
        format!("{sign}{body}")
    } else {
        let (head, tail) = mant.split_at(1);
        let tail = if tail.is_empty() { "0" } else { tail };
        format!("{sign}{head}.{tail}e{}", exp - 1)
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// Round to nearest integer (ties away from zero) as an exact `Integer`.
pub fn round_to_integer(x: &Float) -> Integer {
    x.clone()
        .round()
        .to_integer()
        .expect("rounding a finite float")
}

/// `|a - b| <= tol`.
pub fn close(a: &Float, b: &Float, tol: &Float) -> bool {
    let d = Float::with_val(a.prec().max(b.prec()), a - b);
    d.abs() <= *tol
}

/// `|a - b|` for complex values.
pub fn cdist(a: &Complex, b: &Complex) -> Float {
    let d = Complex::with_val(a.prec().0.max(b.prec().0), a - b);
    Float::with_val(d.prec().0, d.abs_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("5/1").unwrap(), Rational::from(5));
        assert_eq!(parse_rational("-3/6").unwrap(), Rational::from((-1, 2)));
        assert_eq!(parse_rational("-1.25").unwrap(), Rational::from((-5, 4)));
        assert_eq!(parse_rational("7").unwrap(), Rational::from(7));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_positional_and_scientific() {
        let p = Precision::new(30);
        assert_eq!(fmt_float(&p.int(24), 10), "24");
        assert_eq!(fmt_float(&(p.one() / 4u32), 10), "0.25");
        assert_eq!(fmt_float(&(-p.one() / 8u32), 10), "-0.125");
        let tiny = p.pow10(-40);
        assert_eq!(fmt_float(&tiny, 5), "1.0e-40");
        let pi = fmt_float(&p.pi(), 12);
        assert_eq!(pi, "3.14159265359");
    }

    #[test]
    fn tolerances_scale_with_digits() {
        let p = Precision::new(50);
        assert!(p.residual_tol() > p.pow10(-41));
        assert!(p.residual_tol() < p.pow10(-39));
        assert!(p.lattice_tol() > p.half_tol());
        assert!(p.bits() >= 230);
    }
}
