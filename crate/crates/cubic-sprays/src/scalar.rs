//! The two scalar backends behind one field interface.
//!
//! `Rat` models the rational subfield exactly (lowest terms, positive
//! denominator — maintained by `num_rational`); `Cx` models the
//! algebraically closed field numerically with finite complex doubles.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::Value;
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use crate::solve::RootList;
use crate::{Error, Result};

pub type Rat = BigRational;
pub type Cx = Complex64;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True for backends where zero tests are exact.
    const EXACT: bool;

    fn backend_name() -> &'static str;
    fn from_i64(v: i64) -> Self;

    /// Magnitude estimate used for pivoting and tolerance scales.
    fn mag(&self) -> f64;

    /// Backend zero decision: exact test for `Rat`, `|z| <= tol` for `Cx`.
    /// Callers pass `tol` already multiplied by the relevant scale.
    fn nearly_zero(&self, tol: f64) -> bool;

    fn is_finite(&self) -> bool;
    fn to_complex(&self) -> Cx;

    fn from_json(v: &Value) -> Result<Self>;
    fn to_json(&self) -> Value;

    /// Index of the coordinate a canonical representative is scaled by:
    /// first nonzero (exact) or largest modulus (complex).
    fn canonical_pivot(coords: &[Self]) -> Option<usize>;

    /// Projective roots of `c[0] + c[1] t + ... + c[d] t^d`, multiplicity
    /// clustered at `cluster_radius` on the numeric backend.
    fn univariate_roots(coeffs: &[Self], cluster_radius: f64) -> Result<RootList<Self>>;

    /// Small random scalar for generic parameter values (nonzero).
    fn sample_unit<R: Rng>(rng: &mut R) -> Self;

    /// Random integer-entry scalar in `[-bound, bound]` (Gaussian integers
    /// on the complex backend).
    fn sample_int<R: Rng>(rng: &mut R, bound: i64) -> Self;

    /// Interpolation nodes for degree `k - 1` reconstruction: small integers
    /// (exact) or roots of unity (complex).
    fn interpolation_nodes(k: usize) -> Vec<Self>;
}

/// Parse "p/q", a decimal string like "-1.25", or a plain integer string.
pub fn parse_rational_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse rational from {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let frac_digits = frac_part.trim();
        if !frac_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.trim_start().starts_with('-');
        let int = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac_digits.len() as u32);
        let frac = if frac_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(frac_digits).map_err(|_| bad())?
        };
        let signed_frac = if negative { -frac } else { frac };
        return Ok(Rat::new(int * &scale + signed_frac, scale));
    }
    let n = BigInt::from_str(s).map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn backend_name() -> &'static str {
        "rational"
    }

    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn mag(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::MAX)
    }

    fn nearly_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn to_complex(&self) -> Cx {
        Cx::new(self.to_f64().unwrap_or(f64::MAX), 0.0)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational_str(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rat::from_integer(BigInt::from(i)))
                } else if let Some(u) = n.as_u64() {
                    Ok(Rat::from_integer(BigInt::from(u)))
                } else {
                    Err(Error::Parse(format!(
                        "non-integer number {n} not accepted for the rational backend; \
                         pass a \"p/q\" or decimal string"
                    )))
                }
            }
            other => Err(Error::Parse(format!("cannot parse rational from {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn canonical_pivot(coords: &[Self]) -> Option<usize> {
        coords.iter().position(|c| !c.is_zero())
    }

    fn univariate_roots(coeffs: &[Self], _cluster_radius: f64) -> Result<RootList<Self>> {
        crate::solve::rational_poly_roots(coeffs)
    }

    fn sample_unit<R: Rng>(rng: &mut R) -> Self {
        let num = loop {
            let n: i64 = rng.gen_range(-9..=9);
            if n != 0 {
                break n;
            }
        };
        let den: i64 = rng.gen_range(1..=7);
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    fn sample_int<R: Rng>(rng: &mut R, bound: i64) -> Self {
        Self::from_i64(rng.gen_range(-bound..=bound))
    }

    fn interpolation_nodes(k: usize) -> Vec<Self> {
        // 0, 1, -1, 2, -2, ...
        (0..k)
            .map(|i| {
                let m = (i as i64 + 1) / 2;
                Self::from_i64(if i % 2 == 1 { m } else { -m })
            })
            .collect()
    }
}

impl Scalar for Cx {
    const EXACT: bool = false;

    fn backend_name() -> &'static str {
        "complex"
    }

    fn from_i64(v: i64) -> Self {
        Cx::new(v as f64, 0.0)
    }

    fn mag(&self) -> f64 {
        self.norm()
    }

    fn nearly_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn to_complex(&self) -> Cx {
        *self
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                let re = json_real(&parts[0])?;
                let im = json_real(&parts[1])?;
                Ok(Cx::new(re, im))
            }
            Value::Number(n) => {
                let re = n
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("bad number {n}")))?;
                Ok(Cx::new(re, 0.0))
            }
            Value::String(s) => Ok(Cx::new(
                parse_rational_str(s)?.to_f64().ok_or(Error::NonFinite)?,
                0.0,
            )),
            other => Err(Error::Parse(format!("cannot parse complex from {other}"))),
        }
    }

    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn canonical_pivot(coords: &[Self]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in coords.iter().enumerate() {
            let n = c.norm();
            if n > 0.0 && best.map_or(true, |(_, b)| n > b) {
                best = Some((i, n));
            }
        }
        best.map(|(i, _)| i)
    }

    fn univariate_roots(coeffs: &[Self], cluster_radius: f64) -> Result<RootList<Self>> {
        crate::solve::complex_poly_roots(coeffs, cluster_radius)
    }

    fn sample_unit<R: Rng>(rng: &mut R) -> Self {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let rho: f64 = rng.gen_range(0.6..1.4);
        Cx::from_polar(rho, theta)
    }

    fn sample_int<R: Rng>(rng: &mut R, bound: i64) -> Self {
        Cx::new(
            rng.gen_range(-bound..=bound) as f64,
            rng.gen_range(-bound..=bound) as f64,
        )
    }

    fn interpolation_nodes(k: usize) -> Vec<Self> {
        (0..k)
            .map(|j| Cx::from_polar(1.0, std::f64::consts::TAU * j as f64 / k as f64))
            .collect()
    }
}

fn json_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) => parse_rational_str(s)?.to_f64().ok_or(Error::NonFinite),
        other => Err(Error::Parse(format!("expected a real number, got {other}"))),
    }
}

/// Exact square root of a rational, if it is a perfect square.
pub fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    if Zero::is_zero(r) {
        return Some(Rat::zero());
    }
    let num = r.numer();
    let den = r.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Scale a rational vector to integers (clear denominators, divide by content).
pub fn clear_denominators(row: &[Rat]) -> Vec<BigInt> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for r in row {
        lcm = lcm.lcm(r.denom());
    }
    let ints: Vec<BigInt> = row.iter().map(|r| r.numer() * (&lcm / r.denom())).collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
    }
    if gcd.is_zero() || gcd.is_one() {
        ints
    } else {
        ints.iter().map(|v| v / &gcd).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing_forms() {
        assert_eq!(parse_rational_str("3/6").unwrap(), Rat::new(1.into(), 2.into()));
        assert_eq!(parse_rational_str("-1.25").unwrap(), Rat::new((-5).into(), 4.into()));
        assert_eq!(parse_rational_str("7").unwrap(), Rat::from_integer(7.into()));
        assert!(parse_rational_str("1/0").is_err());
        assert!(parse_rational_str("x").is_err());
    }

    #[test]
    fn rational_sqrt_perfect_squares() {
        assert_eq!(
            rational_sqrt(&Rat::new(9.into(), 4.into())),
            Some(Rat::new(3.into(), 2.into()))
        );
        assert_eq!(rational_sqrt(&Rat::new(2.into(), 1.into())), None);
        assert_eq!(rational_sqrt(&Rat::from_integer((-4).into())), None);
    }

    #[test]
    fn canonical_pivot_rules() {
        let r = vec![Rat::zero(), Rat::from_i64(3), Rat::one()];
        assert_eq!(<Rat as Scalar>::canonical_pivot(&r), Some(1));
        let c = vec![Cx::new(0.5, 0.0), Cx::new(0.0, -2.0), Cx::new(1.0, 0.0)];
        assert_eq!(<Cx as Scalar>::canonical_pivot(&c), Some(1));
    }

    #[test]
    fn json_round_trip() {
        let r = Rat::new(22.into(), 7.into());
        assert_eq!(Rat::from_json(&r.to_json()).unwrap(), r);
        let z = Cx::new(1.5, -0.25);
        let back = Cx::from_json(&z.to_json()).unwrap();
        assert_eq!(back, z);
    }
}
