//! Complex scalars at double or arbitrary binary precision.
//!
//! The chart, solver and volume code is generic over [`ComplexScalar`] so the
//! same Newton iteration produces double-precision answers for scans and
//! 50+ digit answers for integer-relation inputs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Complex, Float};

use crate::Error;

/// Binary working precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision(pub u32);

impl Precision {
    pub const DOUBLE: Precision = Precision(53);

    /// Bits needed for `digits` decimal digits plus 64 guard bits.
    pub fn from_digits(digits: u32) -> Self {
        Precision((digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 64)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

pub trait ComplexScalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c64(z: Complex64, prec: Precision) -> Self;
    fn from_i64(n: i64, prec: Precision) -> Self;
    /// Parses decimal strings for the real and imaginary parts.
    fn parse(re: &str, im: &str, prec: Precision) -> Result<Self, Error>;
    fn pi(prec: Precision) -> Self;
    fn precision(&self) -> Precision;

    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn abs_f64(&self) -> f64;
    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re_f64(), self.im_f64())
    }

    fn zero(prec: Precision) -> Self {
        Self::from_i64(0, prec)
    }

    fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    fn i(prec: Precision) -> Self {
        Self::from_c64(Complex64::new(0.0, 1.0), prec)
    }

    fn two_pi_i(prec: Precision) -> Self {
        Self::pi(prec) * Self::from_c64(Complex64::new(0.0, 2.0), prec)
    }

    fn scale_i64(&self, k: i64) -> Self {
        self.clone() * Self::from_i64(k, self.precision())
    }

    fn is_exact_zero(&self) -> bool {
        self.re_f64() == 0.0 && self.im_f64() == 0.0
    }
}

impl ComplexScalar for Complex64 {
    fn from_c64(z: Complex64, _prec: Precision) -> Self {
        z
    }

    fn from_i64(n: i64, _prec: Precision) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn parse(re: &str, im: &str, _prec: Precision) -> Result<Self, Error> {
        let p = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("not a decimal number: {s:?}")))
        };
        Ok(Complex64::new(p(re)?, p(im)?))
    }

    fn pi(_prec: Precision) -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }

    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }

    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }

    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }

    fn abs_f64(&self) -> f64 {
        self.norm()
    }

    fn re_f64(&self) -> f64 {
        self.re
    }

    fn im_f64(&self) -> f64 {
        self.im
    }
}

/// Arbitrary-precision complex number backed by MPC.
#[derive(Clone, Debug, PartialEq)]
pub struct HpComplex(pub Complex);

impl HpComplex {
    pub fn inner(&self) -> &Complex {
        &self.0
    }

    pub fn real(&self) -> &Float {
        self.0.real()
    }

    pub fn imag(&self) -> &Float {
        self.0.imag()
    }

    pub fn from_floats(re: Float, im: Float) -> Self {
        HpComplex(Complex::with_val(re.prec().max(im.prec()), (re, im)))
    }

    pub fn abs_float(&self) -> Float {
        Float::with_val(self.0.prec().0, self.0.abs_ref())
    }

    pub fn with_precision(&self, prec: Precision) -> Self {
        HpComplex(Complex::with_val(prec.0, &self.0))
    }

    /// Decimal rendering of both parts with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (
            self.0.real().to_string_radix(10, Some(digits)),
            self.0.imag().to_string_radix(10, Some(digits)),
        )
    }
}

fn parse_float(s: &str, prec: Precision) -> Result<Float, Error> {
    let parsed = Float::parse(s.trim()).map_err(|_| Error::Parse(format!("not a decimal number: {s:?}")))?;
    Ok(Float::with_val(prec.0, parsed))
}

impl ComplexScalar for HpComplex {
    fn from_c64(z: Complex64, prec: Precision) -> Self {
        HpComplex(Complex::with_val(prec.0, (z.re, z.im)))
    }

    fn from_i64(n: i64, prec: Precision) -> Self {
        HpComplex(Complex::with_val(prec.0, (n, 0)))
    }

    fn parse(re: &str, im: &str, prec: Precision) -> Result<Self, Error> {
        Ok(HpComplex::from_floats(parse_float(re, prec)?, parse_float(im, prec)?))
    }

    fn pi(prec: Precision) -> Self {
        let pi = Float::with_val(prec.0, Constant::Pi);
        HpComplex(Complex::with_val(prec.0, (pi, 0)))
    }

    fn precision(&self) -> Precision {
        Precision(self.0.prec().0)
    }

    fn exp(&self) -> Self {
        HpComplex(self.0.clone().exp())
    }

    fn ln(&self) -> Self {
        HpComplex(self.0.clone().ln())
    }

    fn abs_f64(&self) -> f64 {
        self.abs_float().to_f64()
    }

    fn re_f64(&self) -> f64 {
        self.0.real().to_f64()
    }

    fn im_f64(&self) -> f64 {
        self.0.imag().to_f64()
    }

    fn is_exact_zero(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }
}

macro_rules! hp_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for HpComplex {
            type Output = HpComplex;
            fn $method(self, rhs: HpComplex) -> HpComplex {
                HpComplex($tr::$method(self.0, rhs.0))
            }
        }
    };
}

hp_binop!(Add, add);
hp_binop!(Sub, sub);
hp_binop!(Mul, mul);
hp_binop!(Div, div);

impl Neg for HpComplex {
    type Output = HpComplex;
    fn neg(self) -> HpComplex {
        HpComplex(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_to_bits() {
        assert_eq!(Precision::from_digits(50).bits(), 167 + 64);
    }

    #[test]
    fn hp_parse_is_exact_to_working_precision() {
        let p = Precision::from_digits(60);
        let x = HpComplex::parse("0.1", "-1.2", p).unwrap();
        let ten = HpComplex::from_i64(10, p);
        let y = x * ten;
        let diff = y - HpComplex::parse("1", "-12", p).unwrap();
        assert!(diff.abs_f64() < 1e-60);
    }

    #[test]
    fn exp_ln_roundtrip_high_precision() {
        let p = Precision::from_digits(50);
        let z = HpComplex::parse("0.3", "2.1", p).unwrap();
        let back = z.exp().ln();
        assert!((back - z).abs_f64() < 1e-55);
    }

    #[test]
    fn double_parse_rejects_garbage() {
        assert!(Complex64::parse("abc", "0", Precision::DOUBLE).is_err());
    }
}
