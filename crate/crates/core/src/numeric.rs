//! Number types shared by the exact and high-precision code paths.
//!
//! [`GaussianRational`] carries exact coefficients; [`BigComplex`] is a pair of
//! MPFR floats used whenever an input is not rational or a transcendental
//! function has to be applied. [`Coefficient`] is the small field interface the
//! series recursions are written against.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Complex number with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(Rational::new(), Rational::from(1))
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(Rational::from(n), Rational::new())
    }

    pub fn real(re: Rational) -> Self {
        Self::new(re, Rational::new())
    }

    pub fn imag(im: Rational) -> Self {
        Self::new(Rational::new(), im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `|z|²`, exact.
    pub fn norm_sqr(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Rational::from(-&self.im))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(Rational::from(&self.re + &rhs.re), Rational::from(&self.im + &rhs.im))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(Rational::from(&self.re - &rhs.re), Rational::from(&self.im - &rhs.im))
    }

    pub fn neg(&self) -> Self {
        Self::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        // purely real / purely imaginary operands are the common case in the
        // Burgers rows, so skip the zero products
        let mut re = Rational::new();
        let mut im = Rational::new();
        if !self.re.is_zero() {
            if !rhs.re.is_zero() {
                re += Rational::from(&self.re * &rhs.re);
            }
            if !rhs.im.is_zero() {
                im += Rational::from(&self.re * &rhs.im);
            }
        }
        if !self.im.is_zero() {
            if !rhs.im.is_zero() {
                re -= Rational::from(&self.im * &rhs.im);
            }
            if !rhs.re.is_zero() {
                im += Rational::from(&self.im * &rhs.re);
            }
        }
        Self::new(re, im)
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        Self::new(Rational::from(&self.re * r), Rational::from(&self.im * r))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let n = rhs.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero("gaussian rational"));
        }
        let p = self.mul(&rhs.conj());
        Ok(Self::new(p.re / &n, p.im / n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `i^n` for any integer `n`.
    pub fn i_pow(n: i64) -> Self {
        match n.rem_euclid(4) {
            0 => Self::from_int(1),
            1 => Self::i(),
            2 => Self::from_int(-1),
            _ => Self::imag(Rational::from(-1)),
        }
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        BigComplex::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, Rational::from(-&self.im))
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Complex number with MPFR parts at a fixed working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::new(prec))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Self::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Self::from_f64(prec, z.re, z.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        Self::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        Self::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(
            Float::with_val(self.re.prec(), -&self.re),
            Float::with_val(self.im.prec(), -&self.im),
        )
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.prec().max(rhs.prec());
        let rr = Float::with_val(p, &self.re * &rhs.re);
        let ii = Float::with_val(p, &self.im * &rhs.im);
        let ri = Float::with_val(p, &self.re * &rhs.im);
        let ir = Float::with_val(p, &self.im * &rhs.re);
        Self::new(rr - ii, ri + ir)
    }

    pub fn mul_real(&self, r: &Float) -> Self {
        let p = self.prec();
        Self::new(Float::with_val(p, &self.re * r), Float::with_val(p, &self.im * r))
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        Self::new(Float::with_val(self.im.prec(), -&self.im), self.re.clone())
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let n = rhs.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero("big complex"));
        }
        let num = self.mul(&rhs.conj());
        Ok(Self::new(num.re / &n, num.im / &n))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    /// Argument in `(-π, π]`.
    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    /// `e^{re + i·im}` at the precision of the parts.
    pub fn exp_of(re: &Float, im: &Float) -> Self {
        let p = re.prec().max(im.prec());
        let mag = Float::with_val(p, re.exp_ref());
        if im.is_zero() {
            return Self::new(mag, Float::new(p));
        }
        let (s, c) = Float::with_val(p, im).sin_cos(Float::new(p));
        Self::new(Float::with_val(p, &mag * &c), Float::with_val(p, &mag * &s))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Round to a new precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}

/// Field interface used by the exponomial recursions.
///
/// Values carry their own context (precision for floats), so constructors
/// take `&self` as a template.
pub trait Coefficient: Clone + Send + Sync + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn div_ref(&self, rhs: &Self) -> Result<Self>;
    fn scale_int(&self, n: i64) -> Self;
    fn mul_i(&self) -> Self;
    fn to_big(&self, prec: u32) -> BigComplex;
    fn as_gaussian(&self) -> Option<GaussianRational>;
    /// `g` in the same context as `self`.
    fn lift(&self, g: &GaussianRational) -> Self;
    /// Mantissa bits, `None` when exact.
    fn precision(&self) -> Option<u32>;
    /// True when the value was computed without rounding.
    fn is_exact() -> bool;
}

impl Coefficient for GaussianRational {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn div_ref(&self, rhs: &Self) -> Result<Self> {
        self.div(rhs)
    }
    fn scale_int(&self, n: i64) -> Self {
        self.mul_rational(&Rational::from(n))
    }
    fn mul_i(&self) -> Self {
        Self::new(Rational::from(-&self.im), self.re.clone())
    }
    fn to_big(&self, prec: u32) -> BigComplex {
        GaussianRational::to_big(self, prec)
    }
    fn as_gaussian(&self) -> Option<GaussianRational> {
        Some(self.clone())
    }
    fn lift(&self, g: &GaussianRational) -> Self {
        g.clone()
    }
    fn precision(&self) -> Option<u32> {
        None
    }
    fn is_exact() -> bool {
        true
    }
}

impl Coefficient for BigComplex {
    fn zero_like(&self) -> Self {
        Self::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        Self::from_f64(self.prec(), 1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        BigComplex::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self.sub(rhs)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn div_ref(&self, rhs: &Self) -> Result<Self> {
        self.div(rhs)
    }
    fn scale_int(&self, n: i64) -> Self {
        let p = self.prec();
        Self::new(Float::with_val(p, &self.re * n), Float::with_val(p, &self.im * n))
    }
    fn mul_i(&self) -> Self {
        BigComplex::mul_i(self)
    }
    fn to_big(&self, prec: u32) -> BigComplex {
        self.with_prec(prec)
    }
    fn as_gaussian(&self) -> Option<GaussianRational> {
        None
    }
    fn lift(&self, g: &GaussianRational) -> Self {
        g.to_big(self.prec())
    }
    fn precision(&self) -> Option<u32> {
        Some(self.prec())
    }
    fn is_exact() -> bool {
        false
    }
}

/// A real model parameter: exact rational or a binary64 value.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(Rational),
    Approx(f64),
}

impl Real {
    pub fn int(n: i64) -> Self {
        Real::Exact(Rational::from(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Real::Exact(Rational::from((num, den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => rational_to_f64(r),
            Real::Approx(x) => *x,
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Real::Exact(r) => Float::with_val(prec, r),
            Real::Approx(x) => Float::with_val(prec, *x),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_negative(),
            Real::Approx(x) => *x < 0.0,
        }
    }

    /// Exact value as a rational; binary64 inputs convert without rounding.
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Real::Exact(r) => Ok(r.clone()),
            Real::Approx(x) => Rational::from_f64(*x).ok_or_else(|| Error::invalid(format!("non-finite value {x}"))),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) => write!(f, "{r}"),
            Real::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl From<i64> for Real {
    fn from(n: i64) -> Self {
        Real::int(n)
    }
}

impl FromStr for Real {
    type Err = Error;

    /// `"3"`, `"3/2"` and `"0.25"` parse exactly; anything with an exponent
    /// or the `f:` prefix is taken as binary64.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("f:") {
            return rest
                .parse::<f64>()
                .map(Real::Approx)
                .map_err(|e| Error::Parse(format!("{s}: {e}")));
        }
        parse_exact_decimal(s)
            .map(Real::Exact)
            .or_else(|| s.parse::<f64>().ok().map(Real::Approx))
            .ok_or_else(|| Error::Parse(format!("not a number: {s:?}")))
    }
}

/// Nearest binary64 (rug's own conversion truncates toward zero).
pub fn rational_to_f64(r: &Rational) -> f64 {
    Float::with_val(53, r).to_f64()
}

/// Parse `p/q`, an integer, or a plain decimal like `-0.125` exactly.
pub fn parse_exact_decimal(s: &str) -> Option<Rational> {
    if s.contains('/') {
        return s.parse::<Rational>().ok();
    }
    if s.contains(['e', 'E']) || s.is_empty() {
        return None;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let den = Integer::from(10).pow(frac_part.len() as u32);
    let r = Rational::from((num, den));
    Some(if neg { -r } else { r })
}

/// Complex initial amplitude, exact or binary64.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexInput {
    Exact(GaussianRational),
    Approx(Complex64),
}

impl ComplexInput {
    pub fn real(r: Real) -> Self {
        match r {
            Real::Exact(q) => ComplexInput::Exact(GaussianRational::real(q)),
            Real::Approx(x) => ComplexInput::Approx(Complex64::new(x, 0.0)),
        }
    }

    pub fn from_parts(re: Real, im: Real) -> Self {
        match (re, im) {
            (Real::Exact(a), Real::Exact(b)) => ComplexInput::Exact(GaussianRational::new(a, b)),
            (a, b) => ComplexInput::Approx(Complex64::new(a.to_f64(), b.to_f64())),
        }
    }

    pub fn zero() -> Self {
        ComplexInput::Exact(GaussianRational::zero())
    }

    pub fn as_exact(&self) -> Option<&GaussianRational> {
        match self {
            ComplexInput::Exact(g) => Some(g),
            ComplexInput::Approx(_) => None,
        }
    }

    pub fn to_big(&self, prec: u32) -> BigComplex {
        match self {
            ComplexInput::Exact(g) => g.to_big(prec),
            ComplexInput::Approx(z) => BigComplex::from_c64(prec, *z),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            ComplexInput::Exact(g) => g.to_c64(),
            ComplexInput::Approx(z) => *z,
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

/// Numerator and denominator as decimal strings.
pub fn rational_parts(r: &Rational) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}
