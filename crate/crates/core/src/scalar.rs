//! Scalar backends.
//!
//! Every construction in this crate is generic over a [`Scalar`]: a complex
//! field with enough structure for elimination, series manipulation, and
//! (where the backend admits it) exponentials.  Two backends are provided:
//!
//! * [`C64`] — complex double precision.  `exp` always succeeds; equality
//!   checks are tolerance-based at the call sites.
//! * [`CQ`] — complex numbers with arbitrary-precision rational real and
//!   imaginary parts.  Arithmetic is exact and identity checks can demand
//!   residuals that are literally zero.  `exp` succeeds only at zero (the
//!   flows of a nilpotent Jordan spec stay polynomial, which is exactly the
//!   case the exact backend exists for); anything else reports
//!   [`Error::BackendUnsupported`].
//!
//! Purely rational data is the `im = 0` slice of [`CQ`]; no separate
//! real-rational type is needed.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Complex double-precision backend.
pub type C64 = Complex<f64>;

/// Exact complex-rational backend.
pub type CQ = Complex<BigRational>;

/// Relative tolerance policy for floating-point identity checks.
///
/// Residuals are normalized by the natural scale of the identity being
/// tested (largest entry magnitude of the matrices involved), so one
/// relative tolerance serves matrices of any magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance { rel }
    }

    /// Does `residual` pass at the given scale?  `scale` is clamped from
    /// below by 1 so that identities among small matrices are not judged
    /// against an artificially tiny yardstick.
    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.rel * scale.max(1.0)
    }
}

/// The scalar field interface used throughout the crate.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + 'static
{
    /// True when arithmetic is exact and zero tests are decidable.
    const EXACT: bool;

    /// Short backend tag used in reports ("float" / "exact").
    fn backend_name() -> &'static str;

    fn from_i64(v: i64) -> Self;

    /// num/den with `den != 0`; exact on both backends.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Complex literal from floating parts.  On the exact backend the f64
    /// values are converted to their exact binary-rational values, so the
    /// conversion is deterministic and lossless.  Panics on non-finite
    /// input (call sites validate).
    fn from_re_im(re: f64, im: f64) -> Self;

    /// Complex conjugate.
    fn conj(&self) -> Self;

    /// Modulus as f64.  On the exact backend this is an approximation used
    /// only for reporting and never for control flow.
    fn modulus(&self) -> f64;

    /// Lossy conversion for reports and CSV output.
    fn to_c64(&self) -> C64;

    /// e^self.  The exact backend supports only `self == 0`.
    fn exp(&self) -> Result<Self>;
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn backend_name() -> &'static str {
        "float"
    }

    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex::new(num as f64 / den as f64, 0.0)
    }

    fn from_re_im(re: f64, im: f64) -> Self {
        assert!(re.is_finite() && im.is_finite(), "non-finite scalar literal");
        Complex::new(re, im)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> C64 {
        *self
    }

    fn exp(&self) -> Result<Self> {
        Ok(Complex::exp(*self))
    }
}

fn big_ratio(num: i64, den: i64) -> BigRational {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar for CQ {
    const EXACT: bool = true;

    fn backend_name() -> &'static str {
        "exact"
    }

    fn from_i64(v: i64) -> Self {
        Complex::new(BigRational::from(BigInt::from(v)), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(big_ratio(num, den), BigRational::zero())
    }

    fn from_re_im(re: f64, im: f64) -> Self {
        let re = BigRational::from_float(re).expect("non-finite scalar literal");
        let im = BigRational::from_float(im).expect("non-finite scalar literal");
        Complex::new(re, im)
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn modulus(&self) -> f64 {
        let re = self.re.to_f64().unwrap_or(f64::MAX);
        let im = self.im.to_f64().unwrap_or(f64::MAX);
        re.hypot(im)
    }

    fn to_c64(&self) -> C64 {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn exp(&self) -> Result<Self> {
        if self.is_zero() {
            Ok(Self::one())
        } else {
            Err(Error::BackendUnsupported(
                "exponential of a nonzero scalar is transcendental; \
                 use the float backend or a nilpotent spec"
                    .into(),
            ))
        }
    }
}

/// Integer power of a scalar (non-negative exponent).
pub fn powi<S: Scalar>(base: &S, exp: usize) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        e >>= 1;
    }
    acc
}

/// Binomial coefficient C(n, k) as a scalar (exact on both backends).
pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = S::one();
    for j in 1..=k {
        acc = acc * S::from_i64((n - k + j) as i64) / S::from_i64(j as i64);
    }
    acc
}
