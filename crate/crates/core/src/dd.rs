//! Double-double arithmetic: a complex scalar whose real and imaginary
//! parts are unevaluated sums of two `f64`s, giving roughly 31 significant
//! digits.
//!
//! The float backend `C64` is fine for almost every check in this crate,
//! but a central finite-difference stencil for a fourth derivative divides
//! cancellation noise by `h⁴`.  At `h = 10⁻³` that amplifies f64 roundoff
//! (~10⁻¹⁶ relative) to ~10⁻⁴ — above the tolerance such a check should
//! certify.  [`CDD`] removes the floor: evaluation error drops to ~10⁻³⁰ so
//! only the genuine `O(h²)` discretization error remains.  Everything here
//! is branch-free error-free-transform arithmetic (Dekker/Knuth style,
//! `two_prod` via FMA).

use crate::error::Result;
use crate::scalar::{Scalar, C64};
use num::traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> DD {
    // Requires |a| ≥ |b| (or a == 0).
    let s = a + b;
    let e = b - (s - a);
    DD { hi: s, lo: e }
}

#[inline]
fn two_sum(a: f64, b: f64) -> DD {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    DD { hi: s, lo: e }
}

#[inline]
fn two_prod(a: f64, b: f64) -> DD {
    let p = a * b;
    let e = a.mul_add(b, -p);
    DD { hi: p, lo: e }
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(a: f64) -> DD {
        DD { hi: a, lo: 0.0 }
    }

    pub fn from_i64(v: i64) -> DD {
        let hi = v as f64;
        let rem = (v as i128 - hi as i128) as f64;
        quick_two_sum(hi, rem)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs_f64(self) -> f64 {
        self.to_f64().abs()
    }

    pub fn add(self, o: DD) -> DD {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(r.hi, r.lo + t.lo)
    }

    pub fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul(self, o: DD) -> DD {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    /// Long division: three correction steps reach full double-double
    /// precision.
    pub fn div(self, o: DD) -> DD {
        let q0 = self.hi / o.hi;
        let r0 = self.sub(o.mul_f64(q0));
        let q1 = r0.hi / o.hi;
        let r1 = r0.sub(o.mul_f64(q1));
        let q2 = r1.hi / o.hi;
        let s = quick_two_sum(q0, q1);
        s.add(DD::from_f64(q2))
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn ldexp(self, e: i32) -> DD {
        let f = (e as f64).exp2();
        DD {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

/// Complex double-double scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDD {
    pub re: DD,
    pub im: DD,
}

impl CDD {
    pub fn new(re: DD, im: DD) -> CDD {
        CDD { re, im }
    }

    fn norm_sqr(self) -> DD {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }

    /// `e^self` by scaling-and-squaring: Taylor on `self/2^k` with
    /// `|self/2^k| ≤ 1/32`, then `k` squarings.  Relative error stays below
    /// ~`2^k · 10⁻³²`.
    fn cexp(self) -> CDD {
        let mag = self.re.abs_f64().max(self.im.abs_f64());
        let k = if mag <= 1.0 / 32.0 {
            0
        } else {
            (mag * 32.0).log2().ceil() as i32
        };
        let w = CDD {
            re: self.re.ldexp(-k),
            im: self.im.ldexp(-k),
        };
        let mut sum = CDD::one();
        let mut term = CDD::one();
        for j in 1..=24i64 {
            term = term * w / CDD::from_i64(j);
            sum = sum + term;
        }
        let mut r = sum;
        for _ in 0..k {
            r = r * r;
        }
        r
    }
}

impl Add for CDD {
    type Output = CDD;
    fn add(self, o: CDD) -> CDD {
        CDD {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }
}

impl Sub for CDD {
    type Output = CDD;
    fn sub(self, o: CDD) -> CDD {
        CDD {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }
}

impl Mul for CDD {
    type Output = CDD;
    fn mul(self, o: CDD) -> CDD {
        CDD {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}

impl Div for CDD {
    type Output = CDD;
    fn div(self, o: CDD) -> CDD {
        let d = o.norm_sqr();
        let num = self * o.conj();
        CDD {
            re: num.re.div(d),
            im: num.im.div(d),
        }
    }
}

impl Neg for CDD {
    type Output = CDD;
    fn neg(self) -> CDD {
        CDD {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
}

impl Zero for CDD {
    fn zero() -> CDD {
        CDD {
            re: DD::ZERO,
            im: DD::ZERO,
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for CDD {
    fn one() -> CDD {
        CDD {
            re: DD::ONE,
            im: DD::ZERO,
        }
    }
}

impl fmt::Display for CDD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_c64())
    }
}

impl Scalar for CDD {
    const EXACT: bool = false;

    fn backend_name() -> &'static str {
        "float-dd"
    }

    fn from_i64(v: i64) -> CDD {
        CDD {
            re: DD::from_i64(v),
            im: DD::ZERO,
        }
    }

    fn from_ratio(num: i64, den: i64) -> CDD {
        assert!(den != 0, "zero denominator");
        CDD {
            re: DD::from_i64(num).div(DD::from_i64(den)),
            im: DD::ZERO,
        }
    }

    fn from_re_im(re: f64, im: f64) -> CDD {
        assert!(re.is_finite() && im.is_finite(), "non-finite scalar literal");
        CDD {
            re: DD::from_f64(re),
            im: DD::from_f64(im),
        }
    }

    fn conj(&self) -> CDD {
        CDD {
            re: self.re,
            im: self.im.neg(),
        }
    }

    fn modulus(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn exp(&self) -> Result<CDD> {
        Ok(self.cexp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::traits::ToPrimitive;

    fn dd_to_rational(x: DD) -> BigRational {
        BigRational::from_float(x.hi).unwrap() + BigRational::from_float(x.lo).unwrap()
    }

    #[test]
    fn third_times_three_is_one_to_31_digits() {
        let third = DD::ONE.div(DD::from_i64(3));
        let back = third.mul_f64(3.0);
        assert!(back.sub(DD::ONE).abs_f64() < 1e-31);
    }

    #[test]
    fn harmonic_sum_beats_f64_by_many_digits() {
        let mut dd = DD::ZERO;
        let mut exact = BigRational::zero();
        for j in 1..=500i64 {
            dd = dd.add(DD::ONE.div(DD::from_i64(j)));
            exact += BigRational::new(BigInt::from(1), BigInt::from(j));
        }
        let err = (dd_to_rational(dd) - exact).to_f64().unwrap().abs();
        assert!(err < 1e-28, "err {}", err);
    }

    #[test]
    fn big_integer_round_trip() {
        // 3^35 > 2^53 does not fit in one f64.
        let mut p = DD::ONE;
        for _ in 0..35 {
            p = p.mul_f64(3.0);
        }
        assert_eq!(dd_to_rational(p), BigRational::from(BigInt::from(3i64).pow(35)));
    }

    #[test]
    fn exp_matches_rational_taylor_reference() {
        // e^{1/4} by exact rational Taylor; 60 terms push the tail far
        // below double-double resolution.
        let x = BigRational::new(BigInt::from(1), BigInt::from(4));
        let mut term = BigRational::one();
        let mut reference = BigRational::one();
        for j in 1..=60i64 {
            term = term * &x / BigRational::from(BigInt::from(j));
            reference += &term;
        }
        let got = CDD::from_ratio(1, 4).exp().unwrap();
        let err = (dd_to_rational(got.re) - reference).to_f64().unwrap().abs();
        assert!(err < 1e-30, "err {}", err);
        assert!(got.im.abs_f64() == 0.0);
    }

    #[test]
    fn exp_of_imaginary_has_unit_modulus() {
        for v in [0.3, 1.7, -2.4, 11.0] {
            let z = CDD::from_re_im(0.0, v);
            let e = z.exp().unwrap();
            let defect = e.norm_sqr().sub(DD::ONE).abs_f64();
            assert!(defect < 1e-29, "defect {} at {}", defect, v);
        }
    }

    #[test]
    fn exp_inverse_pairs() {
        for (re, im) in [(0.8, -0.4), (-3.1, 2.2), (12.5, -7.0)] {
            let z = CDD::from_re_im(re, im);
            let prod = z.exp().unwrap() * (-z).exp().unwrap();
            let err = (prod - CDD::one()).modulus();
            assert!(err < 1e-27, "err {} at {}+{}i", err, re, im);
        }
    }

    #[test]
    fn exp_agrees_with_f64_at_float_precision() {
        let z = CDD::from_re_im(0.37, -1.21);
        let coarse = C64::new(0.37, -1.21).exp();
        assert!((z.exp().unwrap().to_c64() - coarse).norm() < 1e-14);
    }

    #[test]
    fn division_round_trip() {
        let a = CDD::from_re_im(0.123456789, -3.14);
        let b = CDD::from_re_im(-1.75, 0.5);
        let q = a / b;
        let back = q * b;
        assert!((back - a).modulus() < 1e-30);
    }
}
