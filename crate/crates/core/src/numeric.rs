//! Extended-precision scalars for the reconstruction algebra.
//!
//! The coefficient recursion amplifies rounding error geometrically in the
//! number of unit intervals (often by 10^25 or more over twenty intervals), so
//! every sum, product and quotient that feeds it is carried in MPFR floats of
//! [`PRECISION`] bits. Generator values themselves are plain `f64`; they only
//! need to be a deterministic function of the sample location.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::Float;

/// Working precision in bits.
pub const PRECISION: u32 = 256;

pub type Real = Float;

#[inline]
pub fn real(x: f64) -> Real {
    Float::with_val(PRECISION, x)
}

#[inline]
pub fn to_f64(x: &Real) -> f64 {
    x.to_f64()
}

/// A complex number with [`Real`] parts.
#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Real,
    pub im: Real,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_c64())
    }
}

impl Cplx {
    pub fn new(re: Real, im: Real) -> Self {
        Cplx { re, im }
    }

    pub fn zero() -> Self {
        Cplx { re: real(0.0), im: real(0.0) }
    }

    pub fn from_real(re: Real) -> Self {
        Cplx { re, im: real(0.0) }
    }

    pub fn from_c64(z: Complex64) -> Self {
        Cplx { re: real(z.re), im: real(z.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Cplx {
        Cplx { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Real {
        Float::with_val(PRECISION, self.re.square_ref()) + Float::with_val(PRECISION, self.im.square_ref())
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: &Real) -> Cplx {
        Cplx { re: self.re.clone() * s, im: self.im.clone() * s }
    }

    /// Product with an `f64` complex value.
    pub fn mul_c64(&self, w: Complex64) -> Cplx {
        let re = self.re.clone() * w.re - self.im.clone() * w.im;
        let im = self.re.clone() * w.im + self.im.clone() * w.re;
        Cplx { re, im }
    }

    /// `z / |z|`, or `1` for `z = 0` (the phase of zero is taken as 0).
    pub fn unit(&self) -> Cplx {
        let m = self.abs();
        if m.is_zero() {
            Cplx::from_real(real(1.0))
        } else {
            Cplx { re: self.re.clone() / &m, im: self.im.clone() / &m }
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cplx {
        let m = self.abs();
        if m.is_zero() {
            return Cplx::zero();
        }
        if !self.re.is_sign_negative() {
            let r = ((m + &self.re) / 2u32).sqrt();
            let i = self.im.clone() / (r.clone() * 2u32);
            Cplx { re: r, im: i }
        } else {
            let mut i = ((m - &self.re) / 2u32).sqrt();
            if self.im.is_sign_negative() {
                i = -i;
            }
            let r = self.im.clone() / (i.clone() * 2u32);
            Cplx { re: r, im: i }
        }
    }

    /// Phase angle in `(-pi, pi]` at `f64` resolution; 0 for the origin.
    pub fn arg(&self) -> f64 {
        let w = self.to_c64();
        if w.re == 0.0 && w.im == 0.0 {
            0.0
        } else {
            w.im.atan2(w.re)
        }
    }
}

impl Add<&Cplx> for Cplx {
    type Output = Cplx;
    fn add(self, rhs: &Cplx) -> Cplx {
        Cplx { re: self.re + &rhs.re, im: self.im + &rhs.im }
    }
}

impl Add for Cplx {
    type Output = Cplx;
    fn add(self, rhs: Cplx) -> Cplx {
        self + &rhs
    }
}

impl Sub<&Cplx> for Cplx {
    type Output = Cplx;
    fn sub(self, rhs: &Cplx) -> Cplx {
        Cplx { re: self.re - &rhs.re, im: self.im - &rhs.im }
    }
}

impl Sub for Cplx {
    type Output = Cplx;
    fn sub(self, rhs: Cplx) -> Cplx {
        self - &rhs
    }
}

impl Mul<&Cplx> for &Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Cplx) -> Cplx {
        let re = Float::with_val(PRECISION, &self.re * &rhs.re) - Float::with_val(PRECISION, &self.im * &rhs.im);
        let im = Float::with_val(PRECISION, &self.re * &rhs.im) + Float::with_val(PRECISION, &self.im * &rhs.re);
        Cplx { re, im }
    }
}

impl Mul<&Cplx> for Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Cplx) -> Cplx {
        &self * rhs
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    fn mul(self, rhs: Cplx) -> Cplx {
        &self * &rhs
    }
}

impl Div<&Cplx> for &Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Cplx) -> Cplx {
        let d = rhs.norm_sqr();
        let n = self * &rhs.conj();
        Cplx { re: n.re / &d, im: n.im / &d }
    }
}

impl Div<&Cplx> for Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Cplx) -> Cplx {
        &self / rhs
    }
}

impl Div for Cplx {
    type Output = Cplx;
    fn div(self, rhs: Cplx) -> Cplx {
        &self / &rhs
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx { re: -self.re, im: -self.im }
    }
}
