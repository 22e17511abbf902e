//! Complex scalars: hardware doubles and an MPFR-backed extended type.

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Complex, Float};

/// Arithmetic needed by the Stokes engine, generic over working precision.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn exp(&self) -> Self;
    /// Principal logarithm.
    fn ln(&self) -> Self;
    fn conj(&self) -> Self;
    /// Modulus, rounded to f64. Used for pivoting and stopping tests only.
    fn abs(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn pi() -> Self;
    /// Unit roundoff of the working precision.
    fn eps() -> f64;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn i() -> Self {
        Self::from_c64(Complex64::new(0.0, 1.0))
    }
    fn scale(&self, x: f64) -> Self {
        self.clone() * Self::from_f64(x)
    }
}

impl Scalar for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn abs(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn pi() -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }
    fn eps() -> f64 {
        f64::EPSILON / 2.0
    }
    fn scale(&self, x: f64) -> Self {
        self * x
    }
}

/// Default working precision of [`Ext`], in bits (about 64 decimal digits).
pub const EXT_DEFAULT_BITS: u32 = 212;

thread_local! {
    static EXT_BITS: Cell<u32> = const { Cell::new(EXT_DEFAULT_BITS) };
}

/// Precision used when new [`Ext`] values are created on this thread.
pub fn ext_precision() -> u32 {
    EXT_BITS.with(|b| b.get())
}

/// Restores the previous [`Ext`] precision when dropped.
pub struct ExtPrecisionGuard {
    prev: u32,
}

impl Drop for ExtPrecisionGuard {
    fn drop(&mut self) {
        EXT_BITS.with(|b| b.set(self.prev));
    }
}

/// Set the thread's [`Ext`] precision until the guard is dropped.
pub fn set_ext_precision(bits: u32) -> ExtPrecisionGuard {
    let prev = EXT_BITS.with(|b| b.replace(bits.max(64)));
    ExtPrecisionGuard { prev }
}

/// Extended-precision complex number.
#[derive(Clone, PartialEq)]
pub struct Ext(pub Complex);

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_c64();
        write!(f, "Ext({} + {}i @{})", z.re, z.im, self.0.prec().0)
    }
}

impl Ext {
    fn prec_with(&self, other: &Ext) -> u32 {
        self.0.prec().0.max(other.0.prec().0)
    }
}

macro_rules! ext_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Ext {
            type Output = Ext;
            fn $m(self, rhs: Ext) -> Ext {
                let p = self.prec_with(&rhs);
                Ext(Complex::with_val(p, &self.0 $op &rhs.0))
            }
        }
    };
}

ext_binop!(Add, add, +);
ext_binop!(Sub, sub, -);
ext_binop!(Mul, mul, *);
ext_binop!(Div, div, /);

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(-self.0)
    }
}

impl Scalar for Ext {
    fn from_c64(z: Complex64) -> Self {
        Ext(Complex::with_val(ext_precision(), (z.re, z.im)))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.0.real().to_f64(), self.0.imag().to_f64())
    }
    fn exp(&self) -> Self {
        Ext(self.0.clone().exp())
    }
    fn ln(&self) -> Self {
        Ext(self.0.clone().ln())
    }
    fn conj(&self) -> Self {
        Ext(self.0.clone().conj())
    }
    fn abs(&self) -> f64 {
        let p = self.0.prec().0;
        Float::with_val(p, self.0.abs_ref()).to_f64()
    }
    fn is_finite(&self) -> bool {
        self.0.real().is_finite() && self.0.imag().is_finite()
    }
    fn pi() -> Self {
        let p = ext_precision();
        Ext(Complex::with_val(p, (Float::with_val(p, Constant::Pi), 0)))
    }
    fn eps() -> f64 {
        2f64.powi(-(ext_precision() as i32))
    }
}
