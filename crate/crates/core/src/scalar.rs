//! Scalar types used by the dense kernels.
//!
//! Everything in the crate is generic over [`Scalar`], a complex field with
//! conversions to and from `Complex64`. Two implementations are provided:
//! plain double precision (`Complex64`) and [`Complex<DoubleDouble>`], an
//! unevaluated-sum representation carrying roughly 32 significant digits.
//! The extended type is what the moment-based orthogonalizer and the
//! conjugated-operator checks run in; see their module docs for why.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{
    Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign,
};

use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};

/// A real number stored as the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

pub type ExtendedComplex = Complex<DoubleDouble>;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const PI: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Square root by one Newton correction of the double-precision root.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::zero()
            } else {
                DoubleDouble::from_f64(f64::NAN)
            };
        }
        let y = DoubleDouble::from_f64(self.hi.sqrt());
        y + (self - y * y) / (y * DoubleDouble::from_f64(2.0))
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn trunc(self) -> Self {
        let h = self.hi.trunc();
        if h != self.hi {
            DoubleDouble::from_f64(h)
        } else {
            let (s, e) = quick_two_sum(h, self.lo.trunc());
            DoubleDouble { hi: s, lo: e }
        }
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DD({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * DoubleDouble::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * DoubleDouble::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + DoubleDouble::from_f64(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - rhs * (self / rhs).trunc()
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {
        $(impl $tr for DoubleDouble {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        })*
    };
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from_f64(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from_f64(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            // decimal only; the empty-string parse yields a ParseFloatError
            return "".parse::<f64>().map(DoubleDouble::from_f64);
        }
        s.parse::<f64>().map(DoubleDouble::from_f64)
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

/// Complex field element used by every matrix kernel.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn conj(self) -> Self;
    /// Modulus rounded to double precision.
    fn abs(self) -> f64;
    /// Real part rounded to double precision.
    fn re_f64(self) -> f64;
    /// Square root of the real part; callers guarantee it is nonnegative.
    fn real_sqrt(self) -> Self;
    fn sqrt_pi() -> Self;
    /// Unit roundoff of the working precision.
    fn epsilon() -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }

    fn powu(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc *= self;
        }
        acc
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re_f64(self) -> f64 {
        self.re
    }
    fn real_sqrt(self) -> Self {
        Complex64::new(self.re.sqrt(), 0.0)
    }
    fn sqrt_pi() -> Self {
        Complex64::new(std::f64::consts::PI.sqrt(), 0.0)
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
}

impl Scalar for ExtendedComplex {
    fn zero() -> Self {
        Complex::new(DoubleDouble::zero(), DoubleDouble::zero())
    }
    fn one() -> Self {
        Complex::new(DoubleDouble::one(), DoubleDouble::zero())
    }
    fn from_f64(x: f64) -> Self {
        Complex::new(DoubleDouble::from_f64(x), DoubleDouble::zero())
    }
    fn from_c64(z: Complex64) -> Self {
        Complex::new(DoubleDouble::from_f64(z.re), DoubleDouble::from_f64(z.im))
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn abs(self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt().to_f64()
    }
    fn re_f64(self) -> f64 {
        self.re.to_f64()
    }
    fn real_sqrt(self) -> Self {
        Complex::new(self.re.sqrt(), DoubleDouble::zero())
    }
    fn sqrt_pi() -> Self {
        Complex::new(DoubleDouble::PI.sqrt(), DoubleDouble::zero())
    }
    fn epsilon() -> f64 {
        // 2^-104
        4.930_380_657_631_324e-32
    }
}
