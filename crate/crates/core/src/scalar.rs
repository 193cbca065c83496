//! Arithmetic shared by the floating-point reference path and the checked
//! fixed-width integer path.

use core::fmt::{Debug, Display};
use core::hash::Hash;

/// Ring operations that report overflow instead of wrapping.
pub trait Scalar: Copy + PartialEq + PartialOrd + Debug + Default + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    fn from_i64(v: i64) -> Self;
    fn checked_add(self, o: Self) -> Option<Self>;
    fn checked_sub(self, o: Self) -> Option<Self>;
    fn checked_mul(self, o: Self) -> Option<Self>;
    fn checked_neg(self) -> Option<Self>;
    fn to_f64(self) -> f64;
    fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn checked_add(self, o: Self) -> Option<Self> {
        Some(self + o)
    }
    fn checked_sub(self, o: Self) -> Option<Self> {
        Some(self - o)
    }
    fn checked_mul(self, o: Self) -> Option<Self> {
        Some(self * o)
    }
    fn checked_neg(self) -> Option<Self> {
        Some(-self)
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Signed fixed-width integers usable as quantized values.
pub trait QuantInt: Scalar + Ord + Eq + Hash + Display {
    /// Bit width.
    const BITS: u32;
    /// Largest representable value, `2^(BITS−1) − 1`.
    const MAX: Self;
    /// Rounds half to even and range-checks against `±MAX`.
    fn from_f64_round(v: f64) -> Option<Self>;
    fn to_i128(self) -> i128;
    fn from_i128(v: i128) -> Option<Self>;
}

macro_rules! impl_int {
    ($t:ty) => {
        impl Scalar for $t {
            const ZERO: Self = 0;
            const ONE: Self = 1;
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn checked_add(self, o: Self) -> Option<Self> {
                <$t>::checked_add(self, o).filter(|v| *v != <$t>::MIN)
            }
            fn checked_sub(self, o: Self) -> Option<Self> {
                <$t>::checked_sub(self, o).filter(|v| *v != <$t>::MIN)
            }
            fn checked_mul(self, o: Self) -> Option<Self> {
                <$t>::checked_mul(self, o).filter(|v| *v != <$t>::MIN)
            }
            fn checked_neg(self) -> Option<Self> {
                <$t>::checked_neg(self)
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
        }

        impl QuantInt for $t {
            const BITS: u32 = <$t>::BITS;
            const MAX: Self = <$t>::MAX;
            fn from_f64_round(v: f64) -> Option<Self> {
                let r = libm::rint(v);
                // 2^(BITS−1) is exact in f64; anything strictly below fits.
                let limit = libm::ldexp(1.0, (<$t>::BITS - 1) as i32);
                (r.is_finite() && r.abs() < limit).then(|| r as $t)
            }
            fn to_i128(self) -> i128 {
                self as i128
            }
            fn from_i128(v: i128) -> Option<Self> {
                <$t>::try_from(v).ok().filter(|v| *v != <$t>::MIN)
            }
        }
    };
}

impl_int!(i32);
impl_int!(i64);
impl_int!(i128);
