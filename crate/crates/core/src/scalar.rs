//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All physics is written against [`Real`], so the same code runs in `f64`
//! (the default, used by the I/O layer) and `f32`.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    'static
    + Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + crate::linalg::LuScalar
{
    /// Convert an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Convert a count into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Default relative tolerance for iterative solves at this precision.
    #[inline]
    fn default_tolerance() -> Self {
        let floor = Self::lit(1e-12);
        let scaled = Self::epsilon() * Self::lit(64.0);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// The imaginary unit.
#[inline]
pub(crate) fn im_unit<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// `e^{i phi}`
#[inline]
pub(crate) fn expi<T: Real>(phi: T) -> Cx<T> {
    let (s, c) = phi.sin_cos();
    Complex::new(c, s)
}

/// Relative difference `|a-b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff<T: Real>(a: Cx<T>, b: Cx<T>) -> T {
    let scale = a.norm().max(b.norm());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).norm() / scale
    }
}
