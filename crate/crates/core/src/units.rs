//! Physical constants and unit conversions. Internal math is in angular SI units.

use crate::scalar::Real;

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz_to_angular<T: Real>(f: T) -> T {
    f * T::TAU()
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn angular_to_hz<T: Real>(w: T) -> T {
    w / T::TAU()
}

/// Angular optical frequency of light with vacuum wavelength `lambda` (m).
#[inline]
pub fn optical_angular_frequency<T: Real>(lambda: T) -> T {
    T::TAU() * T::lit(SPEED_OF_LIGHT) / lambda
}

/// Shortest decimal that parses back to the same `f64`, switching to exponent
/// notation for very small or very large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Reduce an angle into `[0, 2π)`.
#[inline]
pub fn canonical_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let mut r = theta % tau;
    if r < T::zero() {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}
