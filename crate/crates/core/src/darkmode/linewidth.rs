//! Transparency-window detection and linewidth extraction from sampled spectra.

use crate::scalar::Real;
use crate::sidebands::spectrum::Spectrum;

/// Default minimum prominence, as a fraction of the spectrum's full scale.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// One detected transparency window.
#[derive(Clone, Debug, PartialEq)]
pub struct LinewidthFit<T> {
    /// Peak position, same units as the abscissa.
    pub center: T,
    /// Full width at half prominence.
    pub fwhm: T,
    pub peak_height: T,
    /// The higher of the two minima bounding the peak.
    pub baseline: T,
    /// Number of windows found in the same spectrum.
    pub window_count: usize,
}

/// Abscissa where the segment `i → j` crosses `level`.
fn crossing<T: Real>(x: &[T], y: &[T], i: usize, j: usize, level: T) -> T {
    let t = (level - y[i]) / (y[j] - y[i]);
    x[i] + (x[j] - x[i]) * t
}

/// Detects local maxima of `y(x)` whose prominence exceeds `prominence` times
/// the full scale `max(y) − min(y)`, and measures each at half prominence.
///
/// Peaks whose half-prominence level is not crossed inside the scan are skipped.
pub fn fit_linewidth<T: Real>(x: &[T], y: &[T], prominence: T) -> Vec<LinewidthFit<T>> {
    let n = x.len().min(y.len());
    if n < 3 {
        return Vec::new();
    }
    let (lo, hi) = y[..n].iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let threshold = prominence * (hi - lo);
    let mut fits = Vec::new();
    for i in 1..n - 1 {
        // Plateaus count once, at their right edge.
        if !(y[i] >= y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let mut l = i;
        while l > 0 && y[l - 1] <= y[i] {
            l -= 1;
        }
        let left_min = y[l..=i].iter().fold(T::infinity(), |a, &v| a.min(v));
        let mut r = i;
        while r + 1 < n && y[r + 1] <= y[i] {
            r += 1;
        }
        let right_min = y[i..=r].iter().fold(T::infinity(), |a, &v| a.min(v));
        let baseline = left_min.max(right_min);
        let prom = y[i] - baseline;
        if !(prom > threshold && prom > T::zero()) {
            continue;
        }
        let half = y[i] - prom / T::lit(2.0);
        let mut a = i;
        while a > 0 && y[a] > half {
            a -= 1;
        }
        let mut b = i;
        while b + 1 < n && y[b] > half {
            b += 1;
        }
        if y[a] > half || y[b] > half {
            continue;
        }
        let left = crossing(x, y, a, a + 1, half);
        let right = crossing(x, y, b - 1, b, half);
        fits.push(LinewidthFit { center: x[i], fwhm: right - left, peak_height: y[i], baseline, window_count: 0 });
    }
    let count = fits.len();
    for f in &mut fits {
        f.window_count = count;
    }
    fits
}

/// Windows of a spectrum's `|t_p|²` against `Ω` in rad/s.
pub fn fit_spectrum<T: Real>(spectrum: &Spectrum<T>, prominence: T) -> Vec<LinewidthFit<T>> {
    let x: Vec<T> = spectrum.points.iter().map(|p| p.omega).collect();
    let y: Vec<T> = spectrum.points.iter().map(|p| p.transmission).collect();
    fit_linewidth(&x, &y, prominence)
}

/// Number of transparency windows at the default prominence.
pub fn count_windows<T: Real>(spectrum: &Spectrum<T>) -> usize {
    fit_spectrum(spectrum, T::lit(DEFAULT_PROMINENCE)).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lorentzian_width() {
        let w = 0.37;
        let x: Vec<f64> = (0..4001).map(|i| -5.0 + 10.0 * i as f64 / 4000.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.2 + 0.7 / (1.0 + (2.0 * (v - 0.4) / w).powi(2))).collect();
        let fits = fit_linewidth(&x, &y, 0.05);
        assert_eq!(fits.len(), 1);
        assert_relative_eq!(fits[0].fwhm, w, max_relative = 1e-2);
        assert_relative_eq!(fits[0].center, 0.4, epsilon = 3e-3);
        assert_eq!(fits[0].window_count, 1);
    }

    #[test]
    fn flat_and_tiny() {
        assert!(fit_linewidth(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4], 0.05).is_empty());
        assert!(fit_linewidth::<f64>(&[0.0, 1.0], &[0.0, 1.0], 0.05).is_empty());
    }

    #[test]
    fn two_peaks_sorted() {
        let x: Vec<f64> = (0..2001).map(|i| i as f64 / 100.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + (v - 6.0).powi(2)) + 0.5 / (1.0 + (v - 14.0).powi(2))).collect();
        let fits = fit_linewidth(&x, &y, 0.05);
        assert_eq!(fits.len(), 2);
        assert!(fits[0].center < fits[1].center);
        assert!(fits.iter().all(|f| f.window_count == 2));
    }
}
