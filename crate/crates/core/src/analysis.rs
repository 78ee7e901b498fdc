//! Derived quantities used by the figure presets: efficiency peaks, window
//! summaries and group-delay extrema over the modulation phase.

use rayon::prelude::*;

use crate::darkmode::{fit_spectrum, LinewidthFit, DEFAULT_PROMINENCE};
use crate::error::{OmitError, Result};
use crate::model::{PhononCoupling, SystemConfig};
use crate::scalar::Real;
use crate::sidebands::spectrum::{compute_spectrum, group_delay_at, OmegaGrid, Spectrum};
use crate::steady::solve_steady_state;

/// Default local step for group delays, as a fraction of the reference frequency.
pub const DELAY_STEP_RATIO: f64 = 1e-5;

/// Largest second-order efficiency on `grid`, with its position in units of ω_ref.
pub fn peak_efficiency<T: Real>(config: &SystemConfig<T>, grid: &OmegaGrid) -> Result<(T, T)> {
    let s = compute_spectrum(config, grid)?;
    peak_efficiency_of(&s).ok_or_else(|| OmitError::UnsupportedTopology("spectrum carries no second-order data".into()))
}

pub fn peak_efficiency_of<T: Real>(s: &Spectrum<T>) -> Option<(T, T)> {
    s.points
        .iter()
        .filter_map(|p| p.efficiency.map(|e| (e, p.omega_ratio)))
        .fold(None, |best, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        })
}

/// Transparency windows of `|t_p|²` with centers and widths in units of ω_ref.
pub fn windows<T: Real>(s: &Spectrum<T>) -> Vec<LinewidthFit<T>> {
    fit_spectrum(s, T::lit(DEFAULT_PROMINENCE))
        .into_iter()
        .map(|mut f| {
            f.center /= s.omega_ref;
            f.fwhm /= s.omega_ref;
            f
        })
        .collect()
}

/// Group delay at `omega_ratio · ω_ref`, seconds.
pub fn delay_at_ratio<T: Real>(config: &SystemConfig<T>, omega_ratio: T) -> Result<T> {
    let steady = solve_steady_state(config)?;
    let w = config.reference_omega();
    group_delay_at(config, &steady, omega_ratio * w, T::lit(DELAY_STEP_RATIO) * w)
}

fn with_theta<T: Real>(base: &SystemConfig<T>, link: usize, theta: T) -> Result<SystemConfig<T>> {
    let mut c = base.clone();
    let eta = c.couplings.get(link).ok_or_else(|| OmitError::invalid("link", format!("no coupling {}", link + 1)))?.eta();
    c.couplings[link] = PhononCoupling::new(eta, theta)?;
    Ok(c)
}

/// Extremes of a function of θ found on a grid and polished by golden-section search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaExtrema<T> {
    pub max: T,
    pub theta_at_max: T,
    pub min: T,
    pub theta_at_min: T,
}

fn golden<T: Real>(f: &dyn Fn(T) -> Result<T>, mut a: T, mut b: T, maximize: bool, iters: usize) -> Result<(T, T)> {
    let sign = if maximize { T::one() } else { -T::one() };
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sign * f(d)?;
        }
    }
    Ok(if fc > fd { (c, sign * fc) } else { (d, sign * fd) })
}

/// Group delay at a fixed probe detuning as θ of link `link` runs over `[0, 2π)`.
///
/// Returns the sampled curve `(θ, τ)` and its refined extremes.
pub fn delay_versus_theta<T: Real>(
    base: &SystemConfig<T>,
    link: usize,
    omega_ratio: T,
    samples: usize,
) -> Result<(Vec<(T, T)>, ThetaExtrema<T>)> {
    let tau = |theta: T| -> Result<T> { delay_at_ratio(&with_theta(base, link, theta)?, omega_ratio) };
    let step = T::TAU() / T::of_usize(samples.max(3));
    let curve = (0..samples.max(3))
        .into_par_iter()
        .map(|i| {
            let th = T::of_usize(i) * step;
            Ok((th, tau(th)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (imax, imin) = curve.iter().enumerate().fold((0, 0), |(mx, mn), (i, p)| {
        (if p.1 > curve[mx].1 { i } else { mx }, if p.1 < curve[mn].1 { i } else { mn })
    });
    let (tmax, vmax) = golden(&tau, curve[imax].0 - step, curve[imax].0 + step, true, 60)?;
    let (tmin, vmin) = golden(&tau, curve[imin].0 - step, curve[imin].0 + step, false, 60)?;
    let (max, theta_at_max) = if vmax >= curve[imax].1 { (vmax, tmax) } else { (curve[imax].1, curve[imax].0) };
    let (min, theta_at_min) = if vmin <= curve[imin].1 { (vmin, tmin) } else { (curve[imin].1, curve[imin].0) };
    let wrap = crate::units::canonical_angle;
    Ok((curve, ThetaExtrema { max, theta_at_max: wrap(theta_at_max), min, theta_at_min: wrap(theta_at_min) }))
}
