//! Phase unwrapping and group delay `τ_g = d arg(t_p)/dΩ`.

use crate::error::{OmitError, Result};
use crate::scalar::{Cx, Real};

/// Points required on each side of an evaluation point.
pub const MIN_SIDE_POINTS: usize = 5;

/// Removes `2π` jumps from a sampled phase.
pub fn unwrap_phase<T: Real>(phase: &[T]) -> Vec<T> {
    let two_pi = T::TAU();
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = T::zero();
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p + offset - out[i - 1];
            offset -= (d / two_pi).round() * two_pi;
        }
        out.push(p + offset);
    }
    out
}

fn check_uniform<T: Real>(omegas: &[T]) -> Result<T> {
    if omegas.len() < 2 * MIN_SIDE_POINTS + 1 {
        return Err(OmitError::invalid(
            "omega_grid",
            format!("group delay needs at least {} grid points", 2 * MIN_SIDE_POINTS + 1),
        ));
    }
    let step = (omegas[omegas.len() - 1] - omegas[0]) / T::of_usize(omegas.len() - 1);
    if !(step > T::zero()) {
        return Err(OmitError::invalid("omega_grid", "grid must be strictly increasing"));
    }
    let tol = T::lit(1e-6).max(T::epsilon() * T::lit(1e3)) * step;
    if omegas.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
        return Err(OmitError::invalid("omega_grid", "group delay requires a uniform grid"));
    }
    Ok(step)
}

/// Central slope over `±k` samples.
fn slope<T: Real>(omegas: &[T], phase: &[T], i: usize, k: usize) -> T {
    (phase[i + k] - phase[i - k]) / (omegas[i + k] - omegas[i - k])
}

/// Richardson-extrapolated derivative at grid index `i` using spacings `h`, `2h`, `4h`.
fn derivative_at<T: Real>(omegas: &[T], phase: &[T], i: usize) -> T {
    let (three, fifteen, sixteen, four) = (T::lit(3.0), T::lit(15.0), T::lit(16.0), T::lit(4.0));
    let d1 = slope(omegas, phase, i, 1);
    let d2 = slope(omegas, phase, i, 2);
    let d4 = slope(omegas, phase, i, 4);
    let r1 = (four * d1 - d2) / three;
    let r2 = (four * d2 - d4) / three;
    (sixteen * r1 - r2) / fifteen
}

/// Group delay at every grid point that has enough neighbours; `None` elsewhere.
pub fn delay_on_grid<T: Real>(omegas: &[T], t_p: &[Cx<T>]) -> Result<Vec<Option<T>>> {
    check_uniform(omegas)?;
    let phase = unwrap_phase(&t_p.iter().map(|t| t.arg()).collect::<Vec<_>>());
    let n = omegas.len();
    Ok((0..n)
        .map(|i| {
            let inside = i >= MIN_SIDE_POINTS && i + MIN_SIDE_POINTS < n;
            let clean = t_p[i.saturating_sub(4)..(i + 5).min(n)].iter().all(|t| t.norm() > T::epsilon().sqrt());
            (inside && clean).then(|| derivative_at(omegas, &phase, i))
        })
        .collect())
}

/// Group delay at `at`, which must lie strictly inside the grid with at least five
/// samples on either side; interpolated linearly between neighbouring grid points.
pub fn group_delay<T: Real>(omegas: &[T], t_p: &[Cx<T>], at: T) -> Result<T> {
    if omegas.len() != t_p.len() {
        return Err(OmitError::invalid("t_p", "length differs from the frequency grid"));
    }
    let step = check_uniform(omegas)?;
    let pos = (at - omegas[0]) / step;
    let lo = pos.floor();
    let n = omegas.len();
    let side = T::of_usize(MIN_SIDE_POINTS);
    if !(pos >= side && pos <= T::of_usize(n - 1 - MIN_SIDE_POINTS)) {
        return Err(OmitError::DegeneratePoint(format!(
            "Ω = {at} is not surrounded by {MIN_SIDE_POINTS} grid points on each side"
        )));
    }
    let i = lo.to_usize().unwrap_or(0).min(n - 1 - MIN_SIDE_POINTS);
    let near = if pos - lo > T::lit(0.5) { i + 1 } else { i };
    if t_p[near].norm() <= T::epsilon().sqrt() {
        return Err(OmitError::DegeneratePoint(format!("transmission vanishes near Ω = {at}; phase undefined")));
    }
    let phase = unwrap_phase(&t_p.iter().map(|t| t.arg()).collect::<Vec<_>>());
    let frac = pos - T::of_usize(i);
    let d0 = derivative_at(omegas, &phase, i);
    if frac == T::zero() {
        return Ok(d0);
    }
    let d1 = derivative_at(omegas, &phase, i + 1);
    Ok(d0 + (d1 - d0) * frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn unwrap_linear_ramp() {
        let raw: Vec<f64> = (0..100).map(|i| (0.3 * i as f64 + 3.0).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI).collect();
        let u = unwrap_phase(&raw);
        for w in u.windows(2) {
            assert_relative_eq!(w[1] - w[0], 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_delay_is_recovered() {
        let tau = 2.5e-6;
        let omegas: Vec<f64> = (0..41).map(|i| 1e6 + 1e3 * i as f64).collect();
        let t: Vec<Complex64> = omegas.iter().map(|w| Complex64::from_polar(0.7, tau * w)).collect();
        assert_relative_eq!(group_delay(&omegas, &t, 1.0155e6).unwrap(), tau, max_relative = 1e-9);
        let grid = delay_on_grid(&omegas, &t).unwrap();
        assert!(grid[4].is_none() && grid[5].is_some() && grid[35].is_some() && grid[36].is_none());
    }

    #[test]
    fn edges_and_zeros_are_rejected() {
        let omegas: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let mut t = vec![Complex64::new(1.0, 0.0); 21];
        assert!(matches!(group_delay(&omegas, &t, 2.0), Err(OmitError::DegeneratePoint(_))));
        t[10] = Complex64::new(0.0, 0.0);
        assert!(matches!(group_delay(&omegas, &t, 10.0), Err(OmitError::DegeneratePoint(_))));
        let uneven = [0.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0];
        assert!(group_delay(&uneven, &t[..11], 5.0).is_err());
    }
}
