//! Probe spectra over a grid of probe detunings.

use rayon::prelude::*;

use super::{closed, delay, second_order_efficiency, solve_first_order_linear, solve_second_order, transmission};
use crate::error::{OmitError, Result};
use crate::model::SystemConfig;
use crate::scalar::{rel_diff, Cx, Real};
use crate::steady::{solve_steady_state, SteadyState};
use crate::units::format_f64;

/// Uniform grid of probe detunings in units of the reference mechanical frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl OmegaGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let g = OmegaGrid { start, stop, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(OmitError::invalid("omega_grid", "bounds must be finite"));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(OmitError::invalid("omega_grid", "need start < stop"));
        }
        Ok(())
    }

    /// Parses `start:stop:count`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || OmitError::invalid("omega_grid", format!("expected start:stop:count, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].parse().map_err(|_| bad())?;
        let stop = parts[1].parse().map_err(|_| bad())?;
        let count = parts[2].parse().map_err(|_| bad())?;
        Self::new(start, stop, count)
    }

    /// Grid points in units of the reference frequency.
    pub fn points(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![self.start; self.count];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

/// One probe detuning of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPoint<T> {
    /// Ω / ω_ref.
    pub omega_ratio: T,
    /// Ω in rad/s.
    pub omega: T,
    pub t_p: Cx<T>,
    /// |t_p|².
    pub transmission: T,
    /// Unwrapped arg(t_p).
    pub phase: T,
    /// Λ_p as a fraction; absent where second order is not provided.
    pub efficiency: Option<T>,
    pub group_delay: Option<T>,
    pub a1_minus: Cx<T>,
    pub a2_minus: Option<Cx<T>>,
    /// Largest relative disagreement between direct and closed-form routes.
    pub route_discrepancy: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    pub steady: SteadyState<T>,
    pub omega_ref: T,
    pub points: Vec<SpectrumPoint<T>>,
}

pub const CSV_HEADER: &str = "omega_over_omega_m,transmission,efficiency_percent,phase_rad,group_delay_s,route_discrepancy";

impl<T: Real> Spectrum<T> {
    pub fn max_route_discrepancy(&self) -> Option<T> {
        self.points.iter().filter_map(|p| p.route_discrepancy).fold(None, |m, d| Some(m.map_or(d, |m: T| m.max(d))))
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_f64(p.omega_ratio.to_f64_lossy()),
                format_f64(p.transmission.to_f64_lossy()),
                opt(p.efficiency.map(|e| e.to_f64_lossy() * 100.0)),
                format_f64(p.phase.to_f64_lossy()),
                opt(p.group_delay.map(Real::to_f64_lossy)),
                opt(p.route_discrepancy.map(Real::to_f64_lossy)),
            ));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = |x: T| x.to_f64_lossy();
        serde_json::json!({
            "omega_ref_rad_s": f(self.omega_ref),
            "delta_eff_rad_s": f(self.steady.delta_eff),
            "delta_c_rad_s": f(self.steady.delta_c),
            "photon_number": f(self.steady.photon_number()),
            "multistable": self.steady.multistable,
            "points": self.points.iter().map(|p| serde_json::json!({
                "omega_over_omega_m": f(p.omega_ratio),
                "transmission": f(p.transmission),
                "efficiency_percent": p.efficiency.map(|e| f(e) * 100.0),
                "phase_rad": f(p.phase),
                "group_delay_s": p.group_delay.map(f),
                "route_discrepancy": p.route_discrepancy.map(f),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Evaluates one probe detuning against a fixed steady state.
pub fn spectrum_point<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> Result<SpectrumPoint<T>> {
    let kappa = config.kappa();
    let eps_p = config.probe_amplitude()?;
    let first = solve_first_order_linear(config, steady, omega)?;
    let (t_p, rate) = transmission(first.a_minus, eps_p, kappa)?;
    let (mut efficiency, mut a2_minus, mut route) = (None, None, None);
    if config.n_modes() <= 2 {
        let closed_a1 = closed::first_order_closed_form(config, steady, omega)?;
        let second = solve_second_order(config, steady, &first, omega)?;
        efficiency = Some(second_order_efficiency(second.block.a_minus, eps_p, kappa)?);
        a2_minus = Some(second.block.a_minus);
        route = Some(rel_diff(first.a_minus, closed_a1).max(second.route_discrepancy()));
    }
    Ok(SpectrumPoint {
        omega_ratio: omega / config.reference_omega(),
        omega,
        t_p,
        transmission: rate,
        phase: t_p.arg(),
        efficiency,
        group_delay: None,
        a1_minus: first.a_minus,
        a2_minus,
        route_discrepancy: route,
    })
}

/// Spectrum against a precomputed steady state; points are evaluated in parallel.
pub fn compute_spectrum_with<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, grid: &OmegaGrid) -> Result<Spectrum<T>> {
    grid.validate()?;
    let w_ref = config.reference_omega();
    let mut points = grid
        .points()
        .into_par_iter()
        .map(|r| spectrum_point(config, steady, T::lit(r) * w_ref))
        .collect::<Result<Vec<_>>>()?;
    for (p, r) in points.iter_mut().zip(grid.points()) {
        p.omega_ratio = T::lit(r);
    }
    let omegas: Vec<T> = points.iter().map(|p| p.omega).collect();
    let t: Vec<Cx<T>> = points.iter().map(|p| p.t_p).collect();
    let unwrapped = delay::unwrap_phase(&t.iter().map(|z| z.arg()).collect::<Vec<_>>());
    let delays = if points.len() > 2 * delay::MIN_SIDE_POINTS { delay::delay_on_grid(&omegas, &t)? } else { vec![None; points.len()] };
    for ((p, ph), d) in points.iter_mut().zip(unwrapped).zip(delays) {
        p.phase = ph;
        p.group_delay = d;
    }
    Ok(Spectrum { steady: steady.clone(), omega_ref: w_ref, points })
}

/// Solves the steady state once and evaluates the spectrum over `grid`.
pub fn compute_spectrum<T: Real>(config: &SystemConfig<T>, grid: &OmegaGrid) -> Result<Spectrum<T>> {
    let steady = solve_steady_state(config)?;
    if steady.multistable {
        log::warn!("steady state is multistable; using the branch reached from the bare detuning");
    }
    compute_spectrum_with(config, &steady, grid)
}

/// Group delay at one probe detuning from a local uniform grid of spacing `h`.
pub fn group_delay_at<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T, h: T) -> Result<T> {
    let k = delay::MIN_SIDE_POINTS as i64;
    let omegas: Vec<T> = (-k..=k).map(|j| omega + h * T::lit(j as f64)).collect();
    let eps_p = config.probe_amplitude()?;
    let t = omegas
        .iter()
        .map(|&w| Ok(transmission(solve_first_order_linear(config, steady, w)?.a_minus, eps_p, config.kappa())?.0))
        .collect::<Result<Vec<_>>>()?;
    delay::group_delay(&omegas, &t, omega)
}
