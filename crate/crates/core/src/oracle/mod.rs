//! Time-domain check of the sideband solution: integrate the nonlinear mean-field
//! equations with both drives on, then demodulate the cavity field.

mod integrator;

use rayon::prelude::*;

use self::integrator::{Control, Stepper, Tableau};
use crate::error::{OmitError, Result};
use crate::linalg::CMatrix;
use crate::model::SystemConfig;
use crate::scalar::{cx, expi, im_unit, re, rel_diff, Cx, Real};
use crate::sidebands::{solve_first_order_linear, solve_second_order};
use crate::steady::{solve_steady_state, SteadyState};

/// Minimum number of probe periods in a demodulation window.
pub const MIN_PERIODS: usize = 50;
/// Largest allowed output step is `2π / (STEPS_PER_PERIOD · fastest frequency)`.
pub const STEPS_PER_PERIOD: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState<T> {
    Zero,
    SteadyState,
    /// `[a, b₁, …, b_N]`.
    Custom(Vec<Cx<T>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationOptions<T> {
    pub rtol: T,
    pub initial: InitialState<T>,
    /// Samples before this time are integrated but not stored.
    pub record_from: T,
}

impl<T: Real> Default for IntegrationOptions<T> {
    fn default() -> Self {
        IntegrationOptions { rtol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)), initial: InitialState::SteadyState, record_from: T::zero() }
    }
}

/// Uniformly sampled mean-field trajectory in the pump frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeTrace<T> {
    pub times: Vec<T>,
    pub a_of_t: Vec<Cx<T>>,
    /// One series per mechanical mode.
    pub b_of_t: Vec<Vec<Cx<T>>>,
    pub step: T,
    pub method: &'static str,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real> TimeTrace<T> {
    pub fn final_time(&self) -> T {
        self.times.last().copied().unwrap_or_else(T::zero)
    }
}

/// Largest output step that resolves every frequency in the problem.
pub fn max_step<T: Real>(config: &SystemConfig<T>, delta_c: T, omega_probe: T) -> T {
    let fastest = config.modes.iter().fold(delta_c.abs().max(omega_probe.abs()), |m, x| m.max(x.omega.abs()));
    T::TAU() / (T::of_usize(STEPS_PER_PERIOD) * fastest)
}

/// Integrates the mean-field equations on `[0, t_final]` with outputs every `step`.
pub fn integrate_mean_field<T: Real>(
    config: &SystemConfig<T>,
    omega_probe: T,
    t_final: T,
    step: T,
    opts: &IntegrationOptions<T>,
) -> Result<TimeTrace<T>> {
    if !(step > T::zero()) || !(t_final >= T::zero()) {
        return Err(OmitError::invalid("step", "step and final time must be positive"));
    }
    let steady = solve_steady_state(config)?;
    let limit = max_step(config, steady.delta_c, omega_probe);
    if step > limit * (T::one() + T::lit(1e-9)) {
        return Err(OmitError::invalid("step", format!("{step:e} s does not resolve the fastest scale; need ≤ {limit:e} s")));
    }
    let n = config.n_modes();
    let kappa = config.kappa();
    let delta_c = steady.delta_c;
    let eps_l = config.pump_amplitude()?;
    let eps_p = config.probe_amplitude()?;
    let i = im_unit::<T>();
    let links: Vec<Cx<T>> = (0..n.saturating_sub(1))
        .map(|j| config.chain_link(j).map_or(re(T::zero()), |c| expi(c.theta()) * c.eta()))
        .collect();
    let modes = config.modes.clone();
    let rhs = move |t: T, y: &[Cx<T>], dy: &mut [Cx<T>]| {
        let a = y[0];
        let disp = modes.iter().enumerate().fold(T::zero(), |s, (l, m)| s + m.g * T::lit(2.0) * y[1 + l].re);
        dy[0] = -cx(kappa, delta_c) * a - i * a * disp + eps_l + expi(-omega_probe * t) * eps_p;
        let pop = a.norm_sqr();
        for (l, m) in modes.iter().enumerate() {
            let mut d = -cx(m.gamma, m.omega) * y[1 + l] - i * (m.g * pop);
            if l + 1 < n {
                d -= i * links[l] * y[2 + l];
            }
            if l > 0 {
                d -= i * links[l - 1].conj() * y[l];
            }
            dy[1 + l] = d;
        }
    };

    let y0 = match &opts.initial {
        InitialState::Zero => vec![re(T::zero()); n + 1],
        InitialState::SteadyState => std::iter::once(steady.alpha).chain(steady.betas.iter().copied()).collect(),
        InitialState::Custom(v) if v.len() == n + 1 => v.clone(),
        InitialState::Custom(v) => return Err(OmitError::invalid("initial", format!("expected {} values, got {}", n + 1, v.len()))),
    };
    let scale_a = steady.alpha.norm().max(eps_p / kappa);
    let limit_a = T::lit(1e6) * scale_a;
    let atol = opts.rtol * scale_a.max(T::min_positive_value()) * T::lit(1e-3);
    let tab = Tableau::new();
    let mut stepper = Stepper::new(rhs, &tab, Control { rtol: opts.rtol, atol }, y0, T::zero(), step);

    let count = (t_final / step).floor().to_usize().unwrap_or(0) + 1;
    let mut trace = TimeTrace {
        times: Vec::new(),
        a_of_t: Vec::new(),
        b_of_t: vec![Vec::new(); n],
        step,
        method: "dormand-prince-5(4)",
        accepted_steps: 0,
        rejected_steps: 0,
    };
    for k in 0..count {
        let t = T::of_usize(k) * step;
        stepper.advance_to(t);
        let y = &stepper.y;
        let finite = y.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || (scale_a > T::zero() && y[0].norm() > limit_a) {
            return Err(OmitError::Instability { time: t.to_f64_lossy() });
        }
        if t >= opts.record_from {
            trace.times.push(t);
            trace.a_of_t.push(y[0]);
            for l in 0..n {
                trace.b_of_t[l].push(y[1 + l]);
            }
        }
    }
    trace.accepted_steps = stepper.accepted;
    trace.rejected_steps = stepper.rejected;
    Ok(trace)
}

/// Tone amplitudes of `δa(t) = a(t) − ā` at `e^{∓iΩt}` and `e^{∓2iΩt}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DemodResult<T> {
    pub mean: Cx<T>,
    pub a1_minus: Cx<T>,
    pub a1_plus: Cx<T>,
    pub a2_minus: Cx<T>,
    pub a2_plus: Cx<T>,
    /// Power of `δa` left unexplained by the four tones, relative to the power of `δa`.
    pub residual: T,
    pub periods: usize,
}

impl<T: Real> DemodResult<T> {
    pub fn reliable(&self) -> bool {
        self.residual < T::lit(0.05)
    }
}

/// Least-squares projection of the cavity field onto DC and the four sideband tones,
/// over the longest whole number of probe periods after `settle_time`.
pub fn demodulate<T: Real>(trace: &TimeTrace<T>, omega: T, settle_time: T) -> Result<DemodResult<T>> {
    if !(omega > T::zero()) {
        return Err(OmitError::invalid("omega", "demodulation needs a positive probe detuning"));
    }
    let start = trace.times.iter().position(|&t| t >= settle_time).ok_or_else(|| OmitError::invalid("settle_time", "beyond the end of the trace"))?;
    let period = T::TAU() / omega;
    let t0 = trace.times[start];
    let span = trace.final_time() - t0;
    let periods = (span / period * (T::one() + T::lit(1e-9))).floor().to_usize().unwrap_or(0);
    if periods < MIN_PERIODS {
        return Err(OmitError::invalid("window", format!("{periods} probe periods after settling; need at least {MIN_PERIODS}")));
    }
    let t_end = t0 + T::of_usize(periods) * period;
    let tol = trace.step * T::lit(1e-6);
    let stop = trace.times.iter().rposition(|&t| t < t_end - tol).map_or(start, |p| p + 1);
    let times = &trace.times[start..stop];
    let samples = &trace.a_of_t[start..stop];

    let freqs = [T::zero(), -omega, omega, -T::lit(2.0) * omega, T::lit(2.0) * omega];
    let basis = |t: T| freqs.map(|f| expi(f * t));
    let mut gram = CMatrix::zeros(5, 5);
    let mut proj = vec![re(T::zero()); 5];
    for (&t, &y) in times.iter().zip(samples) {
        let phi = basis(t);
        for r in 0..5 {
            let pr = phi[r].conj();
            proj[r] += pr * y;
            for c in 0..5 {
                gram[(r, c)] += pr * phi[c];
            }
        }
    }
    let coef = gram.solve(&proj)?;
    let mean = coef[0];
    let (mut total, mut left) = (T::zero(), T::zero());
    for (&t, &y) in times.iter().zip(samples) {
        let phi = basis(t);
        let fit: Cx<T> = (1..5).fold(re(T::zero()), |s, k| s + coef[k] * phi[k]);
        total += (y - mean).norm_sqr();
        left += (y - mean - fit).norm_sqr();
    }
    let residual = if total > T::zero() { left / total } else { T::zero() };
    Ok(DemodResult { mean, a1_minus: coef[1], a1_plus: coef[2], a2_minus: coef[3], a2_plus: coef[4], residual, periods })
}

/// Default settling time, twenty of the slowest bare decay times.
pub fn default_settle_time<T: Real>(config: &SystemConfig<T>) -> T {
    let slowest = config.modes.iter().fold(config.kappa(), |m, x| m.min(x.gamma));
    T::lit(20.0) / slowest
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions<T> {
    pub settle_time: Option<T>,
    pub periods: usize,
    pub rtol: T,
}

impl<T: Real> Default for CheckOptions<T> {
    fn default() -> Self {
        CheckOptions { settle_time: None, periods: 100, rtol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)) }
    }
}

/// Frequency-domain versus time-domain amplitudes at one probe detuning.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison<T> {
    pub omega: T,
    pub a1_minus_freq: Cx<T>,
    pub a2_minus_freq: Option<Cx<T>>,
    pub demod: DemodResult<T>,
    pub err_a1: T,
    pub err_a2: Option<T>,
}

/// Output step that resolves the dynamics and divides a probe period evenly.
pub fn commensurate_step<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, omega: T) -> T {
    let period = T::TAU() / omega;
    let limit = max_step(config, steady.delta_c, omega);
    let per = (period / limit).ceil();
    period / per
}

/// Integrates and demodulates at each detuning (in parallel) and compares with the sideband solver.
pub fn oracle_check<T: Real>(config: &SystemConfig<T>, omegas: &[T], opts: &CheckOptions<T>) -> Result<Vec<OracleComparison<T>>> {
    let steady = solve_steady_state(config)?;
    let settle = opts.settle_time.unwrap_or_else(|| default_settle_time(config));
    omegas
        .par_iter()
        .map(|&omega| {
            let first = solve_first_order_linear(config, &steady, omega)?;
            let second = if config.n_modes() <= 2 { Some(solve_second_order(config, &steady, &first, omega)?) } else { None };
            let step = commensurate_step(config, &steady, omega);
            let t_final = settle + T::of_usize(opts.periods) * T::TAU() / omega + step;
            let io = IntegrationOptions { rtol: opts.rtol, initial: InitialState::SteadyState, record_from: settle - step };
            let trace = integrate_mean_field(config, omega, t_final, step, &io)?;
            let demod = demodulate(&trace, omega, settle)?;
            let a2 = second.map(|s| s.block.a_minus);
            Ok(OracleComparison {
                omega,
                a1_minus_freq: first.a_minus,
                a2_minus_freq: a2,
                err_a1: rel_diff(demod.a1_minus, first.a_minus),
                err_a2: a2.map(|a| rel_diff(demod.a2_minus, a)),
                demod,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavityParams, Detuning, DriveSpec, MechanicalMode};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn toy(eps: f64, ratio: f64) -> SystemConfig<f64> {
        SystemConfig::new(
            CavityParams { kappa: 1.0, detuning: Detuning::Bare(10.0), wavelength: None, cavity_length: None },
            vec![MechanicalMode::new(10.0, 0.5, 0.01)],
            vec![],
            DriveSpec::from_amplitude(eps, 1.0, 1.0, ratio),
        )
        .unwrap()
    }

    #[test]
    fn synthetic_tones_recovered() {
        let w = 3.0;
        let step = std::f64::consts::TAU / w / 40.0;
        let times: Vec<f64> = (0..4000).map(|k| k as f64 * step).collect();
        let c1 = Complex64::new(0.3, -0.2);
        let c2 = Complex64::new(-0.05, 0.01);
        let a: Vec<Complex64> = times.iter().map(|&t| Complex64::new(2.0, 1.0) + c1 * expi(-w * t) + c2 * expi(2.0 * w * t)).collect();
        let trace = TimeTrace { times, a_of_t: a, b_of_t: vec![], step, method: "synthetic", accepted_steps: 0, rejected_steps: 0 };
        let d = demodulate(&trace, w, 0.0).unwrap();
        assert!((d.a1_minus - c1).norm() < 1e-10);
        assert!((d.a2_plus - c2).norm() < 1e-10);
        assert!(d.a1_plus.norm() < 1e-10 && d.a2_minus.norm() < 1e-10);
        assert!(d.residual < 1e-20);
        assert!(demodulate(&trace, w, trace.final_time() - 10.0 * std::f64::consts::TAU / w).is_err());
    }

    #[test]
    fn undriven_stays_at_rest() {
        let cfg = toy(0.0, 0.0);
        let opts = IntegrationOptions { initial: InitialState::Zero, ..Default::default() };
        let tr = integrate_mean_field(&cfg, 1.0, 5.0, 0.01, &opts).unwrap();
        assert!(tr.a_of_t.iter().chain(&tr.b_of_t[0]).all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn settles_to_fixed_point() {
        let cfg = toy(3.0, 0.0);
        let s = solve_steady_state(&cfg).unwrap();
        let opts = IntegrationOptions { initial: InitialState::Zero, ..Default::default() };
        let tr = integrate_mean_field(&cfg, 1.0, 40.0, 0.01, &opts).unwrap();
        let a = *tr.a_of_t.last().unwrap();
        assert!(rel_diff(a, s.alpha) < 1e-6);
        assert!(rel_diff(*tr.b_of_t[0].last().unwrap(), s.betas[0]) < 1e-6);
    }

    #[test]
    fn free_decay_rate() {
        let cfg = toy(0.0, 0.0);
        let init = vec![Complex64::new(1.0, 0.5), Complex64::new(0.2, 0.0)];
        let opts = IntegrationOptions { initial: InitialState::Custom(init), ..Default::default() };
        let tr = integrate_mean_field(&cfg, 1.0, 3.0, 0.01, &opts).unwrap();
        let k = tr.times.len() - 1;
        let rate = -(tr.a_of_t[k].norm_sqr() / tr.a_of_t[0].norm_sqr()).ln() / tr.times[k];
        assert_relative_eq!(rate, 2.0, max_relative = 1e-2);
    }

    #[test]
    fn coarse_step_rejected() {
        let cfg = toy(1.0, 0.0);
        assert!(matches!(
            integrate_mean_field(&cfg, 1.0, 1.0, 0.1, &IntegrationOptions::default()),
            Err(OmitError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn toy_closure() {
        let cfg = toy(3.0, 0.01);
        let res = oracle_check(&cfg, &[9.5, 10.0, 10.5], &CheckOptions { settle_time: Some(60.0), ..Default::default() }).unwrap();
        for r in res {
            assert!(r.err_a1 < 1e-3, "{:?}", r);
            assert!(r.demod.reliable());
        }
    }
}
