//! Semiclassical steady state of the pumped cavity and mechanical chain.
//!
//! For a fixed effective detuning Δ the mean fields follow in closed form:
//! `α = ε_L/(κ + iΔ)` and the β vector solves a linear chain system driven by
//! `|α|²`. Because β is linear in `|α|²`, the radiation-pressure shift is
//! `s·|α|²` with a constant `s`, and only the real scalar Δ has to be iterated.

use crate::error::{OmitError, Result};
use crate::linalg::CMatrix;
use crate::model::{Detuning, SystemConfig};
use crate::scalar::{cx, expi, im_unit, re, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyOptions<T> {
    pub damping: T,
    pub tolerance: T,
    pub max_iters: usize,
    /// Relative separation beyond which two fixed points count as distinct.
    pub multistable_threshold: T,
}

impl<T: Real> Default for SteadyOptions<T> {
    fn default() -> Self {
        SteadyOptions {
            damping: T::lit(0.5),
            tolerance: T::default_tolerance(),
            max_iters: 10_000,
            multistable_threshold: T::lit(1e-6),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState<T> {
    /// Cavity mean field α.
    pub alpha: Cx<T>,
    /// Mechanical mean fields β_l.
    pub betas: Vec<Cx<T>>,
    /// Effective detuning Δ = Δ_c + Σ g_l (β_l + β_l*), rad/s.
    pub delta_eff: T,
    /// Bare detuning Δ_c consistent with `delta_eff`, rad/s.
    pub delta_c: T,
    pub converged: bool,
    pub iterations: usize,
    pub residual: T,
    /// More than one fixed point exists for this drive.
    pub multistable: bool,
}

impl<T: Real> SteadyState<T> {
    pub fn photon_number(&self) -> T {
        self.alpha.norm_sqr()
    }

    /// Linearized couplings `G_l = g_l |α|`.
    pub fn linearized_couplings(&self, config: &SystemConfig<T>) -> Vec<T> {
        let a = self.alpha.norm();
        config.modes.iter().map(|m| m.g * a).collect()
    }
}

/// Chain matrix `M` with `M β = −i g |α|²` for the mechanical mean fields.
pub fn mechanical_matrix<T: Real>(config: &SystemConfig<T>) -> CMatrix<T> {
    let n = config.n_modes();
    let i = im_unit::<T>();
    let mut m = CMatrix::zeros(n, n);
    for (l, mode) in config.modes.iter().enumerate() {
        m[(l, l)] = cx(mode.gamma, mode.omega);
        if let Some(link) = config.chain_link(l) {
            m[(l, l + 1)] = i * expi(link.theta()) * link.eta();
            m[(l + 1, l)] = i * expi(-link.theta()) * link.eta();
        }
    }
    m
}

/// β per unit intracavity photon number.
fn beta_per_photon<T: Real>(config: &SystemConfig<T>) -> Result<Vec<Cx<T>>> {
    let rhs: Vec<Cx<T>> = config.modes.iter().map(|m| -im_unit::<T>() * m.g).collect();
    mechanical_matrix(config)
        .solve(&rhs)
        .map_err(|e| OmitError::NumericalSingularity(format!("mechanical steady-state system: {e}")))
}

struct Fixed<T> {
    epsilon: T,
    kappa: T,
    delta_c: T,
    shift_per_photon: T,
}

impl<T: Real> Fixed<T> {
    fn photons(&self, delta: T) -> T {
        self.epsilon * self.epsilon / (self.kappa * self.kappa + delta * delta)
    }

    fn map(&self, delta: T) -> T {
        self.delta_c + self.shift_per_photon * self.photons(delta)
    }

    fn residual(&self, delta: T) -> T {
        (self.map(delta) - delta).abs() / delta.abs().max(self.kappa)
    }

    /// Damped iteration `Δ ← (1-λ)Δ + λ F(Δ)`. Returns (Δ, iterations, best residual, converged).
    fn iterate(&self, start: T, opts: &SteadyOptions<T>) -> (T, usize, T, bool) {
        let mut delta = start;
        let mut best = (delta, self.residual(delta));
        for it in 0..=opts.max_iters {
            let r = self.residual(delta);
            if r < best.1 {
                best = (delta, r);
            }
            if r < opts.tolerance {
                return (delta, it, r, true);
            }
            if !r.is_finite() {
                break;
            }
            delta = (T::one() - opts.damping) * delta + opts.damping * self.map(delta);
        }
        (best.0, opts.max_iters, best.1, false)
    }

    /// Real roots of `(Δ-Δ_c)(κ²+Δ²) = s ε²` expressed in units of κ; true when there are three.
    fn has_three_roots(&self) -> bool {
        let b = -self.delta_c / self.kappa;
        let d = -(self.delta_c / self.kappa + self.shift_per_photon * self.epsilon * self.epsilon / self.kappa.powi(3));
        // discriminant of x³ + b x² + x + d
        let disc = T::lit(18.0) * b * d - T::lit(4.0) * b.powi(3) * d + b * b - T::lit(4.0) - T::lit(27.0) * d * d;
        disc > T::zero()
    }
}

pub fn solve_steady_state<T: Real>(config: &SystemConfig<T>) -> Result<SteadyState<T>> {
    solve_steady_state_with(config, &SteadyOptions::default())
}

pub fn solve_steady_state_with<T: Real>(config: &SystemConfig<T>, opts: &SteadyOptions<T>) -> Result<SteadyState<T>> {
    config.validate()?;
    let epsilon = config.pump_amplitude()?;
    let kappa = config.kappa();
    let beta_hat = beta_per_photon(config)?;
    let shift = config
        .modes
        .iter()
        .zip(&beta_hat)
        .fold(re::<T>(T::zero()), |acc, (m, b)| acc + (*b + b.conj()) * m.g);
    debug_assert!(shift.im.abs() <= T::lit(1e-12) * shift.re.abs() + T::lit(1e-30));
    let shift_per_photon = shift.re;

    let assemble = |delta: T, delta_c: T, iterations: usize, residual: T, converged: bool, multistable: bool| {
        let alpha = re(epsilon) / cx(kappa, delta);
        let n = alpha.norm_sqr();
        SteadyState {
            alpha,
            betas: beta_hat.iter().map(|b| *b * n).collect(),
            delta_eff: delta,
            delta_c,
            converged,
            iterations,
            residual,
            multistable,
        }
    };

    match config.cavity.detuning {
        Detuning::Effective(delta) => {
            let n = epsilon * epsilon / (kappa * kappa + delta * delta);
            let delta_c = delta - shift_per_photon * n;
            let fixed = Fixed { epsilon, kappa, delta_c, shift_per_photon };
            Ok(assemble(delta, delta_c, 0, fixed.residual(delta), true, fixed.has_three_roots()))
        }
        Detuning::Bare(delta_c) => {
            let fixed = Fixed { epsilon, kappa, delta_c, shift_per_photon };
            // α = 0 start, then the decoupled-α start.
            let (d0, it0, r0, ok0) = fixed.iterate(delta_c, opts);
            if !ok0 {
                return Err(OmitError::NonConvergent { iterations: it0, residual: r0.to_f64_lossy() });
            }
            let (d1, _, _, ok1) = fixed.iterate(fixed.map(delta_c), opts);
            let scale = d0.abs().max(kappa);
            let multistable = fixed.has_three_roots()
                || (ok1 && (d1 - d0).abs() > opts.multistable_threshold * scale);
            Ok(assemble(d0, delta_c, it0, r0, true, multistable))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavityParams, DriveSpec, MechanicalMode, PhononCoupling};
    use crate::presets;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn residuals(cfg: &SystemConfig<f64>, s: &SteadyState<f64>) -> (f64, f64, f64) {
        let eps = cfg.pump_amplitude().unwrap();
        let ra = if eps > 0.0 { (s.alpha * Complex64::new(cfg.kappa(), s.delta_eff) - eps).norm() / eps } else { s.alpha.norm() };
        let m = mechanical_matrix(cfg);
        let mb = m.matvec(&s.betas);
        let n = s.alpha.norm_sqr();
        let rb = cfg
            .modes
            .iter()
            .zip(&mb)
            .map(|(mode, v)| {
                let target = Complex64::new(0.0, -mode.g * n);
                (v - target).norm() / target.norm().max(1e-300)
            })
            .fold(0.0, f64::max);
        let shift: f64 = cfg.modes.iter().zip(&s.betas).map(|(m, b)| m.g * 2.0 * b.re).sum();
        let rd = (s.delta_eff - s.delta_c - shift).abs() / s.delta_eff.abs().max(cfg.kappa());
        (ra, rb, rd)
    }

    #[test]
    fn undriven_system_is_empty() {
        let cfg = presets::lab_two_mode(0.0, 0.0, 0.0).with_detuning(Detuning::Bare(3.0e6));
        let s = solve_steady_state(&cfg).unwrap();
        assert_eq!(s.alpha, Complex64::new(0.0, 0.0));
        assert!(s.betas.iter().all(|b| b.norm() == 0.0));
        assert_eq!(s.delta_eff, 3.0e6);
    }

    #[test]
    fn decoupled_mechanics_leave_bare_cavity() {
        let mut cfg = presets::lab_two_mode(1.5e-3, 0.0, 0.0).with_detuning(Detuning::Bare(5.0e6));
        for m in &mut cfg.modes {
            m.g = 0.0;
        }
        let s = solve_steady_state(&cfg).unwrap();
        let eps = cfg.pump_amplitude().unwrap();
        assert_relative_eq!(s.alpha.re, (eps / Complex64::new(cfg.kappa(), 5.0e6)).re, max_relative = 1e-15);
        assert!(s.betas.iter().all(|b| b.norm() == 0.0));
        assert_eq!(s.delta_eff, 5.0e6);
    }

    #[test]
    fn bare_detuning_fixed_point_residuals() {
        let w = presets::lab_omega_m();
        let cfg = presets::lab_two_mode(1.5e-3, 0.05, 0.5).with_detuning(Detuning::Bare(w));
        let s = solve_steady_state(&cfg).unwrap();
        assert!(s.converged && !s.multistable);
        let (ra, rb, rd) = residuals(&cfg, &s);
        assert!(ra < 1e-12 && rb < 1e-12 && rd < 1e-12, "{ra:e} {rb:e} {rd:e}");
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn effective_detuning_inverse_matches_iteration() {
        let w = presets::lab_omega_m::<f64>();
        let cfg = presets::lab_two_mode::<f64>(2.0e-3, 0.05, 1.0);
        let s_eff = solve_steady_state(&cfg).unwrap();
        assert_relative_eq!(s_eff.delta_eff, w, max_relative = 1e-15);
        let s_bare = solve_steady_state(&cfg.clone().with_detuning(Detuning::Bare(s_eff.delta_c))).unwrap();
        assert_relative_eq!(s_bare.delta_eff, w, max_relative = 1e-11);
        assert_relative_eq!(s_bare.alpha.re, s_eff.alpha.re, max_relative = 1e-10);
    }

    #[test]
    fn decoupled_chain_gauge() {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.0, 0.0);
        let s = solve_steady_state(&cfg).unwrap();
        let n = s.photon_number();
        for (m, b) in cfg.modes.iter().zip(&s.betas) {
            let expect = Complex64::new(0.0, -m.g * n) / Complex64::new(m.gamma, m.omega);
            assert_relative_eq!(b.re, expect.re, max_relative = 1e-14);
            assert_relative_eq!(b.im, expect.im, max_relative = 1e-14);
        }
    }

    #[test]
    fn theta_period_is_exact_for_dyadic_phases() {
        let w = presets::lab_omega_m();
        let base = presets::lab_two_mode(1.5e-3, 0.05, 0.0).with_detuning(Detuning::Bare(w));
        let mut a = base.clone();
        a.couplings[0] = PhononCoupling::with_theta_pi_units(0.05 * w, 0.75).unwrap();
        let mut b = base;
        b.couplings[0] = PhononCoupling::with_theta_pi_units(0.05 * w, 2.75).unwrap();
        assert_eq!(solve_steady_state(&a).unwrap(), solve_steady_state(&b).unwrap());
    }

    #[test]
    fn strong_red_drive_flags_bistability() {
        // (Δ-20)(1+Δ²) = -0.2·44.8² has three real roots.
        let cfg = SystemConfig::new(
            CavityParams { kappa: 1.0, detuning: Detuning::Bare(20.0), wavelength: None, cavity_length: None },
            vec![MechanicalMode::new(10.0, 0.1, 1.0)],
            vec![],
            DriveSpec::from_amplitude(44.8, 1.0, 1.0, 0.0),
        )
        .unwrap();
        match solve_steady_state(&cfg) {
            Ok(s) => assert!(s.multistable),
            Err(OmitError::NonConvergent { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn f32_agrees_with_f64() {
        let c64 = presets::lab_two_mode(1.5e-3, 0.05, 1.0);
        let c32 = presets::lab_two_mode::<f32>(1.5e-3, 0.05, 1.0);
        let a = solve_steady_state(&c64).unwrap();
        let b = solve_steady_state(&c32).unwrap();
        assert_relative_eq!(b.alpha.norm() as f64, a.alpha.norm(), max_relative = 1e-5);
    }
}
