//! Bright/dark hybridization, phase-dressed modes and adiabatic elimination.

mod linewidth;

pub use linewidth::{count_windows, fit_linewidth, fit_spectrum, LinewidthFit, DEFAULT_PROMINENCE};

use crate::error::{OmitError, Result};
use crate::model::SystemConfig;
use crate::scalar::{cx, expi, re, Cx, Real};
use crate::steady::SteadyState;

/// Two-mode hybridization quantities, all frequencies in rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridModeReport<T> {
    /// Bright-mode frequency ω₊.
    pub omega_plus: T,
    /// Dark-mode frequency ω₋.
    pub omega_minus: T,
    /// Bright–dark coupling ζ.
    pub zeta: T,
    /// Bright-mode coupling G₊ = √(G₁² + G₂²).
    pub g_plus: T,
    pub f: T,
    pub h: T,
    pub g_tilde_plus: Cx<T>,
    pub g_tilde_minus: Cx<T>,
    pub omega_tilde_plus: T,
    pub omega_tilde_minus: T,
    /// For identical modes with η > 0: largest deviation of `G̃±` from
    /// `√2 G (1 ± e^{∓iθ})/2`, relative to G.
    pub symmetric_check: Option<T>,
}

fn require_two<T: Real>(config: &SystemConfig<T>) -> Result<()> {
    match config.n_modes() {
        2 => Ok(()),
        n => Err(OmitError::UnsupportedTopology(format!("two-mode hybridization needs exactly 2 modes, got {n}"))),
    }
}

/// Hybridization of two mechanical modes coupled to one cavity.
pub fn hybridize_two_mode<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>) -> Result<HybridModeReport<T>> {
    require_two(config)?;
    let g = steady.linearized_couplings(config);
    let (g1, g2) = (g[0], g[1]);
    let (w1, w2) = (config.modes[0].omega, config.modes[1].omega);
    let link = config.chain_link(0).copied().unwrap_or_else(crate::model::PhononCoupling::uncoupled);
    let (eta, theta) = (link.eta(), link.theta());
    let two = T::lit(2.0);
    let weight = g1 * g1 + g2 * g2;

    let (omega_plus, omega_minus, zeta) = if weight > T::zero() {
        (
            (g1 * g1 * w1 + g2 * g2 * w2) / weight,
            (g2 * g2 * w1 + g1 * g1 * w2) / weight,
            g1 * g2 * (w1 - w2) / weight,
        )
    } else {
        (w1, w2, T::zero())
    };

    let split = ((w1 - w2).powi(2) + T::lit(4.0) * eta * eta).sqrt();
    let omega_tilde_plus = (w1 + w2 + split) / two;
    let omega_tilde_minus = (w1 + w2 - split) / two;
    let (f, h) = if eta == T::zero() {
        (T::one(), T::zero())
    } else {
        let d = omega_tilde_minus - w1;
        let f = d.abs() / (d * d + eta * eta).sqrt();
        (f, eta * f / d)
    };
    let e = expi(theta);
    let g_tilde_plus = re(f * g1) - e.conj() * (h * g2);
    let g_tilde_minus = e * (h * g1) + f * g2;

    let same = |a: T, b: T| (a - b).abs() <= T::default_tolerance() * a.abs().max(b.abs());
    let symmetric_check = (same(w1, w2) && same(g1, g2) && eta > T::zero() && g1 > T::zero()).then(|| {
        let s = two.sqrt() * g1 / two;
        let p = (re(T::one()) + e.conj()) * s;
        let m = (re(T::one()) - e) * s;
        (g_tilde_plus - p).norm().max((g_tilde_minus - m).norm()) / g1
    });
    if let Some(d) = symmetric_check {
        if d > T::lit(1e-10) {
            log::warn!("phase-dressed couplings deviate from the symmetric closed form by {d:e}");
        }
    }

    Ok(HybridModeReport {
        omega_plus,
        omega_minus,
        zeta,
        g_plus: weight.sqrt(),
        f,
        h,
        g_tilde_plus,
        g_tilde_minus,
        omega_tilde_plus,
        omega_tilde_minus,
        symmetric_check,
    })
}

/// Whether both phase-dressed modes couple to the cavity; returns the weaker coupling magnitude.
pub fn dark_mode_broken<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, tolerance: T) -> Result<(bool, T)> {
    let r = hybridize_two_mode(config, steady)?;
    let weakest = r.g_tilde_plus.norm().min(r.g_tilde_minus.norm());
    Ok((weakest > tolerance * r.g_plus, weakest))
}

/// Cavity-eliminated mechanical parameters, rad/s.
#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticParams<T> {
    /// Cavity-mediated mode–mode couplings; present for two modes.
    pub xi1: Option<Cx<T>>,
    pub xi2: Option<Cx<T>>,
    pub gamma_opt: Vec<T>,
    pub omega_opt: Vec<T>,
    /// Bright-mode damping γ₁ + Σ γ_{l,opt} (γ_m + Nγ_opt for identical modes).
    pub gamma_eff: T,
    /// Bright-mode frequency ω₁ − Σ ω_{l,opt}.
    pub omega_eff: T,
}

/// `(γ_opt, ω_opt)` for one mode with linearized coupling `g`.
pub fn optical_spring<T: Real>(g: T, kappa: T, delta: T, omega: T) -> (T, T) {
    let k2 = kappa * kappa;
    let lo = k2 + (delta - omega).powi(2);
    let hi = k2 + (delta + omega).powi(2);
    let g2 = g * g;
    (g2 * kappa / lo - g2 * kappa / hi, g2 * (delta + omega) / hi + g2 * (delta - omega) / lo)
}

fn xi<T: Real>(g1: T, g2: T, kappa: T, delta: T, omega: T) -> Cx<T> {
    let gg = g1 * g2;
    let k2 = kappa * kappa;
    cx(kappa, delta + omega) * gg / (k2 + (delta + omega).powi(2)) - cx(kappa, -(delta - omega)) * gg / (k2 + (delta - omega).powi(2))
}

/// Eliminates the cavity field; valid for uncoupled mechanical modes only.
pub fn adiabatic_elimination<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>) -> Result<AdiabaticParams<T>> {
    if !config.all_eta_zero() {
        return Err(OmitError::RegimeViolation("adiabatic elimination assumes no phonon exchange (η = 0)".into()));
    }
    let kappa = config.kappa();
    let delta = steady.delta_eff;
    let gs = steady.linearized_couplings(config);
    let three = T::lit(3.0);
    for (m, &g) in config.modes.iter().zip(&gs) {
        if !(m.omega > three * kappa && kappa > three * g && g > three * m.gamma) {
            log::warn!("adiabatic elimination used outside ω ≫ κ ≫ G ≫ γ (ω={}, κ={kappa}, G={g}, γ={})", m.omega, m.gamma);
            break;
        }
    }
    let (gamma_opt, omega_opt): (Vec<T>, Vec<T>) =
        config.modes.iter().zip(&gs).map(|(m, &g)| optical_spring(g, kappa, delta, m.omega)).unzip();
    let (xi1, xi2) = if config.n_modes() == 2 {
        let (w1, w2) = (config.modes[0].omega, config.modes[1].omega);
        (Some(xi(gs[0], gs[1], kappa, delta, w2)), Some(xi(gs[0], gs[1], kappa, delta, w1)))
    } else {
        (None, None)
    };
    let m0 = &config.modes[0];
    let gamma_eff = gamma_opt.iter().fold(m0.gamma, |a, &b| a + b);
    let omega_eff = omega_opt.iter().fold(m0.omega, |a, &b| a - b);
    Ok(AdiabaticParams { xi1, xi2, gamma_opt, omega_opt, gamma_eff, omega_eff })
}

/// Predicted OMIT linewidth `γ_m + N γ_opt` for `n` identical, uncoupled modes.
///
/// Only the first mode of `config` is used; all its modes must be identical.
pub fn predict_linewidth<T: Real>(config: &SystemConfig<T>, steady: &SteadyState<T>, n: usize) -> Result<T> {
    if !config.is_uniform() {
        return Err(OmitError::UnsupportedTopology("linewidth prediction needs identical mechanical modes".into()));
    }
    if !config.all_eta_zero() {
        return Err(OmitError::RegimeViolation("linewidth prediction assumes no phonon exchange (η = 0)".into()));
    }
    let m = &config.modes[0];
    let g = m.g * steady.alpha.norm();
    let (gamma_opt, _) = optical_spring(g, config.kappa(), steady.delta_eff, m.omega);
    Ok(m.gamma + T::of_usize(n) * gamma_opt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::steady::solve_steady_state;
    use approx::assert_relative_eq;

    fn report(eta: f64, theta: f64) -> HybridModeReport<f64> {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, eta, theta);
        let s = solve_steady_state(&cfg).unwrap();
        hybridize_two_mode(&cfg, &s).unwrap()
    }

    #[test]
    fn degenerate_decoupled_pair() {
        let r = report(0.0, 0.0);
        assert_eq!(r.zeta, 0.0);
        assert_eq!(r.symmetric_check, None);
        assert_relative_eq!(r.g_plus, 2f64.sqrt() * r.g_tilde_plus.re, max_relative = 1e-14);
    }

    #[test]
    fn phase_selects_decoupled_mode() {
        let r0 = report(0.05, 0.0);
        assert!(r0.g_tilde_minus.norm() <= 1e-14 * r0.g_plus);
        let rpi = report(0.05, 1.0);
        assert!(rpi.g_tilde_plus.norm() <= 1e-14 * rpi.g_plus);
        let rh = report(0.05, 0.5);
        let g = rh.g_plus / 2f64.sqrt();
        assert_relative_eq!(rh.g_tilde_plus.norm(), g, max_relative = 1e-12);
        assert_relative_eq!(rh.g_tilde_minus.norm(), g, max_relative = 1e-12);
        assert!(rh.symmetric_check.unwrap() < 1e-12);
    }

    #[test]
    fn weight_and_mixing_conserved() {
        for &(eta, th) in &[(0.01, 0.1), (0.2, 1.3), (0.05, 1.9)] {
            let r = report(eta, th);
            assert_relative_eq!(r.f * r.f + r.h * r.h, 1.0, epsilon = 1e-12);
            assert_relative_eq!(r.g_tilde_plus.norm_sqr() + r.g_tilde_minus.norm_sqr(), r.g_plus * r.g_plus, max_relative = 1e-12);
        }
    }

    #[test]
    fn broken_flags() {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, 0.5);
        let s = solve_steady_state(&cfg).unwrap();
        assert!(dark_mode_broken(&cfg, &s, 1e-6).unwrap().0);
        for th in [0.0, 2.0] {
            let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, th);
            assert!(!dark_mode_broken(&cfg, &s, 1e-6).unwrap().0);
        }
        let one = presets::lab_single_mode::<f64>(1.5e-3);
        assert!(matches!(hybridize_two_mode(&one, &s), Err(OmitError::UnsupportedTopology(_))));
    }

    #[test]
    fn zero_coupling_leaves_bare_mechanics() {
        let mut cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.0, 0.0);
        for m in &mut cfg.modes {
            m.g = 0.0;
        }
        let s = solve_steady_state(&cfg).unwrap();
        let p = adiabatic_elimination(&cfg, &s).unwrap();
        assert_eq!(p.gamma_eff, cfg.modes[0].gamma);
        assert_eq!(p.omega_eff, cfg.modes[0].omega);
    }

    #[test]
    fn asymptotics_of_exact_expressions() {
        let (omega, kappa, g) = (1.0, 1e-3, 1e-5);
        let (go, wo) = optical_spring(g, kappa, omega, omega);
        assert_relative_eq!(go, g * g / kappa, max_relative = 5e-3);
        assert_relative_eq!(wo, g * g / (2.0 * omega), max_relative = 5e-3);
        let x = xi(g, g, kappa, omega, omega);
        assert_relative_eq!(x.re, -g * g / kappa, max_relative = 5e-3);
        assert_relative_eq!(x.im, g * g / (2.0 * omega), max_relative = 5e-3);
    }

    #[test]
    fn elimination_refuses_phonon_exchange() {
        let cfg = presets::lab_two_mode::<f64>(1.5e-3, 0.05, 0.5);
        let s = solve_steady_state(&cfg).unwrap();
        assert!(matches!(adiabatic_elimination(&cfg, &s), Err(OmitError::RegimeViolation(_))));
        assert!(predict_linewidth(&cfg, &s, 2).is_err());
    }

    #[test]
    fn prediction_scales_with_mode_count() {
        let cfg = presets::lab_single_mode::<f64>(1.5e-3);
        let s = solve_steady_state(&cfg).unwrap();
        let g1 = predict_linewidth(&cfg, &s, 1).unwrap();
        let g4 = predict_linewidth(&cfg, &s, 4).unwrap();
        let gm = cfg.modes[0].gamma;
        assert_relative_eq!((g4 - gm) / (g1 - gm), 4.0, max_relative = 1e-12);
    }
}
