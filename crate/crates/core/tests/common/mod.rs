//! Shared configuration builders for the integration tests.
#![allow(dead_code)]

use omit_core::model::{CavityParams, Detuning, DriveSpec, MechanicalMode, PhononCoupling, ProbeSpec, SystemConfig};
use omit_core::presets::{lab_g, lab_kappa, lab_omega_m, WAVELENGTH_M};
use omit_core::units::optical_angular_frequency;
use proptest::prelude::*;

/// A two-mode system drawn around the laboratory parameters, plus a probe detuning.
#[derive(Clone, Debug)]
pub struct Draw {
    pub config: SystemConfig<f64>,
    pub omega: f64,
}

/// Strategy over non-degenerate two-mode systems in the resolved-sideband regime.
pub fn two_mode_draw() -> impl Strategy<Value = Draw> {
    (
        (0.9..1.1f64, 0.9..1.1f64, 1e3..1e4f64, 1e3..1e4f64),
        (0.5..1.5f64, 0.0..1.5f64, 0.5..2.0f64),
        (0.0..0.2f64, 0.0..std::f64::consts::TAU),
        (0.1e-3..3e-3f64, 0.8..1.2f64, 0.8..1.2f64),
    )
        .prop_map(|((w1, w2, q1, q2), (g1, g2, k), (eta, theta), (power, delta, omega))| {
            let wm = lab_omega_m::<f64>();
            let g = lab_g::<f64>();
            let mode = |w: f64, q: f64, gs: f64| MechanicalMode::with_quality_factor(w * wm, q, gs * g).unwrap();
            let config = SystemConfig::new(
                CavityParams { kappa: k * lab_kappa::<f64>(), detuning: Detuning::Effective(delta * wm), wavelength: None, cavity_length: None },
                vec![mode(w1, q1, g1), mode(w2, q2, g2)],
                vec![PhononCoupling::new(eta * wm, theta).unwrap()],
                DriveSpec {
                    power_pump: power,
                    probe: ProbeSpec::Ratio(0.05),
                    omega_pump: optical_angular_frequency(WAVELENGTH_M),
                },
            )
            .unwrap();
            Draw { config, omega: omega * wm }
        })
}

/// Largest relative residual of the mean-field equations at a computed steady state.
pub fn steady_residual(cfg: &SystemConfig<f64>, s: &omit_core::SteadyState64) -> f64 {
    type Complex64 = omit_core::Cx<f64>;
    let eps = cfg.pump_amplitude().unwrap();
    let shift: f64 = cfg.modes.iter().zip(&s.betas).map(|(m, b)| m.g * 2.0 * b.re).sum();
    // (κ + iΔ_c) α + i α Σ g_l 2Re β_l = ε
    let cavity = (Complex64::new(cfg.kappa(), s.delta_c) * s.alpha + Complex64::i() * s.alpha * shift - eps).norm() / eps;
    let mb = omit_core::steady::mechanical_matrix(cfg).matvec(&s.betas);
    let n = s.alpha.norm_sqr();
    let mech = cfg
        .modes
        .iter()
        .zip(&mb)
        .map(|(m, v)| (v + Complex64::i() * m.g * n).norm() / (m.g * n).abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    cavity.max(mech)
}
