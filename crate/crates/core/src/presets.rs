//! Laboratory parameter set used by the figure presets: λ = 1064 nm,
//! L = 25 mm, κ = 2π·215 kHz, ω_m = 2π·947 kHz, m = 145 ng, Q = 6700,
//! ε_p = 0.05 ε_L, effective detuning Δ = ω_m.

use crate::model::{
    derive_single_photon_coupling, CavityParams, Detuning, DriveSpec, MechanicalMode, PhononCoupling, ProbeSpec,
    SystemConfig,
};
use crate::scalar::Real;
use crate::units::{hz_to_angular, optical_angular_frequency};

pub const WAVELENGTH_M: f64 = 1064e-9;
pub const CAVITY_LENGTH_M: f64 = 25e-3;
pub const KAPPA_HZ: f64 = 215e3;
pub const OMEGA_M_HZ: f64 = 947e3;
pub const MASS_KG: f64 = 145e-12;
pub const Q_FACTOR: f64 = 6700.0;
pub const PROBE_RATIO: f64 = 0.05;
pub const PUMP_POWER_W: f64 = 1.5e-3;

pub fn lab_omega_m<T: Real>() -> T {
    hz_to_angular(T::lit(OMEGA_M_HZ))
}

pub fn lab_kappa<T: Real>() -> T {
    hz_to_angular(T::lit(KAPPA_HZ))
}

/// Single-photon coupling derived from the mirror mass and cavity geometry.
pub fn lab_g<T: Real>() -> T {
    derive_single_photon_coupling(T::lit(WAVELENGTH_M), T::lit(CAVITY_LENGTH_M), T::lit(MASS_KG), lab_omega_m())
        .expect("preset parameters are valid")
}

fn lab_mode<T: Real>() -> MechanicalMode<T> {
    let w = lab_omega_m::<T>();
    let mut m = MechanicalMode::with_quality_factor(w, T::lit(Q_FACTOR), lab_g()).expect("valid Q");
    m.mass = Some(T::lit(MASS_KG));
    m
}

/// `n` identical modes; link 1 carries `(η, θ₁)` and links 2.. carry `(η, 0)`.
/// `theta1_pi` is θ₁ in units of π.
pub fn lab_n_mode<T: Real>(n: usize, power_w: f64, eta_over_omega_m: f64, theta1_pi: f64) -> SystemConfig<T> {
    assert!(n >= 1, "at least one mechanical mode");
    let w = lab_omega_m::<T>();
    let eta = T::lit(eta_over_omega_m) * w;
    let couplings = (0..n.saturating_sub(1))
        .map(|j| PhononCoupling::with_theta_pi_units(eta, if j == 0 { T::lit(theta1_pi) } else { T::zero() }).expect("valid link"))
        .collect();
    let lambda = T::lit(WAVELENGTH_M);
    SystemConfig::new(
        CavityParams {
            kappa: lab_kappa(),
            detuning: Detuning::Effective(w),
            wavelength: Some(lambda),
            cavity_length: Some(T::lit(CAVITY_LENGTH_M)),
        },
        vec![lab_mode(); n],
        couplings,
        DriveSpec {
            power_pump: T::lit(power_w),
            probe: ProbeSpec::Ratio(T::lit(PROBE_RATIO)),
            omega_pump: optical_angular_frequency(lambda),
        },
    )
    .expect("preset parameters are valid")
}

/// Two degenerate modes with link `(η, θ)`.
pub fn lab_two_mode<T: Real>(power_w: f64, eta_over_omega_m: f64, theta_pi: f64) -> SystemConfig<T> {
    lab_n_mode(2, power_w, eta_over_omega_m, theta_pi)
}

/// Standard single-mode system.
pub fn lab_single_mode<T: Real>(power_w: f64) -> SystemConfig<T> {
    lab_n_mode(1, power_w, 0.0, 0.0)
}
