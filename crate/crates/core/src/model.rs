//! Physical configuration of a driven cavity coupled to a chain of mechanical
//! modes, plus the unit-level conversions (drive amplitude, single-photon
//! coupling) needed to build one from laboratory parameters.

use crate::error::{OmitError, Result};
use crate::scalar::Real;
use crate::units::{canonical_angle, optical_angular_frequency, HBAR};

/// Probe ratios above this value trigger a warning.
pub const PROBE_RATIO_WARN: f64 = 0.05;
/// Probe ratios above this value are rejected.
pub const PROBE_RATIO_MAX: f64 = 0.1;

/// How the cavity–pump detuning is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Detuning<T> {
    /// Bare detuning `Δ_c = ω_c − ω_L`; the effective detuning is found self-consistently.
    Bare(T),
    /// Target effective detuning `Δ` including the radiation-pressure shift; the
    /// bare detuning that produces it is solved for.
    Effective(T),
}

impl<T: Real> Detuning<T> {
    pub fn value(&self) -> T {
        match *self {
            Detuning::Bare(v) | Detuning::Effective(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CavityParams<T> {
    /// Cavity amplitude decay rate κ, rad/s.
    pub kappa: T,
    pub detuning: Detuning<T>,
    /// Pump wavelength, m.
    pub wavelength: Option<T>,
    /// Cavity length, m.
    pub cavity_length: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanicalMode<T> {
    /// Resonance frequency ω_l, rad/s.
    pub omega: T,
    /// Amplitude decay rate γ_l, rad/s.
    pub gamma: T,
    /// Single-photon optomechanical coupling g_l, rad/s.
    pub g: T,
    /// Effective mass, kg, when the coupling was derived from it.
    pub mass: Option<T>,
}

impl<T: Real> MechanicalMode<T> {
    pub fn new(omega: T, gamma: T, g: T) -> Self {
        MechanicalMode { omega, gamma, g, mass: None }
    }

    /// Mode with `γ = ω / Q`.
    pub fn with_quality_factor(omega: T, q: T, g: T) -> Result<Self> {
        if !(q > T::zero()) {
            return Err(OmitError::invalid("q_factor", "must be positive"));
        }
        Ok(MechanicalMode::new(omega, omega / q, g))
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let name = |f: &str| format!("mode.{}.{f}", index + 1);
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(OmitError::invalid(name("omega"), "must be positive and finite"));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(OmitError::invalid(name("gamma"), "must be positive and finite"));
        }
        if !self.g.is_finite() {
            return Err(OmitError::invalid(name("g"), "must be finite"));
        }
        Ok(())
    }
}

/// Phase-dependent phonon exchange `η (e^{iθ} b_j† b_{j+1} + h.c.)` between neighbours.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhononCoupling<T> {
    eta: T,
    theta: T,
}

impl<T: Real> PhononCoupling<T> {
    /// The phase is reduced into `[0, 2π)`.
    pub fn new(eta: T, theta: T) -> Result<Self> {
        if !(eta >= T::zero()) || !eta.is_finite() {
            return Err(OmitError::invalid("eta", "must be non-negative and finite"));
        }
        if !theta.is_finite() {
            return Err(OmitError::invalid("theta", "must be finite"));
        }
        Ok(PhononCoupling { eta, theta: canonical_angle(theta) })
    }

    /// Phase given in units of π.
    pub fn with_theta_pi_units(eta: T, theta_pi: T) -> Result<Self> {
        let mut t = theta_pi % T::lit(2.0);
        if t < T::zero() {
            t += T::lit(2.0);
        }
        Self::new(eta, t * T::PI())
    }

    pub fn uncoupled() -> Self {
        PhononCoupling { eta: T::zero(), theta: T::zero() }
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn theta(&self) -> T {
        self.theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeSpec<T> {
    /// `ε_p = r · ε_L`.
    Ratio(T),
    /// Probe power in W; `ε_p` follows from the same formula as the pump.
    Power(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec<T> {
    /// Pump power P_L, W.
    pub power_pump: T,
    pub probe: ProbeSpec<T>,
    /// Pump angular frequency ω_L, rad/s.
    pub omega_pump: T,
}

impl<T: Real> DriveSpec<T> {
    /// Drive with a prescribed pump amplitude `ε_L` instead of a power.
    pub fn from_amplitude(epsilon: T, kappa: T, omega_pump: T, probe_ratio: T) -> Self {
        let power = epsilon * epsilon * T::lit(HBAR) * omega_pump / (T::lit(2.0) * kappa);
        DriveSpec { power_pump: power, probe: ProbeSpec::Ratio(probe_ratio), omega_pump }
    }

    pub fn pump_amplitude(&self, kappa: T) -> Result<T> {
        drive_amplitude(self.power_pump, kappa, self.omega_pump)
    }

    /// Probe amplitude relative to the pump amplitude.
    pub fn probe_ratio(&self) -> Result<T> {
        match self.probe {
            ProbeSpec::Ratio(r) => Ok(r),
            ProbeSpec::Power(p) => {
                if p == T::zero() {
                    Ok(T::zero())
                } else if self.power_pump == T::zero() {
                    Err(OmitError::invalid("power_probe", "probe without pump is not perturbative"))
                } else {
                    Ok((p / self.power_pump).sqrt())
                }
            }
        }
    }

    pub fn probe_amplitude(&self, kappa: T) -> Result<T> {
        Ok(self.probe_ratio()? * self.pump_amplitude(kappa)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power_pump >= T::zero()) || !self.power_pump.is_finite() {
            return Err(OmitError::invalid("power_pump", "must be non-negative and finite"));
        }
        if !(self.omega_pump > T::zero()) {
            return Err(OmitError::invalid("omega_pump", "must be positive"));
        }
        if let ProbeSpec::Power(p) = self.probe {
            if !(p >= T::zero()) {
                return Err(OmitError::invalid("power_probe", "must be non-negative"));
            }
        }
        let r = self.probe_ratio()?;
        if !(r >= T::zero()) || r > T::lit(PROBE_RATIO_MAX) {
            return Err(OmitError::invalid(
                "probe_ratio",
                format!("must lie in [0, {PROBE_RATIO_MAX}] to stay perturbative, got {r}"),
            ));
        }
        if r > T::lit(PROBE_RATIO_WARN) {
            log::warn!("probe ratio {r} exceeds {PROBE_RATIO_WARN}; second-order truncation error grows");
        }
        Ok(())
    }
}

/// Full description of the driven multimode system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig<T> {
    pub cavity: CavityParams<T>,
    pub modes: Vec<MechanicalMode<T>>,
    /// Chain couplings; entry `j` links modes `j` and `j+1`.
    pub couplings: Vec<PhononCoupling<T>>,
    pub drive: DriveSpec<T>,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(
        cavity: CavityParams<T>,
        modes: Vec<MechanicalMode<T>>,
        couplings: Vec<PhononCoupling<T>>,
        drive: DriveSpec<T>,
    ) -> Result<Self> {
        let cfg = SystemConfig { cavity, modes, couplings, drive };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cavity;
        if !(c.kappa > T::zero()) || !c.kappa.is_finite() {
            return Err(OmitError::invalid("kappa", "must be positive and finite"));
        }
        if !c.detuning.value().is_finite() {
            return Err(OmitError::invalid("detuning", "must be finite"));
        }
        for (name, v) in [("wavelength", c.wavelength), ("cavity_length", c.cavity_length)] {
            if let Some(v) = v {
                if !(v > T::zero()) {
                    return Err(OmitError::invalid(name, "must be positive"));
                }
            }
        }
        if self.modes.is_empty() {
            return Err(OmitError::invalid("modes", "at least one mechanical mode is required"));
        }
        if self.couplings.len() + 1 != self.modes.len() {
            return Err(OmitError::invalid(
                "couplings",
                format!("a chain of {} modes needs {} couplings, got {}", self.modes.len(), self.modes.len() - 1, self.couplings.len()),
            ));
        }
        for (i, m) in self.modes.iter().enumerate() {
            m.validate(i)?;
        }
        self.drive.validate()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn kappa(&self) -> T {
        self.cavity.kappa
    }

    pub fn pump_amplitude(&self) -> Result<T> {
        self.drive.pump_amplitude(self.cavity.kappa)
    }

    pub fn probe_amplitude(&self) -> Result<T> {
        self.drive.probe_amplitude(self.cavity.kappa)
    }

    /// Frequency of the first mechanical mode; used to normalise detunings.
    pub fn reference_omega(&self) -> T {
        self.modes[0].omega
    }

    /// Coupling between modes `j` and `j+1` expressed as `η e^{iθ}`, or `None` past the chain end.
    pub(crate) fn chain_link(&self, j: usize) -> Option<&PhononCoupling<T>> {
        self.couplings.get(j)
    }

    /// All modes share ω, γ and g, and all links share η.
    pub fn is_uniform(&self) -> bool {
        let m0 = &self.modes[0];
        let same = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs());
        self.modes.iter().all(|m| same(m.omega, m0.omega) && same(m.gamma, m0.gamma) && same(m.g, m0.g))
            && self.couplings.windows(2).all(|w| same(w[0].eta(), w[1].eta()))
    }

    pub fn all_eta_zero(&self) -> bool {
        self.couplings.iter().all(|c| c.eta() == T::zero())
    }

    /// Same configuration with a different pump power.
    pub fn with_pump_power(mut self, power: T) -> Self {
        self.drive.power_pump = power;
        self
    }

    pub fn with_detuning(mut self, detuning: Detuning<T>) -> Self {
        self.cavity.detuning = detuning;
        self
    }

    pub fn with_probe_ratio(mut self, ratio: T) -> Self {
        self.drive.probe = ProbeSpec::Ratio(ratio);
        self
    }

    /// Replace every chain link with `(eta, theta)`.
    pub fn with_uniform_couplings(mut self, eta: T, theta: T) -> Result<Self> {
        let link = PhononCoupling::new(eta, theta)?;
        for c in &mut self.couplings {
            *c = link;
        }
        Ok(self)
    }
}

/// Intracavity drive amplitude `ε = sqrt(2 κ P / (ħ ω))`, in s^-1/2 units of photon flux.
pub fn drive_amplitude<T: Real>(power: T, kappa: T, omega: T) -> Result<T> {
    if !(kappa > T::zero()) {
        return Err(OmitError::invalid("kappa", "must be positive"));
    }
    if !(omega > T::zero()) {
        return Err(OmitError::invalid("omega", "must be positive"));
    }
    if !(power >= T::zero()) {
        return Err(OmitError::invalid("power", "must be non-negative"));
    }
    // ħω can underflow f32 when formed first; divide in two steps.
    Ok((T::lit(2.0) * kappa * power / omega / T::lit(HBAR)).sqrt())
}

/// Single-photon coupling of a Fabry–Pérot cavity with one moving mirror:
/// `g = (ω_c / L) sqrt(ħ / (2 m ω_m))` with `ω_c = 2πc/λ`.
pub fn derive_single_photon_coupling<T: Real>(wavelength: T, cavity_length: T, mass: T, omega_m: T) -> Result<T> {
    for (name, v) in [("wavelength", wavelength), ("cavity_length", cavity_length), ("mass", mass), ("omega_m", omega_m)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(OmitError::invalid(name, "must be positive and finite"));
        }
    }
    let omega_c = optical_angular_frequency(wavelength);
    let x_zpf = (T::lit(HBAR) / (T::lit(2.0) * mass * omega_m)).sqrt();
    Ok(omega_c / cavity_length * x_zpf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::SPEED_OF_LIGHT;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn zero_power_gives_zero_amplitude() {
        assert_eq!(drive_amplitude(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(drive_amplitude(0.0_f32, 3.0, 7.0).unwrap(), 0.0);
    }

    #[test]
    fn lab_pump_amplitude() {
        // sqrt(2 * 2π·215e3 * 1.5e-3 / (ħ · 2πc/1064e-9)), evaluated with mpmath at 30 digits
        let omega = TAU * SPEED_OF_LIGHT / 1064e-9;
        let eps = drive_amplitude(1.5e-3, TAU * 215e3, omega).unwrap();
        assert_relative_eq!(eps, 1.473_337_488_441_638e11, max_relative = 1e-13);
    }

    #[test]
    fn quadrupled_power_doubles_amplitude() {
        let a = drive_amplitude(1e-3, 2.0, 5.0).unwrap();
        let b = drive_amplitude(4e-3, 2.0, 5.0).unwrap();
        assert_relative_eq!(b / a, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn amplitude_rejects_bad_rates() {
        assert!(drive_amplitude(1.0, 0.0, 1.0).is_err());
        assert!(drive_amplitude(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn coupling_scaling_laws() {
        let w = TAU * 947e3;
        let g = derive_single_photon_coupling(1064e-9, 25e-3, 145e-12, w).unwrap();
        let g_heavy = derive_single_photon_coupling(1064e-9, 25e-3, 290e-12, w).unwrap();
        let g_long = derive_single_photon_coupling(1064e-9, 50e-3, 145e-12, w).unwrap();
        assert_relative_eq!(g / g_heavy, 2.0_f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g / g_long, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lab_coupling_regression() {
        // (2πc/λ)/L · sqrt(ħ/(2 m ω_m)) evaluated with mpmath
        let g = derive_single_photon_coupling(1064e-9, 25e-3, 145e-12, TAU * 947e3).unwrap();
        assert_relative_eq!(g, 17.506_248_640_006_51, max_relative = 1e-13);
    }

    #[test]
    fn quality_factor_sets_gamma() {
        let m = MechanicalMode::with_quality_factor(6700.0, 6700.0, 1.0).unwrap();
        assert_eq!(m.gamma, 1.0);
    }

    #[test]
    fn theta_is_canonical() {
        let c = PhononCoupling::new(1.0, -std::f64::consts::FRAC_PI_2).unwrap();
        assert_relative_eq!(c.theta(), 1.5 * std::f64::consts::PI, max_relative = 1e-15);
        let a = PhononCoupling::with_theta_pi_units(1.0, 0.5).unwrap();
        let b = PhononCoupling::with_theta_pi_units(1.0, 2.5).unwrap();
        assert_eq!(a, b);
        assert!(PhononCoupling::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn probe_ratio_limits() {
        let mut d = DriveSpec { power_pump: 1e-3, probe: ProbeSpec::Ratio(0.2), omega_pump: 1.0 };
        assert!(d.validate().is_err());
        d.probe = ProbeSpec::Ratio(0.08);
        assert!(d.validate().is_ok());
        d.probe = ProbeSpec::Power(1e-3 * 0.0025);
        assert_relative_eq!(d.probe_ratio().unwrap(), 0.05, max_relative = 1e-12);
    }
}
