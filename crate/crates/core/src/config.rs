//! INI-style configuration files.
//!
//! ```text
//! [cavity]
//! kappa_hz = 215e3
//! delta_eff_hz = 947e3        # or delta_c_hz
//! wavelength_m = 1064e-9
//! cavity_length_m = 25e-3
//!
//! [drive]
//! power_pump_w = 1.5e-3
//! probe_ratio = 0.05          # or power_probe_w
//!
//! [mode.1]
//! omega_hz = 947e3
//! q_factor = 6700             # or gamma_hz
//! mass_kg = 145e-12           # or g_hz
//!
//! [coupling.1]                # links mode 1 and mode 2
//! eta_hz = 47.35e3
//! theta_pi_units = 0.5        # or theta_rad
//! ```
//!
//! Frequencies given in Hz are converted to rad/s; every `*_hz` key also has a
//! `*_rad_s` twin taking angular units directly. `omega_pump_hz` replaces the
//! wavelength when the coupling is given directly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{OmitError, Result};
use crate::model::{
    derive_single_photon_coupling, CavityParams, Detuning, DriveSpec, MechanicalMode, PhononCoupling, ProbeSpec, SystemConfig,
};
use crate::units::{hz_to_angular, optical_angular_frequency};

const CAVITY_KEYS: &[&str] = &[
    "kappa_hz",
    "kappa_rad_s",
    "delta_c_hz",
    "delta_c_rad_s",
    "delta_eff_hz",
    "delta_eff_rad_s",
    "wavelength_m",
    "cavity_length_m",
];
const DRIVE_KEYS: &[&str] = &["power_pump_w", "probe_ratio", "power_probe_w", "omega_pump_hz", "omega_pump_rad_s"];
const MODE_KEYS: &[&str] = &["omega_hz", "omega_rad_s", "gamma_hz", "gamma_rad_s", "q_factor", "g_hz", "g_rad_s", "mass_kg"];
const COUPLING_KEYS: &[&str] = &["eta_hz", "eta_rad_s", "theta_rad", "theta_pi_units"];

/// Keys that specify the same quantity; at most one of each group may appear.
const ALTERNATIVES: &[&[&str]] = &[
    &["kappa_hz", "kappa_rad_s"],
    &["delta_c_hz", "delta_c_rad_s", "delta_eff_hz", "delta_eff_rad_s"],
    &["probe_ratio", "power_probe_w"],
    &["omega_pump_hz", "omega_pump_rad_s"],
    &["omega_hz", "omega_rad_s"],
    &["gamma_hz", "gamma_rad_s", "q_factor"],
    &["g_hz", "g_rad_s", "mass_kg"],
    &["eta_hz", "eta_rad_s"],
    &["theta_rad", "theta_pi_units"],
];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SectionName {
    Cavity,
    Drive,
    Mode(usize),
    Coupling(usize),
}

impl SectionName {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "cavity" => Some(SectionName::Cavity),
            "drive" => Some(SectionName::Drive),
            _ => {
                let (kind, idx) = s.split_once('.')?;
                let idx: usize = idx.parse().ok().filter(|&i| i >= 1)?;
                match kind {
                    "mode" => Some(SectionName::Mode(idx)),
                    "coupling" => Some(SectionName::Coupling(idx)),
                    _ => None,
                }
            }
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            SectionName::Cavity => CAVITY_KEYS,
            SectionName::Drive => DRIVE_KEYS,
            SectionName::Mode(_) => MODE_KEYS,
            SectionName::Coupling(_) => COUPLING_KEYS,
        }
    }
}

impl std::fmt::Display for SectionName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SectionName::Cavity => write!(f, "cavity"),
            SectionName::Drive => write!(f, "drive"),
            SectionName::Mode(i) => write!(f, "mode.{i}"),
            SectionName::Coupling(i) => write!(f, "coupling.{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: f64,
    /// Source line, 0 for values set programmatically.
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: SectionName,
    pub entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

/// Parsed but not yet interpreted configuration file.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConfigDocument {
    pub sections: Vec<Section>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDocument::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| OmitError::ConfigSyntax { line, message: "unterminated section header".into() })?
                    .trim();
                let name = SectionName::parse(name)
                    .ok_or_else(|| OmitError::ConfigSyntax { line, message: format!("unknown section [{name}]") })?;
                if doc.sections.iter().any(|s| s.name == name) {
                    return Err(OmitError::ConfigSyntax { line, message: format!("duplicate section [{name}]") });
                }
                doc.sections.push(Section { name, entries: Vec::new() });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| OmitError::ConfigSyntax { line, message: format!("expected `key = value`, got {content:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            let section = doc
                .sections
                .last_mut()
                .ok_or_else(|| OmitError::ConfigSyntax { line, message: "key outside of any section".into() })?;
            if !section.name.keys().contains(&key) {
                return Err(OmitError::ConfigSyntax { line, message: format!("unknown key `{key}` in [{}]", section.name) });
            }
            if section.get(key).is_some() {
                return Err(OmitError::ConfigSyntax { line, message: format!("duplicate key `{key}`") });
            }
            let value: f64 = value
                .parse()
                .map_err(|_| OmitError::ConfigSyntax { line, message: format!("`{key}`: cannot parse {value:?} as a number") })?;
            section.entries.push(Entry { key: key.to_string(), value, line });
        }
        Ok(doc)
    }

    fn section(&self, name: &SectionName) -> Option<&Section> {
        self.sections.iter().find(|s| &s.name == name)
    }

    /// Sets `section.key` or `section.index.key`, replacing any alternative spelling.
    pub fn set(&mut self, path: &str, value: f64) -> Result<()> {
        let (section, key) = path
            .rsplit_once('.')
            .ok_or_else(|| OmitError::config(path, "expected a dotted path such as drive.power_pump_w"))?;
        let name = SectionName::parse(section).ok_or_else(|| OmitError::config(path, format!("unknown section `{section}`")))?;
        if !name.keys().contains(&key) {
            return Err(OmitError::config(path, format!("unknown key `{key}` in [{name}]")));
        }
        let sec = self
            .sections
            .iter_mut()
            .find(|s| s.name == name)
            .ok_or_else(|| OmitError::config(path, format!("the configuration has no [{name}] section")))?;
        let group = ALTERNATIVES.iter().find(|g| g.contains(&key)).copied().unwrap_or(&[]);
        sec.entries.retain(|e| e.key == key || !group.contains(&e.key.as_str()));
        match sec.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value,
            None => sec.entries.push(Entry { key: key.to_string(), value, line: 0 }),
        }
        Ok(())
    }

    /// Serializes in canonical section order.
    pub fn emit(&self) -> String {
        let mut sections: Vec<&Section> = self.sections.iter().collect();
        sections.sort_by(|a, b| a.name.cmp(&b.name));
        let mut out = String::new();
        for (i, s) in sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            for e in &s.entries {
                let _ = writeln!(out, "{} = {:?}", e.key, e.value);
            }
        }
        out
    }

    /// Interprets the document as a system configuration.
    pub fn to_config(&self) -> Result<SystemConfig<f64>> {
        let cavity = self.section(&SectionName::Cavity).ok_or_else(|| OmitError::config("cavity", "missing [cavity] section"))?;
        let drive = self.section(&SectionName::Drive).ok_or_else(|| OmitError::config("drive", "missing [drive] section"))?;
        for s in &self.sections {
            for group in ALTERNATIVES {
                let present: Vec<&str> = group.iter().copied().filter(|k| s.get(k).is_some()).collect();
                if present.len() > 1 {
                    let line = s.get(present[1]).map_or(0, |e| e.line);
                    return Err(OmitError::config(
                        format!("{}.{}", s.name, present[1]),
                        format!("ambiguous: `{}` and `{}` both given (line {line})", present[0], present[1]),
                    ));
                }
            }
        }

        let kappa = angular(cavity, "kappa")?.ok_or_else(|| missing(cavity, "kappa_hz"))?;
        let detuning = match (angular(cavity, "delta_c")?, angular(cavity, "delta_eff")?) {
            (Some(d), None) => Detuning::Bare(d),
            (None, Some(d)) => Detuning::Effective(d),
            _ => return Err(missing(cavity, "delta_c_hz or delta_eff_hz")),
        };
        let wavelength = cavity.get("wavelength_m").map(|e| e.value);
        let cavity_length = cavity.get("cavity_length_m").map(|e| e.value);

        let omega_pump = match (angular(drive, "omega_pump")?, wavelength) {
            (Some(_), Some(_)) => {
                return Err(OmitError::config("drive.omega_pump_hz", "ambiguous: the pump frequency also follows from cavity.wavelength_m"))
            }
            (Some(w), None) => w,
            (None, Some(l)) => {
                if !(l > 0.0) {
                    return Err(OmitError::config("cavity.wavelength_m", "must be positive"));
                }
                optical_angular_frequency(l)
            }
            (None, None) => return Err(missing(cavity, "wavelength_m (or drive.omega_pump_hz)")),
        };
        let power_pump = drive.get("power_pump_w").ok_or_else(|| missing(drive, "power_pump_w"))?.value;
        let probe = match (drive.get("probe_ratio"), drive.get("power_probe_w")) {
            (Some(r), None) => ProbeSpec::Ratio(r.value),
            (None, Some(p)) => ProbeSpec::Power(p.value),
            _ => return Err(missing(drive, "probe_ratio or power_probe_w")),
        };

        let mut modes = Vec::new();
        let mut couplings = Vec::new();
        for s in &self.sections {
            match s.name {
                SectionName::Mode(i) => modes.push((i, s)),
                SectionName::Coupling(i) => couplings.push((i, s)),
                _ => {}
            }
        }
        modes.sort_by_key(|m| m.0);
        couplings.sort_by_key(|c| c.0);
        if modes.is_empty() {
            return Err(OmitError::config("mode.1", "at least one [mode.k] section is required"));
        }
        for (pos, (i, _)) in modes.iter().enumerate() {
            if *i != pos + 1 {
                return Err(OmitError::config(format!("mode.{}", pos + 1), "mode sections must be numbered 1, 2, … without gaps"));
            }
        }
        let n = modes.len();
        for (pos, (i, _)) in couplings.iter().enumerate() {
            if *i != pos + 1 || *i >= n {
                return Err(OmitError::config(format!("coupling.{i}"), format!("coupling sections must be numbered 1..{} for {n} modes", n - 1)));
            }
        }
        if couplings.len() + 1 != n {
            return Err(OmitError::config(
                format!("coupling.{}", couplings.len() + 1),
                format!("a chain of {n} modes needs {} [coupling.k] sections", n - 1),
            ));
        }

        let mut mechanical = Vec::with_capacity(n);
        for (_, s) in &modes {
            let omega = angular(s, "omega")?.ok_or_else(|| missing(s, "omega_hz"))?;
            let gamma = match (angular(s, "gamma")?, s.get("q_factor")) {
                (Some(g), None) => g,
                (None, Some(q)) => {
                    if !(q.value > 0.0) {
                        return Err(OmitError::config(format!("{}.q_factor", s.name), "must be positive"));
                    }
                    omega / q.value
                }
                _ => return Err(missing(s, "gamma_hz or q_factor")),
            };
            let (g, mass) = match (angular(s, "g")?, s.get("mass_kg")) {
                (Some(g), None) => (g, None),
                (None, Some(m)) => {
                    let (l, len) = match (wavelength, cavity_length) {
                        (Some(l), Some(len)) => (l, len),
                        _ => {
                            return Err(OmitError::config(
                                format!("{}.mass_kg", s.name),
                                "deriving g from the mass needs cavity.wavelength_m and cavity.cavity_length_m",
                            ))
                        }
                    };
                    let g = derive_single_photon_coupling(l, len, m.value, omega)
                        .map_err(|e| OmitError::config(format!("{}.mass_kg", s.name), e.to_string()))?;
                    (g, Some(m.value))
                }
                _ => return Err(missing(s, "g_hz or mass_kg")),
            };
            mechanical.push(MechanicalMode { omega, gamma, g, mass });
        }

        let mut links = Vec::with_capacity(n - 1);
        for (_, s) in &couplings {
            let eta = angular(s, "eta")?.ok_or_else(|| missing(s, "eta_hz"))?;
            let link = match (s.get("theta_rad"), s.get("theta_pi_units")) {
                (Some(t), None) => PhononCoupling::new(eta, t.value),
                (None, Some(t)) => PhononCoupling::with_theta_pi_units(eta, t.value),
                (None, None) => PhononCoupling::new(eta, 0.0),
                _ => unreachable!("ambiguity rejected above"),
            };
            links.push(link.map_err(|e| OmitError::config(s.name.to_string(), e.to_string()))?);
        }

        let config = SystemConfig {
            cavity: CavityParams { kappa, detuning, wavelength, cavity_length },
            modes: mechanical,
            couplings: links,
            drive: DriveSpec { power_pump, probe, omega_pump },
        };
        config.validate().map_err(|e| match e {
            OmitError::InvalidParameter { name, reason } => OmitError::ConfigValue { key: name, message: reason },
            other => other,
        })?;
        Ok(config)
    }

    /// Canonical document describing `config`; `from_config(c).to_config() == c`.
    pub fn from_config(config: &SystemConfig<f64>) -> Self {
        let mut cavity = Vec::new();
        push_angular(&mut cavity, "kappa", config.cavity.kappa);
        match config.cavity.detuning {
            Detuning::Bare(d) => push_angular(&mut cavity, "delta_c", d),
            Detuning::Effective(d) => push_angular(&mut cavity, "delta_eff", d),
        }
        if let Some(l) = config.cavity.wavelength {
            cavity.push(entry("wavelength_m", l));
        }
        if let Some(l) = config.cavity.cavity_length {
            cavity.push(entry("cavity_length_m", l));
        }
        let mut drive = vec![entry("power_pump_w", config.drive.power_pump)];
        match config.drive.probe {
            ProbeSpec::Ratio(r) => drive.push(entry("probe_ratio", r)),
            ProbeSpec::Power(p) => drive.push(entry("power_probe_w", p)),
        }
        if config.cavity.wavelength.is_none() {
            push_angular(&mut drive, "omega_pump", config.drive.omega_pump);
        }
        let mut sections = vec![
            Section { name: SectionName::Cavity, entries: cavity },
            Section { name: SectionName::Drive, entries: drive },
        ];
        for (i, m) in config.modes.iter().enumerate() {
            let mut e = Vec::new();
            push_angular(&mut e, "omega", m.omega);
            push_angular(&mut e, "gamma", m.gamma);
            let derived = match (m.mass, config.cavity.wavelength, config.cavity.cavity_length) {
                (Some(mass), Some(l), Some(len)) => derive_single_photon_coupling(l, len, mass, m.omega).ok() == Some(m.g),
                _ => false,
            };
            if derived {
                e.push(entry("mass_kg", m.mass.unwrap_or_default()));
            } else {
                push_angular(&mut e, "g", m.g);
            }
            sections.push(Section { name: SectionName::Mode(i + 1), entries: e });
        }
        for (i, c) in config.couplings.iter().enumerate() {
            let mut e = Vec::new();
            push_angular(&mut e, "eta", c.eta());
            e.push(entry("theta_rad", c.theta()));
            sections.push(Section { name: SectionName::Coupling(i + 1), entries: e });
        }
        ConfigDocument { sections }
    }
}

fn entry(key: &str, value: f64) -> Entry {
    Entry { key: key.to_string(), value, line: 0 }
}

/// Writes `stem_hz` when that reproduces `value` exactly, `stem_rad_s` otherwise.
fn push_angular(entries: &mut Vec<Entry>, stem: &str, value: f64) {
    let hz = value / std::f64::consts::TAU;
    let mut candidate = hz;
    for _ in 0..4 {
        if hz_to_angular(candidate) == value {
            entries.push(entry(&format!("{stem}_hz"), candidate));
            return;
        }
        candidate = f64::from_bits(if (hz_to_angular(candidate) < value) == (candidate >= 0.0) { candidate.to_bits() + 1 } else { candidate.to_bits() - 1 });
    }
    entries.push(entry(&format!("{stem}_rad_s"), value));
}

fn angular(s: &Section, stem: &str) -> Result<Option<f64>> {
    let hz = s.get(&format!("{stem}_hz")).map(|e| hz_to_angular(e.value));
    let rad = s.get(&format!("{stem}_rad_s")).map(|e| e.value);
    Ok(hz.or(rad))
}

fn missing(s: &Section, what: &str) -> OmitError {
    OmitError::config(format!("{}.{}", s.name, what.split(' ').next().unwrap_or(what)), format!("required key missing: {what}"))
}

pub fn parse_config(text: &str) -> Result<SystemConfig<f64>> {
    ConfigDocument::parse(text)?.to_config()
}

pub fn load_document(path: impl AsRef<Path>) -> Result<ConfigDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| OmitError::Io(format!("{}: {e}", path.display())))?;
    ConfigDocument::parse(&text)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig<f64>> {
    load_document(path)?.to_config()
}

pub fn emit_config(config: &SystemConfig<f64>) -> String {
    ConfigDocument::from_config(config).emit()
}
