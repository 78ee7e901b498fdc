//! Parameter sweeps over a configuration document, with checksummed output bundles.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigDocument;
use crate::error::{OmitError, Result};
use crate::sidebands::spectrum::{compute_spectrum, OmegaGrid, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize, spacing: Spacing },
}

impl SweepValues {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            SweepValues::List(v) if v.is_empty() => Err(OmitError::invalid("values", "sweep needs at least one value")),
            SweepValues::List(v) => Ok(v.clone()),
            &SweepValues::Range { start, stop, count, spacing } => {
                if count == 0 {
                    return Err(OmitError::invalid("count", "sweep needs at least one value"));
                }
                if count == 1 {
                    return Ok(vec![start]);
                }
                let f = |i: usize| i as f64 / (count - 1) as f64;
                match spacing {
                    Spacing::Linear => Ok((0..count).map(|i| if i + 1 == count { stop } else { start + (stop - start) * f(i) }).collect()),
                    Spacing::Log => {
                        if !(start > 0.0 && stop > 0.0) {
                            return Err(OmitError::invalid("values", "logarithmic sweeps need positive bounds"));
                        }
                        let (a, b) = (start.ln(), stop.ln());
                        Ok((0..count).map(|i| if i + 1 == count { stop } else { (a + (b - a) * f(i)).exp() }).collect())
                    }
                }
            }
        }
    }

    /// Parses `start:stop:count[:log]` or a comma-separated list.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || OmitError::invalid("values", format!("expected start:stop:count[:lin|log] or a list a,b,c; got {s:?}"));
        if s.contains(':') {
            let p: Vec<&str> = s.split(':').map(str::trim).collect();
            if !(3..=4).contains(&p.len()) {
                return Err(bad());
            }
            let spacing = match p.get(3).copied() {
                None | Some("lin") | Some("linear") => Spacing::Linear,
                Some("log") => Spacing::Log,
                _ => return Err(bad()),
            };
            Ok(SweepValues::Range {
                start: p[0].parse().map_err(|_| bad())?,
                stop: p[1].parse().map_err(|_| bad())?,
                count: p[2].parse().map_err(|_| bad())?,
                spacing,
            })
        } else {
            s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<Vec<f64>>>().map(SweepValues::List)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Dotted key such as `drive.power_pump_w` or `coupling.1.theta_rad`.
    pub parameter_path: String,
    pub values: SweepValues,
    pub inner_grid: OmegaGrid,
}

/// Outcome at one sweep value.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub outcome: std::result::Result<Spectrum<f64>, OmitError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub value: f64,
    pub file: Option<String>,
    pub sha256: Option<String>,
    pub converged: Option<bool>,
    pub multistable: Option<bool>,
    pub max_route_discrepancy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: String,
    pub parameter_path: String,
    pub values: SweepValues,
    pub omega_grid: [f64; 3],
    pub steady_tolerance: f64,
    pub points: Vec<ManifestEntry>,
    /// SHA-256 of this manifest serialized with this field empty.
    pub checksum: String,
}

/// Everything a sweep produced, before or after being written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultBundle {
    pub config_text: String,
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
}

impl ResultBundle {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    pub fn all_failed(&self) -> bool {
        self.failures() == self.points.len()
    }

    fn file_name(index: usize) -> String {
        format!("point_{index:04}.csv")
    }

    /// Writes one CSV per successful point plus `manifest.json`; returns the manifest.
    pub fn write(&self, dir: &Path) -> Result<Manifest> {
        std::fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(self.points.len());
        for p in &self.points {
            let e = match &p.outcome {
                Ok(s) => {
                    let csv = s.to_csv();
                    let name = Self::file_name(p.index);
                    std::fs::write(dir.join(&name), &csv)?;
                    ManifestEntry {
                        index: p.index,
                        value: p.value,
                        file: Some(name),
                        sha256: Some(sha256_hex(csv.as_bytes())),
                        converged: Some(s.steady.converged),
                        multistable: Some(s.steady.multistable),
                        max_route_discrepancy: s.max_route_discrepancy(),
                        error: None,
                    }
                }
                Err(e) => ManifestEntry {
                    index: p.index,
                    value: p.value,
                    file: None,
                    sha256: None,
                    converged: None,
                    multistable: None,
                    max_route_discrepancy: None,
                    error: Some(e.to_string()),
                },
            };
            entries.push(e);
        }
        let g = self.spec.inner_grid;
        let mut manifest = Manifest {
            tool: "omit-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: self.config_text.clone(),
            parameter_path: self.spec.parameter_path.clone(),
            values: self.spec.values.clone(),
            omega_grid: [g.start, g.stop, g.count as f64],
            steady_tolerance: <f64 as crate::Real>::default_tolerance(),
            points: entries,
            checksum: String::new(),
        };
        manifest.checksum = manifest_checksum(&manifest)?;
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| OmitError::Io(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest_checksum(m: &Manifest) -> Result<String> {
    let mut blank = m.clone();
    blank.checksum.clear();
    let text = serde_json::to_string(&blank).map_err(|e| OmitError::Io(e.to_string()))?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Re-reads a bundle directory and checks every listed file against its checksum.
pub fn verify_bundle(dir: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| OmitError::Io(format!("manifest.json: {e}")))?;
    if manifest_checksum(&m)? != m.checksum {
        return Err(OmitError::Io("manifest checksum mismatch".into()));
    }
    for e in &m.points {
        if let (Some(f), Some(sum)) = (&e.file, &e.sha256) {
            let bytes = std::fs::read(dir.join(f))?;
            if &sha256_hex(&bytes) != sum {
                return Err(OmitError::Io(format!("{f}: checksum mismatch")));
            }
        }
    }
    Ok(m)
}

/// Evaluates the spectrum at every sweep value; per-point failures are recorded, not raised.
pub fn run_sweep(doc: &ConfigDocument, spec: &SweepSpec) -> Result<ResultBundle> {
    spec.inner_grid.validate()?;
    let values = spec.values.values()?;
    // Resolve the path once up front so typos fail the whole sweep.
    let mut probe = doc.clone();
    probe.set(&spec.parameter_path, values[0])?;
    let points = values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let outcome = (|| {
                let mut d = doc.clone();
                d.set(&spec.parameter_path, value)?;
                compute_spectrum(&d.to_config()?, &spec.inner_grid)
            })();
            if let Err(e) = &outcome {
                log::warn!("sweep point {index} ({} = {value}) failed: {e}", spec.parameter_path);
            }
            SweepPoint { index, value, outcome }
        })
        .collect();
    Ok(ResultBundle { config_text: doc.emit(), spec: spec.clone(), points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_grids() {
        assert_eq!(SweepValues::parse("1:3:3").unwrap().values().unwrap(), vec![1.0, 2.0, 3.0]);
        let v = SweepValues::parse("1:100:3:log").unwrap().values().unwrap();
        assert!((v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        assert_eq!(SweepValues::parse("0.5, 2").unwrap().values().unwrap(), vec![0.5, 2.0]);
        assert!(SweepValues::parse("1:2").is_err());
        assert!(SweepValues::parse("0:1:3:log").unwrap().values().is_err());
        assert!(SweepValues::parse("1:2:0").unwrap().values().is_err());
    }
}
