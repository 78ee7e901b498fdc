//! Named figure presets: each one hard-codes its
//! parameters, evaluates the sweeps behind every panel and collects
//! plot-ready tables plus a JSON summary of the headline quantities.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{delay_at_ratio, delay_versus_theta, peak_efficiency_of, windows};
use crate::darkmode::{predict_linewidth, LinewidthFit};
use crate::error::{OmitError, Result};
use crate::model::SystemConfig;
use crate::presets::{lab_n_mode, lab_single_mode, lab_two_mode, PUMP_POWER_W};
use crate::sidebands::spectrum::{compute_spectrum, OmegaGrid, Spectrum};
use crate::sweep::sha256_hex;
use crate::units::format_f64;

/// Full-resolution probe grid used for the 1D spectra.
pub const DEFAULT_GRID: OmegaGrid = OmegaGrid { start: 0.8, stop: 1.2, count: 4001 };
/// Coarser grid used along the Ω axis of 2D maps.
pub const MAP_GRID: OmegaGrid = OmegaGrid { start: 0.8, stop: 1.2, count: 801 };
/// Wide grid for strong phonon exchange, where the dressed modes sit at ω_m ± 2η.
pub const WIDE_GRID: OmegaGrid = OmegaGrid { start: 0.5, stop: 1.5, count: 4001 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigurePreset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 6] =
        [FigurePreset::Fig2, FigurePreset::Fig3, FigurePreset::Fig4, FigurePreset::Fig5, FigurePreset::Fig6, FigurePreset::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig3 => "fig3",
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
            FigurePreset::Fig6 => "fig6",
            FigurePreset::Fig7 => "fig7",
        }
    }
}

impl fmt::Display for FigurePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigurePreset {
    type Err = OmitError;

    fn from_str(s: &str) -> Result<Self> {
        FigurePreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| OmitError::invalid("figure", format!("unknown preset {s:?}; expected one of fig2..fig7")))
    }
}

/// A rectangular table; missing cells (failed points) are written empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.map(format_f64).unwrap_or_default()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureManifest {
    pub tool: String,
    pub version: String,
    pub preset: FigurePreset,
    pub files: Vec<FigureFile>,
    pub summary: Value,
}

/// Tables and summary of one preset.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureBundle {
    pub preset: FigurePreset,
    /// `(file name, content)` in a fixed order.
    pub files: Vec<(String, String)>,
    pub summary: Value,
    /// Points that failed and were left blank.
    pub failed_points: usize,
}

impl FigureBundle {
    fn new(preset: FigurePreset) -> Self {
        FigureBundle { preset, files: Vec::new(), summary: json!({}), failed_points: 0 }
    }

    fn add_table(&mut self, name: &str, t: &Table) {
        self.files.push((format!("{name}.csv"), t.to_csv()));
    }

    fn add_map(&mut self, name: &str, axis: &'static str, values: &[f64], maps: &[Option<Spectrum<f64>>], grid: &OmegaGrid) {
        let t = map_table(axis, values, maps, grid, &mut self.failed_points);
        self.add_table(name, &t);
    }

    fn add_spectrum(&mut self, name: &str, s: &Spectrum<f64>) {
        self.files.push((format!("{name}.csv"), s.to_csv()));
    }

    /// Writes every table plus `summary.json` and `manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<FigureManifest> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (name, content) in &self.files {
            std::fs::write(dir.join(name), content)?;
            files.push(FigureFile { file: name.clone(), sha256: sha256_hex(content.as_bytes()) });
        }
        let summary = serde_json::to_string_pretty(&self.summary).map_err(|e| OmitError::Io(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), &summary)?;
        let manifest = FigureManifest {
            tool: "omit-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            preset: self.preset,
            files,
            summary: self.summary.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| OmitError::Io(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn window_json(fits: &[LinewidthFit<f64>]) -> Value {
    json!({
        "count": fits.len(),
        "centers_over_omega_m": fits.iter().map(|f| f.center).collect::<Vec<_>>(),
        "fwhm_over_omega_m": fits.iter().map(|f| f.fwhm).collect::<Vec<_>>(),
        "peak_transmission": fits.iter().map(|f| f.peak_height).collect::<Vec<_>>(),
    })
}

fn spectrum_json(s: &Spectrum<f64>) -> Value {
    let peak = peak_efficiency_of(s);
    json!({
        "windows": window_json(&windows(s)),
        "max_efficiency_percent": peak.map(|p| p.0 * 100.0),
        "max_efficiency_at_omega_over_omega_m": peak.map(|p| p.1),
        "max_route_discrepancy": s.max_route_discrepancy(),
        "multistable": s.steady.multistable,
    })
}

/// Evaluates spectra for every config, blanking failures.
fn spectra(configs: &[SystemConfig<f64>], grid: &OmegaGrid) -> Vec<Option<Spectrum<f64>>> {
    configs
        .par_iter()
        .map(|c| match compute_spectrum(c, grid) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("figure point failed: {e}");
                None
            }
        })
        .collect()
}

/// Long-format map: one row per (axis value, Ω) with transmission and Λ_p in percent.
fn map_table(axis: &'static str, values: &[f64], maps: &[Option<Spectrum<f64>>], grid: &OmegaGrid, failed: &mut usize) -> Table {
    let mut t = Table::new(&[axis, "omega_over_omega_m", "transmission", "efficiency_percent"]);
    let omegas = grid.points();
    for (v, s) in values.iter().zip(maps) {
        match s {
            Some(s) => {
                for p in &s.points {
                    t.push(vec![Some(*v), Some(p.omega_ratio), Some(p.transmission), p.efficiency.map(|e| e * 100.0)]);
                }
            }
            None => {
                *failed += 1;
                for &w in &omegas {
                    t.push(vec![Some(*v), Some(w), None, None]);
                }
            }
        }
    }
    t
}

fn max_efficiency(maps: &[Option<Spectrum<f64>>]) -> Option<f64> {
    maps.iter().flatten().filter_map(|s| peak_efficiency_of(s).map(|p| p.0)).fold(None, |m, e| Some(m.map_or(e, |m: f64| m.max(e))))
}

fn require(s: Option<Spectrum<f64>>, what: &str) -> Result<Spectrum<f64>> {
    s.ok_or_else(|| OmitError::DegeneratePoint(format!("{what}: spectrum could not be evaluated")))
}

fn single(config: &SystemConfig<f64>, grid: &OmegaGrid) -> Result<Spectrum<f64>> {
    compute_spectrum(config, grid)
}

/// Runs the named preset. `grid` overrides the Ω grid of the 1D spectra.
pub fn figure_preset(preset: FigurePreset, grid: Option<OmegaGrid>) -> Result<FigureBundle> {
    let grid = grid.unwrap_or(DEFAULT_GRID);
    grid.validate()?;
    match preset {
        FigurePreset::Fig2 => fig2(&grid),
        FigurePreset::Fig3 => fig3(&grid),
        FigurePreset::Fig4 => fig4(&grid),
        FigurePreset::Fig5 => fig5(&grid),
        FigurePreset::Fig6 => fig6(),
        FigurePreset::Fig7 => fig7(&grid),
    }
}

/// Linewidth of the single window against pump power, one and two degenerate modes.
fn fig2(grid: &OmegaGrid) -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig2);
    let powers_mw = linspace(0.1, 3.0, 30);
    let mut table = Table::new(&[
        "power_mw",
        "fwhm_single_over_omega_m",
        "fwhm_two_over_omega_m",
        "gamma_eff_single_over_omega_m",
        "gamma_eff_two_over_omega_m",
    ]);
    let rows: Vec<Vec<Option<f64>>> = powers_mw
        .par_iter()
        .map(|&p| {
            let one = lab_single_mode::<f64>(p * 1e-3);
            let two = lab_two_mode::<f64>(p * 1e-3, 0.0, 0.0);
            let w = one.reference_omega();
            let fwhm = |c: &SystemConfig<f64>| compute_spectrum(c, grid).ok().and_then(|s| windows(&s).first().map(|f| f.fwhm));
            let pred = |c: &SystemConfig<f64>, n| {
                crate::steady::solve_steady_state(c).and_then(|s| predict_linewidth(c, &s, n)).ok().map(|g| g / w)
            };
            vec![Some(p), fwhm(&one), fwhm(&two), pred(&one, 1), pred(&two, 2)]
        })
        .collect();
    for r in rows {
        b.failed_points += r.iter().filter(|c| c.is_none()).count();
        table.push(r);
    }
    b.add_table("linewidth_vs_power", &table);

    let one = single(&lab_single_mode(PUMP_POWER_W), grid)?;
    let two = single(&lab_two_mode(PUMP_POWER_W, 0.0, 0.0), grid)?;
    b.add_spectrum("spectrum_single", &one);
    b.add_spectrum("spectrum_two", &two);

    let ratios: Vec<Value> = [0.5, 1.0, 1.5, 2.0]
        .iter()
        .map(|&p| {
            let f = |c: SystemConfig<f64>| compute_spectrum(&c, grid).ok().and_then(|s| windows(&s).first().map(|f| f.fwhm));
            let (a, c) = (f(lab_single_mode(p * 1e-3)), f(lab_two_mode(p * 1e-3, 0.0, 0.0)));
            json!({ "power_mw": p, "ratio": a.zip(c).map(|(a, c)| c / a) })
        })
        .collect();
    b.summary = json!({
        "single": spectrum_json(&one),
        "two": spectrum_json(&two),
        "fwhm_ratio_two_over_single": ratios,
    });
    Ok(b)
}

/// Transmission and second-order maps over pump power, with and without the dark mode.
fn fig3(grid: &OmegaGrid) -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig3);
    let powers_mw = linspace(0.1, 3.0, 30);
    let mut summary = serde_json::Map::new();
    for (tag, eta, theta) in [("unbroken", 0.0, 0.0), ("broken", 0.05, 0.5)] {
        let configs: Vec<_> = powers_mw.iter().map(|&p| lab_two_mode::<f64>(p * 1e-3, eta, theta)).collect();
        let maps = spectra(&configs, &MAP_GRID);
        b.add_map(&format!("map_{tag}"), "power_mw", &powers_mw, &maps, &MAP_GRID);
        let s = single(&lab_two_mode(PUMP_POWER_W, eta, theta), grid)?;
        b.add_spectrum(&format!("spectrum_{tag}"), &s);
        summary.insert(tag.into(), spectrum_json(&s));
    }
    b.summary = Value::Object(summary);
    Ok(b)
}

/// Abscissas where `a − b` changes sign, by linear interpolation.
fn crossings(x: &[f64], a: &[Option<f64>], b: &[Option<f64>]) -> Vec<f64> {
    let d: Vec<Option<f64>> = a.iter().zip(b).map(|(a, b)| a.zip(*b).map(|(a, b)| a - b)).collect();
    let mut out = Vec::new();
    for i in 0..x.len().saturating_sub(1) {
        if let (Some(u), Some(v)) = (d[i], d[i + 1]) {
            if u == 0.0 {
                out.push(x[i]);
            } else if u * v < 0.0 {
                out.push(x[i] + (x[i + 1] - x[i]) * u / (u - v));
            }
        }
    }
    out
}

/// Transmission against η and θ; the two windows as θ is tuned.
fn fig4(grid: &OmegaGrid) -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig4);
    let etas = linspace(0.0, 0.1, 51);
    let configs: Vec<_> = etas.iter().map(|&e| lab_two_mode::<f64>(PUMP_POWER_W, e, 0.5)).collect();
    let maps = spectra(&configs, &MAP_GRID);
    b.add_map("map_eta", "eta_over_omega_m", &etas, &maps, &MAP_GRID);

    let thetas = linspace(0.0, 2.0, 101);
    let configs: Vec<_> = thetas.iter().map(|&t| lab_two_mode::<f64>(PUMP_POWER_W, 0.05, t)).collect();
    let maps = spectra(&configs, &MAP_GRID);
    b.add_map("map_theta", "theta_over_pi", &thetas, &maps, &MAP_GRID);

    let mut spectra_summary = serde_json::Map::new();
    for eta in [0.0, 0.02, 0.1] {
        let s = single(&lab_two_mode(PUMP_POWER_W, eta, 0.5), grid)?;
        b.add_spectrum(&format!("spectrum_eta_{eta}"), &s);
        spectra_summary.insert(format!("eta_{eta}"), spectrum_json(&s));
    }

    // Transmission at the two window positions as θ runs over a period.
    let thetas = linspace(0.0, 2.0, 401);
    let point = OmegaGrid { start: 0.95, stop: 1.05, count: 2 };
    let configs: Vec<_> = thetas.iter().map(|&t| lab_two_mode::<f64>(PUMP_POWER_W, 0.05, t)).collect();
    let pairs = spectra(&configs, &point);
    let mut t = Table::new(&["theta_over_pi", "transmission_left", "transmission_right"]);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (th, s) in thetas.iter().zip(&pairs) {
        let l = s.as_ref().map(|s| s.points[0].transmission);
        let r = s.as_ref().map(|s| s.points[1].transmission);
        b.failed_points += usize::from(s.is_none());
        left.push(l);
        right.push(r);
        t.push(vec![Some(*th), l, r]);
    }
    b.add_table("transmission_vs_theta", &t);
    b.summary = json!({
        "spectra": spectra_summary,
        "switch_points_theta_over_pi": crossings(&thetas, &left, &right),
    });
    Ok(b)
}

/// Second-order efficiency against η and θ.
fn fig5(grid: &OmegaGrid) -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig5);
    let etas = linspace(0.0, 0.2, 41);
    let map_grid = OmegaGrid { start: WIDE_GRID.start, stop: WIDE_GRID.stop, count: 1001 };
    let mut eta_max = serde_json::Map::new();
    for (tag, theta) in [("theta_0", 0.0), ("theta_half_pi", 0.5), ("theta_pi", 1.0)] {
        let configs: Vec<_> = etas.iter().map(|&e| lab_two_mode::<f64>(PUMP_POWER_W, e, theta)).collect();
        let maps = spectra(&configs, &map_grid);
        b.add_map(&format!("map_eta_{tag}"), "eta_over_omega_m", &etas, &maps, &map_grid);
        eta_max.insert(tag.into(), json!(max_efficiency(&maps).map(|e| e * 100.0)));
    }
    let thetas = linspace(0.0, 2.0, 101);
    let configs: Vec<_> = thetas.iter().map(|&t| lab_two_mode::<f64>(PUMP_POWER_W, 0.05, t)).collect();
    let maps = spectra(&configs, &MAP_GRID);
    b.add_map("map_theta", "theta_over_pi", &thetas, &maps, &MAP_GRID);

    // The user grid applies unless it is the narrow default, which clips η = 0.2.
    let line_grid = if *grid == DEFAULT_GRID { WIDE_GRID } else { *grid };
    let mut lines = serde_json::Map::new();
    let mut peak = |tag: String, theta: f64, eta: f64, b: &mut FigureBundle| -> Result<Option<f64>> {
        let s = single(&lab_two_mode(PUMP_POWER_W, eta, theta), &line_grid)?;
        b.add_spectrum(&format!("spectrum_{tag}"), &s);
        let e = peak_efficiency_of(&s).map(|p| p.0);
        lines.insert(tag, spectrum_json(&s));
        Ok(e)
    };
    peak("theta_pi_eta_0.1".into(), 1.0, 0.1, &mut b)?;
    let at_pi = peak("theta_pi_eta_0.2".into(), 1.0, 0.2, &mut b)?;
    let at_zero = peak("theta_0_eta_0.2".into(), 0.0, 0.2, &mut b)?;
    b.summary = json!({
        "max_efficiency_percent_over_eta_sweep": eta_max,
        "spectra": lines,
        "enhancement_theta_pi_over_theta_0_at_eta_0.2": at_pi.zip(at_zero).map(|(a, z)| a / z),
    });
    Ok(b)
}

/// Group delay against pump power and against θ at both windows.
fn fig6() -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig6);
    let powers_mw = linspace(0.1, 3.0, 30);
    let rows: Vec<Vec<Option<f64>>> = powers_mw
        .par_iter()
        .map(|&p| {
            let unbroken = lab_two_mode::<f64>(p * 1e-3, 0.0, 0.0);
            let broken = lab_two_mode::<f64>(p * 1e-3, 0.05, 0.5);
            vec![
                Some(p),
                delay_at_ratio(&unbroken, 1.0).ok(),
                delay_at_ratio(&broken, 0.95).ok(),
                delay_at_ratio(&broken, 1.05).ok(),
            ]
        })
        .collect();
    let mut t = Table::new(&["power_mw", "delay_unbroken_s", "delay_left_s", "delay_right_s"]);
    for r in rows {
        b.failed_points += r.iter().filter(|c| c.is_none()).count();
        t.push(r);
    }
    b.add_table("delay_vs_power", &t);

    let base = lab_two_mode::<f64>(PUMP_POWER_W, 0.05, 0.5);
    let unbroken = delay_at_ratio(&lab_two_mode::<f64>(PUMP_POWER_W, 0.0, 0.0), 1.0)?;
    let mut ext = serde_json::Map::new();
    let mut largest: f64 = 0.0;
    for (tag, at) in [("left", 0.95), ("right", 1.05)] {
        let (curve, e) = delay_versus_theta(&base, 0, at, 720)?;
        let mut t = Table::new(&["theta_over_pi", "delay_s"]);
        for (th, d) in &curve {
            t.push(vec![Some(th / std::f64::consts::PI), Some(*d)]);
        }
        b.add_table(&format!("delay_vs_theta_{tag}"), &t);
        largest = largest.max(e.max.abs()).max(e.min.abs());
        ext.insert(
            tag.into(),
            json!({
                "omega_over_omega_m": at,
                "max_delay_s": e.max,
                "theta_at_max_over_pi": e.theta_at_max / std::f64::consts::PI,
                "min_delay_s": e.min,
                "theta_at_min_over_pi": e.theta_at_min / std::f64::consts::PI,
            }),
        );
    }
    b.summary = json!({
        "extrema": ext,
        "unbroken_delay_s": unbroken,
        "ratio_broken_over_unbroken": largest / unbroken.abs(),
    });
    Ok(b)
}

/// N mechanical modes: linewidth growth with η = 0 and N windows once broken.
fn fig7(grid: &OmegaGrid) -> Result<FigureBundle> {
    let mut b = FigureBundle::new(FigurePreset::Fig7);
    let configs: Vec<_> = (1..=4).map(|n| lab_n_mode::<f64>(n, PUMP_POWER_W, 0.0, 0.0)).collect();
    let dark = spectra(&configs, grid);
    let mut fwhm = Vec::new();
    for (n, s) in (1..=4).zip(dark) {
        let s = require(s, &format!("N = {n}"))?;
        b.add_spectrum(&format!("spectrum_n{n}_unbroken"), &s);
        fwhm.push(windows(&s).first().map(|f| f.fwhm));
    }
    let mut broken = serde_json::Map::new();
    for n in [3, 4] {
        let s = single(&lab_n_mode(n, PUMP_POWER_W, 0.05, 0.5), grid)?;
        b.add_spectrum(&format!("spectrum_n{n}_broken"), &s);
        broken.insert(format!("n{n}"), window_json(&windows(&s)));
    }
    let base = fwhm[0];
    b.summary = json!({
        "fwhm_over_omega_m": fwhm,
        "fwhm_ratio_to_single": fwhm.iter().map(|f| f.zip(base).map(|(f, b)| f / b)).collect::<Vec<_>>(),
        "broken_windows": broken,
    });
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in FigurePreset::ALL {
            assert_eq!(p.name().parse::<FigurePreset>().unwrap(), p);
        }
        assert!("fig9".parse::<FigurePreset>().is_err());
    }

    #[test]
    fn table_blanks_missing_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Some(1.5), None]);
        assert_eq!(t.to_csv(), "a,b\n1.5,\n");
    }

    #[test]
    fn sign_changes_are_located() {
        let x = [0.0, 1.0, 2.0];
        let a = [Some(1.0), Some(-1.0), Some(-1.0)];
        let z = [Some(0.0); 3];
        assert_eq!(crossings(&x, &a, &z), vec![0.5]);
    }
}
