use omit_core::figures::{figure_preset, FigurePreset};
use omit_core::sweep::sha256_hex;

#[test]
fn fig3_reports_two_windows_when_broken() {
    let b = figure_preset(FigurePreset::Fig3, None).unwrap();
    assert_eq!(b.failed_points, 0);
    assert_eq!(b.summary["unbroken"]["windows"]["count"], 1);
    assert_eq!(b.summary["broken"]["windows"]["count"], 2);
    let centers: Vec<f64> = serde_json::from_value(b.summary["broken"]["windows"]["centers_over_omega_m"].clone()).unwrap();
    assert!((centers[0] - 0.95).abs() < 0.01 && (centers[1] - 1.05).abs() < 0.01, "{centers:?}");
}

#[test]
fn fig6_has_delay_curves_for_both_windows() {
    let b = figure_preset(FigurePreset::Fig6, None).unwrap();
    let names: Vec<&str> = b.files.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"delay_vs_theta_left.csv") && names.contains(&"delay_vs_theta_right.csv"));
    for side in ["left", "right"] {
        let e = &b.summary["extrema"][side];
        assert!(e["max_delay_s"].as_f64().unwrap() > 0.0);
        assert!(e["min_delay_s"].as_f64().unwrap() < e["max_delay_s"].as_f64().unwrap());
    }
    assert!(b.summary["ratio_broken_over_unbroken"].as_f64().unwrap() > 1.0);
}

#[test]
fn fig7_counts_windows_and_linewidths() {
    let b = figure_preset(FigurePreset::Fig7, None).unwrap();
    assert_eq!(b.summary["broken_windows"]["n3"]["count"], 3);
    assert_eq!(b.summary["broken_windows"]["n4"]["count"], 4);
    let ratios: Vec<f64> = serde_json::from_value(b.summary["fwhm_ratio_to_single"].clone()).unwrap();
    assert_eq!(ratios.len(), 4);
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn written_bundle_matches_its_manifest() {
    let b = figure_preset(FigurePreset::Fig2, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = b.write(dir.path()).unwrap();
    assert_eq!(m.files.len(), b.files.len());
    for f in &m.files {
        let bytes = std::fs::read(dir.path().join(&f.file)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256);
        let text = String::from_utf8(bytes).unwrap();
        let width = text.lines().next().unwrap().split(',').count();
        assert!(text.lines().all(|l| l.split(',').count() == width), "{}", f.file);
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary, b.summary);
}

#[test]
fn presets_are_deterministic() {
    let a = figure_preset(FigurePreset::Fig4, None).unwrap();
    let b = figure_preset(FigurePreset::Fig4, None).unwrap();
    assert_eq!(a, b);
}
