mod common;

use approx::assert_relative_eq;
use omit_core::config::{emit_config, load_config, parse_config, ConfigDocument};
use omit_core::presets::lab_two_mode;
use omit_core::OmitError;
use proptest::prelude::*;

fn sample(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn shipped_two_mode_file_matches_lab_parameters() {
    let c = load_config(sample("two_mode_broken.cfg")).unwrap();
    let p = lab_two_mode::<f64>(1.5e-3, 0.05, 0.5);
    assert_eq!(c.n_modes(), 2);
    assert_eq!(c.kappa(), p.kappa());
    assert_eq!(c.cavity.detuning, p.cavity.detuning);
    assert_eq!(c.drive, p.drive);
    for (a, b) in c.modes.iter().zip(&p.modes) {
        assert_eq!(a.omega, b.omega);
        assert_relative_eq!(a.gamma, b.gamma, max_relative = 1e-15);
        assert_relative_eq!(a.g, b.g, max_relative = 1e-15);
        assert_eq!(a.mass, Some(145e-12));
    }
    assert_relative_eq!(c.couplings[0].eta(), p.couplings[0].eta(), max_relative = 1e-15);
    assert_relative_eq!(c.couplings[0].theta(), std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
}

#[test]
fn shipped_single_mode_file_loads() {
    let c = load_config(sample("single_mode.cfg")).unwrap();
    assert_eq!(c.n_modes(), 1);
    assert!(c.couplings.is_empty());
}

const MINIMAL: &str = "[cavity]\nkappa_hz = 215e3\ndelta_eff_hz = 947e3\n\n[drive]\npower_pump_w = 1e-3\nprobe_ratio = 0.05\nomega_pump_hz = 2.8e14\n\n[mode.1]\nomega_hz = 947e3\ngamma_hz = 141.3\ng_hz = 20\n";

#[test]
fn minimal_single_mode_document() {
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!(c.n_modes(), 1);
    assert_relative_eq!(c.modes[0].g, std::f64::consts::TAU * 20.0);
}

#[test]
fn ambiguous_and_unknown_keys_are_rejected() {
    let both = MINIMAL.replace("gamma_hz = 141.3", "gamma_hz = 141.3\nq_factor = 6700");
    let e = parse_config(&both).unwrap_err();
    assert!(matches!(&e, OmitError::ConfigValue { key, .. } if key.contains("gamma") || key.contains("q_factor")), "{e}");

    let typo = MINIMAL.replace("gamma_hz", "gama_hz");
    match parse_config(&typo).unwrap_err() {
        OmitError::ConfigSyntax { line, message } => {
            assert_eq!(line, 12);
            assert!(message.contains("gama_hz"));
        }
        e => panic!("unexpected {e}"),
    }

    let bad_number = MINIMAL.replace("g_hz = 20", "g_hz = twenty");
    assert!(matches!(parse_config(&bad_number), Err(OmitError::ConfigSyntax { line: 13, .. })));
}

#[test]
fn constraint_violations_name_the_key() {
    let negative = MINIMAL.replace("kappa_hz = 215e3", "kappa_hz = -1");
    let e = parse_config(&negative).unwrap_err();
    assert!(e.is_config_error());
    assert!(e.to_string().contains("kappa"), "{e}");
}

#[test]
fn missing_chain_link_is_rejected() {
    let text = format!("{MINIMAL}\n[mode.2]\nomega_hz = 947e3\ngamma_hz = 141.3\ng_hz = 20\n\n[coupling.2]\neta_hz = 1e3\ntheta_rad = 0\n");
    assert!(parse_config(&text).is_err());
}

#[test]
fn set_replaces_alternative_spelling() {
    let mut doc = ConfigDocument::parse(MINIMAL).unwrap();
    doc.set("mode.1.q_factor", 1000.0).unwrap();
    let c = doc.to_config().unwrap();
    assert_eq!(c.modes[0].gamma, c.modes[0].omega / 1000.0);
    assert!(doc.set("mode.3.q_factor", 1.0).is_err());
    assert!(doc.set("drive.power", 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn emitted_documents_load_back_identically(d in common::two_mode_draw()) {
        let text = emit_config(&d.config);
        prop_assert_eq!(parse_config(&text).unwrap(), d.config);
    }

    #[test]
    fn lab_presets_round_trip(eta in 0.0..0.2f64, theta in 0.0..2.0f64, power in 0.0..3e-3f64) {
        let c = lab_two_mode::<f64>(power, eta, theta);
        prop_assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
    }
}
