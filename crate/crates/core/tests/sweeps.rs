use std::f64::consts::TAU;

use omit_core::config::{load_document, ConfigDocument};
use omit_core::sidebands::spectrum::{compute_spectrum, OmegaGrid};
use omit_core::sweep::{run_sweep, verify_bundle, Spacing, SweepSpec, SweepValues};

fn doc() -> ConfigDocument {
    load_document(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_mode_broken.cfg")).unwrap()
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn one_point_sweep_is_a_spectrum() {
    let grid = OmegaGrid::new(0.9, 1.1, 201).unwrap();
    let spec = SweepSpec { parameter_path: "drive.power_pump_w".into(), values: SweepValues::List(vec![1.5e-3]), inner_grid: grid };
    let b = run_sweep(&doc(), &spec).unwrap();
    let direct = compute_spectrum(&doc().to_config().unwrap(), &grid).unwrap();
    assert_eq!(b.points.len(), 1);
    assert_eq!(b.points[0].outcome.as_ref().unwrap().to_csv(), direct.to_csv());
}

#[test]
fn theta_sweep_is_even_about_pi() {
    let spec = SweepSpec {
        parameter_path: "coupling.1.theta_rad".into(),
        values: SweepValues::Range { start: 0.0, stop: TAU, count: 101, spacing: Spacing::Linear },
        inner_grid: OmegaGrid::new(0.8, 1.2, 401).unwrap(),
    };
    let b = run_sweep(&doc(), &spec).unwrap();
    assert_eq!(b.failures(), 0);
    for i in 0..=50 {
        let (lo, hi) = (b.points[i].outcome.as_ref().unwrap(), b.points[100 - i].outcome.as_ref().unwrap());
        for (p, q) in lo.points.iter().zip(&hi.points) {
            assert!((p.transmission - q.transmission).abs() < 1e-10, "θ index {i} at Ω = {}", p.omega_ratio);
        }
    }
}

#[test]
fn bundles_are_identical_across_thread_counts() {
    let spec = SweepSpec {
        parameter_path: "drive.power_pump_w".into(),
        values: SweepValues::parse("0.1e-3:3e-3:7:log").unwrap(),
        inner_grid: OmegaGrid::new(0.8, 1.2, 301).unwrap(),
    };
    let d = doc();
    let one = in_pool(1, || run_sweep(&d, &spec).unwrap());
    let four = in_pool(4, || run_sweep(&d, &spec).unwrap());
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = one.write(a.path()).unwrap();
    let mb = four.write(b.path()).unwrap();
    assert_eq!(ma, mb);
    for e in &ma.points {
        let f = e.file.as_ref().unwrap();
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn manifest_lists_every_file_and_detects_tampering() {
    let spec = SweepSpec {
        parameter_path: "coupling.1.eta_hz".into(),
        values: SweepValues::List(vec![0.0, 20e3, 47.35e3]),
        inner_grid: OmegaGrid::new(0.8, 1.2, 101).unwrap(),
    };
    let dir = tempfile::tempdir().unwrap();
    let written = run_sweep(&doc(), &spec).unwrap().write(dir.path()).unwrap();
    let read = verify_bundle(dir.path()).unwrap();
    assert_eq!(written, read);
    assert!(read.points.iter().all(|e| e.converged == Some(true) && e.error.is_none()));
    assert!(omit_core::config::parse_config(&read.config).is_ok());

    std::fs::write(dir.path().join("point_0001.csv"), "omega_over_omega_m\n").unwrap();
    assert!(verify_bundle(dir.path()).is_err());
}

#[test]
fn failing_points_are_recorded_not_fatal() {
    let spec = SweepSpec {
        parameter_path: "drive.power_pump_w".into(),
        values: SweepValues::List(vec![1e-3, -1.0, 2e-3]),
        inner_grid: OmegaGrid::new(0.9, 1.1, 51).unwrap(),
    };
    let b = run_sweep(&doc(), &spec).unwrap();
    assert_eq!(b.failures(), 1);
    assert!(!b.all_failed());
    let dir = tempfile::tempdir().unwrap();
    let m = b.write(dir.path()).unwrap();
    assert!(m.points[1].file.is_none() && m.points[1].error.is_some());
    assert!(!dir.path().join("point_0001.csv").exists());
    assert!(verify_bundle(dir.path()).is_ok());
}

#[test]
fn unknown_parameter_path_fails_the_sweep() {
    let spec = SweepSpec {
        parameter_path: "coupling.1.phase".into(),
        values: SweepValues::List(vec![1.0]),
        inner_grid: OmegaGrid::new(0.9, 1.1, 11).unwrap(),
    };
    assert!(run_sweep(&doc(), &spec).unwrap_err().is_config_error());
}
