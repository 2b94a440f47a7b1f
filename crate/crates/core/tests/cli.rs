use std::path::{Path, PathBuf};

use tristeer::cli::io::parse_curve;
use tristeer::cli::{run, Report, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use tristeer::decoherence::DEFAULT_DECAY_RATE;

fn tristeer(args: &[&str]) -> i32 {
    let mut full = vec!["tristeer"];
    full.extend_from_slice(args);
    run(full)
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fig4_scan_has_matching_b_and_c_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "fig4.csv");
    assert_eq!(tristeer(&["scan", "--preset", "fig4", "--output", s(&out)]), EXIT_OK);
    let rows = parse_curve(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 399);
    assert!(rows
        .iter()
        .all(|r| r.s1_bac == r.s1_cab && r.s2_bac == r.s2_cab && r.regime_bac == r.regime_cab));
    assert!(rows.iter().any(|r| r.s1_abc != r.s1_bac));
}

#[test]
fn single_point_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "one.json");
    assert_eq!(
        tristeer(&[
            "scan",
            "--preset",
            "fig3",
            "--points",
            "1",
            "--format",
            "json",
            "--output",
            s(&out)
        ]),
        EXIT_OK
    );
    let rows = parse_curve(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].l_total, 0.0);
    assert_eq!(rows[0].ew, -0.25);
    assert_eq!(rows[0].s1_abc, -0.8453);
    assert_eq!(rows[0].s2_abc, -0.5821);
}

#[test]
fn fit_recovers_generated_death_and_memory() {
    let dir = tempfile::tempdir().unwrap();
    let curve = path(dir.path(), "curve.csv");
    assert_eq!(tristeer(&["scan", "--preset", "fig3", "--output", s(&curve)]), EXIT_OK);

    let death = path(dir.path(), "death.csv");
    assert_eq!(
        tristeer(&["fit", s(&curve), "--column", "ew", "--output", s(&death)]),
        EXIT_OK
    );
    let r = Report::parse(&std::fs::read_to_string(&death).unwrap()).unwrap();
    // EW = 1/4 − e^{−BL²}/2 at η = 1.
    for (key, truth) in [("A", -0.5), ("B", DEFAULT_DECAY_RATE), ("C", 0.25)] {
        let v = r.get_num(key).unwrap();
        assert!(((v - truth) / truth).abs() < 1e-3, "{key} = {v}");
    }

    let revival = path(dir.path(), "revival.json");
    assert_eq!(
        tristeer(&[
            "fit",
            s(&curve),
            "--column",
            "s1_abc",
            "--stage",
            "u2",
            "--format",
            "json",
            "--output",
            s(&revival)
        ]),
        EXIT_OK
    );
    let r = Report::parse(&std::fs::read_to_string(&revival).unwrap()).unwrap();
    assert!((r.get_num("M").unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn fit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let curve = path(dir.path(), "curve.csv");
    assert_eq!(tristeer(&["scan", "--points", "20", "--output", s(&curve)]), EXIT_OK);
    assert_eq!(tristeer(&["fit", s(&curve), "--column", "missing"]), EXIT_USAGE);
    assert_eq!(
        tristeer(&["fit", s(&curve), "--column", "ew", "--stage", "u7"]),
        EXIT_USAGE
    );
    assert_eq!(tristeer(&["fit", s(&curve), "--column", "kappa_im"]), EXIT_NUMERIC);
    assert_eq!(
        tristeer(&["fit", s(&path(dir.path(), "absent.csv")), "--column", "ew"]),
        EXIT_USAGE
    );
    let broken = path(dir.path(), "broken.csv");
    std::fs::write(&broken, "l_total,stage\n0,u1\n").unwrap();
    assert_eq!(tristeer(&["fit", s(&broken), "--column", "ew"]), EXIT_USAGE);
}

#[test]
fn nonmark_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "blp.csv");
    assert_eq!(
        tristeer(&["nonmark", "--corr", "0", "--samples", "10", "--output", s(&out)]),
        EXIT_OK
    );
    let r = Report::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.get_num("n_value"), Some(0.0));

    assert_eq!(
        tristeer(&["nonmark", "--preset", "fig3", "--samples", "10", "--output", s(&out)]),
        EXIT_OK
    );
    let r = Report::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let n = r.get_num("n_value").unwrap();
    assert!((n - 0.946325647573).abs() < 1e-9, "n = {n}");
    assert_eq!(r.get_num("revival_intervals"), Some(1.0));
    assert_eq!(tristeer(&["nonmark", "--samples", "0"]), EXIT_USAGE);
}

#[test]
fn tomo_modes() {
    let dir = tempfile::tempdir().unwrap();
    let report = path(dir.path(), "tomo.csv");
    let counts = path(dir.path(), "counts.csv");
    assert_eq!(
        tristeer(&[
            "tomo",
            "--shots",
            "100000",
            "--counts",
            s(&counts),
            "--output",
            s(&report)
        ]),
        EXIT_OK
    );
    let r = Report::parse(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r.get_num("fidelity").unwrap() >= 0.99);
    assert!(r.get_num("fidelity_err").unwrap() < 0.02);

    let again = path(dir.path(), "again.csv");
    assert_eq!(
        tristeer(&["tomo", "--from-counts", s(&counts), "--output", s(&again)]),
        EXIT_OK
    );
    let q = Report::parse(&std::fs::read_to_string(&again).unwrap()).unwrap();
    assert_eq!(q.get_num("fidelity"), r.get_num("fidelity"));

    assert_eq!(tristeer(&["tomo", "--exact", "--output", s(&report)]), EXIT_OK);
    let r = Report::parse(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!((r.get_num("fidelity").unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r.get_num("fidelity_err"), Some(0.0));

    assert_eq!(tristeer(&["tomo", "--shots", "0"]), EXIT_USAGE);
}

#[test]
fn config_file_handling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "cfg.json");
    std::fs::write(
        &cfg,
        r#"{"eta": 0.66, "points": 5, "assignment_b": ["+X", "+Y", "+Z"]}"#,
    )
    .unwrap();
    let out = path(dir.path(), "out.csv");
    assert_eq!(tristeer(&["scan", "--config", s(&cfg), "--output", s(&out)]), EXIT_OK);
    let rows = parse_curve(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!((rows[0].ew - (0.5 - 0.75 * 0.66)).abs() < 1e-11);

    std::fs::write(&cfg, r#"{"eta": 0.66, "colour": "red"}"#).unwrap();
    assert_eq!(tristeer(&["scan", "--config", s(&cfg)]), EXIT_USAGE);
    std::fs::write(&cfg, r#"{"eta": 2.0}"#).unwrap();
    assert_eq!(tristeer(&["scan", "--config", s(&cfg)]), EXIT_USAGE);
}

#[test]
fn usage_errors() {
    assert_eq!(tristeer(&["bogus"]), EXIT_USAGE);
    assert_eq!(tristeer(&["scan", "--format", "xml"]), EXIT_USAGE);
    assert_eq!(tristeer(&["scan", "--threads", "0"]), EXIT_USAGE);
    assert_eq!(
        tristeer(&["scan", "--points", "3", "--output", "/nonexistent-dir/x.csv"]),
        EXIT_USAGE
    );
}
