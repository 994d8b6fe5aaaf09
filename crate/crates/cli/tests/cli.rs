use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ringstir(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringstir"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

fn meta_line(csv: &str) -> Value {
    let first = csv.lines().next().expect("meta line");
    serde_json::from_str(first.strip_prefix("# meta: ").expect("meta prefix")).expect("meta json")
}

#[test]
fn spectrum_header_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(&["spectrum", "--n", "11"], dir.path()));
    let mut lines = csv.lines();
    let meta: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# meta: ").unwrap()).unwrap();
    assert_eq!(lines.next(), Some("u,E_g,E_d,E_e"));
    assert_eq!(lines.count(), 11);
    assert_eq!(meta["params"]["c1"], 0.2);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["thresholds"]["rho"].is_number());
}

#[test]
fn ground_energy_is_monotone_with_lower_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(&["spectrum", "--u-min", "-3", "--u-max", "30", "--n", "200"], dir.path()));
    let e_g: Vec<f64> = csv.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(e_g.windows(2).all(|w| w[1] >= w[0]));
    assert!((e_g.last().unwrap() + 1.0).abs() < 0.01);
}

#[test]
fn numbers_use_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(&["spectrum", "--n", "2"], dir.path()));
    let row = csv.lines().nth(2).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 18, "{cell}");
        assert!(cell.contains('e') && !cell.contains('E'));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| ringstir(args, dir.path()).status.code();
    assert_eq!(code(&["spectrum", "--n", "1"]), Some(2));
    assert_eq!(code(&["spectrum", "--u-min", "1", "--u-max", "0"]), Some(2));
    assert_eq!(code(&["spectrum", "--c0", "nan"]), Some(2));
    assert_eq!(code(&["sweep", "--c1", "1", "--c2", "1"]), Some(3));
    assert_eq!(code(&["dynamics", "--u-dot", "-1"]), Some(2));
    assert_eq!(code(&["dynamics", "--u-dot", "0"]), Some(2));
    assert_eq!(code(&["figures", "fig3"]), Some(2));
    assert_eq!(code(&["regimes", "--n", "3"]), Some(0));
}

#[test]
fn dynamics_reports_integration_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = ringstir(
        &["dynamics", "--c1", "19", "--c2", "15", "--u-min", "-200", "--u-max", "600", "--u-dot", "0.02", "--tol", "1e-9"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&ringstir(&["sweep", "--n", "41", "--out", "run/sweep.csv"], dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("run/sweep.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("u,G_exact,G_numeric,Q,p0,p1,p2"));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/sweep.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(side["analysis"]["regime"], "SimpleTwoLevel");
    assert!((side["analysis"]["lambda"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(side["analysis"]["u_c"].is_number());
    assert!(side["analysis"]["u_m"].is_number());
    assert!(side["numeric_check"]["max_rel_gap"].as_f64().unwrap() < 1e-6);
    assert_eq!(side, meta_line(&csv));
}

#[test]
fn sweep_shows_two_stage_rise() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(&["sweep", "--c1", "19", "--c2", "17", "--u-min", "-50", "--u-max", "2000"], dir.path()));
    let q: Vec<(f64, f64)> = csv
        .lines()
        .skip(2)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[0], c[3])
        })
        .collect();
    let at = |u: f64| q.iter().min_by(|a, b| (a.0 - u).abs().total_cmp(&(b.0 - u).abs())).unwrap().1;
    assert!(at(150.0) < 1.0);
    assert!(at(2000.0) > 8.0);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# overrides\nc1 = 3\nu-max=2\n").unwrap();
    let csv = stdout(&ringstir(&["spectrum", "--c1", "7", "--n", "3", "--config", "run.cfg"], dir.path()));
    let meta = meta_line(&csv);
    assert_eq!(meta["params"]["c1"], 3.0);
    assert_eq!(meta["grid"]["u_max"], 2.0);
    std::fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(ringstir(&["spectrum", "--config", "bad.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&ringstir(&["spectrum", "--n", "3", "--format", "json"], dir.path()));
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["u", "E_g", "E_d", "E_e"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn dynamics_columns_and_final_charge() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(
        &["dynamics", "--c1", "19", "--c2", "15", "--u-min", "-200", "--u-max", "600", "--u-dot", "50", "--n", "50"],
        dir.path(),
    ));
    assert_eq!(csv.lines().nth(1), Some("t,u,I_over_udot,Q_dyn,p0,p1,p2"));
    let meta = meta_line(&csv);
    assert!(meta["run"]["max_norm_drift"].as_f64().unwrap() < 1e-9);
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[1], 600.0);
    assert!((last[3] - meta["run"]["q_dyn"].as_f64().unwrap()).abs() < 1e-15);
}

#[test]
fn regimes_grid_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&ringstir(&["regimes", "--n", "5", "--c-max", "8", "--svg", "map.svg"], dir.path()));
    assert_eq!(csv.lines().nth(1), Some("c1,c2,regime_label,lambda,u_m"));
    assert_eq!(csv.lines().count(), 2 + 25);
    assert!(csv.contains(",Degenerate,"));
    let svg = std::fs::read_to_string(dir.path().join("map.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn figure_bundles() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&ringstir(&["figures", "fig2", "--out", "a"], dir.path()));
    let csvs: Vec<_> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 4);
    assert!(dir.path().join("a/fig2.svg").exists());

    stdout(&ringstir(&["figures", "fig5", "--out", "b"], dir.path()));
    stdout(&ringstir(&["figures", "fig5", "--out", "c"], dir.path()));
    for name in ["fig5_adiabatic.csv", "fig5_dynamics_udot_2.csv", "fig5_dynamics_udot_50.csv", "fig5_occupations.svg"] {
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        let c = std::fs::read(dir.path().join("c").join(name)).unwrap();
        assert_eq!(b, c, "{name} differs between runs");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_ringstir"))
            .args(["sweep", "--n", "101"])
            .env("RINGSTIR_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        stdout(&out)
    };
    assert_eq!(run("1"), run("4"));
    let bad = Command::new(env!("CARGO_BIN_EXE_ringstir"))
        .arg("spectrum")
        .env("RINGSTIR_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
