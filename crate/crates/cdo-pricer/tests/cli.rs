//! End-to-end checks of the command-line interface: subcommands, exit
//! codes, and emitted files.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cdo-pricer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn price_prints_the_standard_table() {
    let out = run(&["price"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("defPV"));
    assert!(text.contains("224.7"), "index level missing:\n{text}");
    // eight lines: header x2 + 7 tranches
    assert_eq!(text.lines().filter(|l| l.starts_with("  0.") || l.starts_with("  0 ")).count(), 7);
}

#[test]
fn price_with_empty_tranche_list_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"tranches": []}"#).unwrap();
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bad_config_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"model\": {\"rho\": -4, \"lambda\": 10}\n}").unwrap();
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line"), "expected positioned parse error, got: {err}");

    std::fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let out = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_reports_and_respects_strict_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"altered": {"rho": 0.05, "lambda": 25.0}, "mc": {"paths": 2000, "seed": 1, "chunk_size": 512}}"#,
    )
    .unwrap();
    // divergent measure: warning only by default
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divergent measure change"));
    // warning-as-error when opted in
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--strict-divergence"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn simulate_prints_statistics_with_analytic_overlay() {
    let out = run(&["simulate", "--paths", "20000", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("mean path weight"));
    assert!(text.contains("analytic def"));
}

#[test]
fn sweep_writes_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--axis",
        "mean-jump",
        "--from",
        "0.1",
        "--to",
        "0.4",
        "--steps",
        "3",
        "--paths",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 7, "one plot file per tranche");
    let body =
        std::fs::read_to_string(dir.path().join("sweep_mean_jump_tranche_030_100.dat")).unwrap();
    assert!(body.starts_with("# generated by cdo-pricer v"));
    assert!(body.contains("seed="));
}

#[test]
fn map_emits_grids_and_optima_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "map",
        "--rho-cells",
        "2",
        "--mu-cells",
        "2",
        "--cell-paths",
        "2000",
        "--no-timing",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let grid = std::fs::read_to_string(dir.path().join("map_gnum_tranche_030_100.dat")).unwrap();
    // header row of intensity ratios and one row per jump-size ratio
    let data_rows: Vec<&str> = grid.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data_rows.len(), 3);
    assert!(data_rows[0].split_whitespace().count() == 3);
    let optima = std::fs::read_to_string(dir.path().join("map_optima.csv")).unwrap();
    assert!(optima.contains("gnum_rho"));
    assert_eq!(optima.lines().filter(|l| !l.starts_with('#')).count(), 8);
}

#[test]
fn timing_fits_and_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "timing",
        "--rhos",
        "0.05,0.5,1.0",
        "--paths",
        "50000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(dir.path().join("timing.dat")).unwrap();
    assert!(body.contains("# fit: t = c + b rho'"));
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn surface_writes_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "surface",
        "--time-bins",
        "4",
        "--loss-bins",
        "5",
        "--paths",
        "5000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("loss_surface.dat")).unwrap();
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn validate_passes_and_self_test_fails() {
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("[PASS]"));

    let out = run(&["validate", "--self-test"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("[FAIL]"));
}

#[test]
fn tsv_format_flag_changes_the_optima_delimiter() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "map",
        "--rho-cells",
        "1",
        "--mu-cells",
        "1",
        "--cell-paths",
        "1000",
        "--no-timing",
        "--format",
        "tsv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let optima = std::fs::read_to_string(dir.path().join("map_optima.csv")).unwrap();
    assert!(optima.lines().nth(1).unwrap().contains('\t'));
}

#[test]
fn outputs_are_reproducible_for_a_fixed_seed() {
    let run_once = |dir: &Path| {
        let out = run(&[
            "sweep",
            "--axis",
            "intensity",
            "--steps",
            "2",
            "--paths",
            "4000",
            "--seed",
            "11",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read_to_string(dir.join("sweep_intensity_tranche_000_100.dat")).unwrap()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    assert_eq!(run_once(d1.path()), run_once(d2.path()));
}
