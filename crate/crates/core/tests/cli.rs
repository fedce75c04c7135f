use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evykit::estimation::synthetic_series;
use evykit::yields::msy_schaefer;
use evykit::LvParams;
use tempfile::TempDir;

const MODEL: &str = "[model]\nr = 2.25\nl = 0.945\nk = 37285000\nalpha = 1.22e-6\nbeta = 4.845e-8\n";
const FLOORS: &str = "[constraints]\nmin_biomass_prey = 7000000\nmin_biomass_pred = 200000\n";

fn evykit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evykit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.ini");
    fs::write(&path, config).unwrap();
    (dir, path)
}

fn cmd(dir: &TempDir, command: &str) -> Output {
    evykit(dir.path(), &[command, "--config", "run.ini", "--out", "out"])
}

/// `key = value` lookup in a report.
fn value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{report}"))
        .to_string()
}

fn read(dir: &TempDir, name: &str) -> String {
    fs::read_to_string(dir.path().join("out").join(name)).unwrap()
}

#[test]
fn evy_on_peru() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}[state0]\nprey = 10000000\npred = 300000\n"));
    let out = cmd(&dir, "evy");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read(&dir, "evy_report.txt");
    assert!(r.starts_with("# evykit 0.1.0 config_sha256="));
    let prey: f64 = value(&r, "evy_prey").parse().unwrap();
    let pred: f64 = value(&r, "evy_pred").parse().unwrap();
    assert!((prey - 5_399_248.223).abs() < 1e-2, "{prey}");
    assert!((pred - 56_830.0).abs() < 1e-6, "{pred}");
    assert_eq!(value(&r, "binding_prey"), "equilibrium-capped");
    assert_eq!(value(&r, "favorable_conditions_at_evy"), "true");
    let csv = read(&dir, "evy.csv");
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn outputs_are_reproducible() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}[simulate]\npolicy = viable_greedy\nhorizon = 20\n[state0]\nprey = 12000000\npred = 300000\n"));
    assert_eq!(cmd(&dir, "simulate").status.code(), Some(0));
    let first = read(&dir, "trajectory.csv");
    assert_eq!(cmd(&dir, "simulate").status.code(), Some(0));
    assert_eq!(first, read(&dir, "trajectory.csv"));
    assert_eq!(
        first.lines().nth(1).unwrap(),
        "year,y,z,v,w,catch_y,catch_z,in_kernel,constraints_ok"
    );
}

#[test]
fn catch_request_above_evy_is_domain_failure() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}min_catch_prey = 6000000\n"));
    let out = cmd(&dir, "evy");
    assert_eq!(out.status.code(), Some(3));
    assert!(read(&dir, "evy_report.txt").contains("audit: min_catch_prey"));
}

#[test]
fn initial_state_below_floor_is_domain_failure() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}[state0]\nprey = 6000000\npred = 300000\n"));
    let out = cmd(&dir, "evy");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("y0 >= y_min"));
}

#[test]
fn config_errors() {
    let (dir, _) = setup(MODEL);
    let out = cmd(&dir, "evy");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("min_biomass_prey"));

    let (dir, _) = setup(&format!("{MODEL}{FLOORS}colour = blue\n"));
    assert_eq!(cmd(&dir, "evy").status.code(), Some(2));

    let (dir, _) = setup(&format!("{MODEL}{FLOORS}"));
    assert_eq!(cmd(&dir, "fit").status.code(), Some(2));
    assert_eq!(evykit(dir.path(), &["bogus", "--config", "run.ini"]).status.code(), Some(2));
}

#[test]
fn io_errors() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}"));
    assert_eq!(evykit(dir.path(), &["evy", "--config", "missing.ini"]).status.code(), Some(4));
    fs::write(dir.path().join("blocker"), "").unwrap();
    let out = evykit(dir.path(), &["evy", "--config", "run.ini", "--out", "blocker/sub"]);
    assert_eq!(out.status.code(), Some(4));
    let out = evykit(dir.path(), &["fit", "--config", "run.ini", "--data", "nope.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn kernel_default_and_edge_grids() {
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}"));
    assert_eq!(cmd(&dir, "kernel").status.code(), Some(0));
    let s = read(&dir, "kernel_summary.txt");
    assert!(value(&s, "agreement_pct").parse::<f64>().unwrap() >= 99.0);
    assert!(value(&s, "stationary_at").parse::<usize>().unwrap() <= 2);
    assert_eq!(read(&dir, "kernel.csv").lines().count(), 2 + 200 * 200);

    let (dir, _) = setup(&format!("{MODEL}{FLOORS}[grid]\ncells = 2\n"));
    assert_eq!(cmd(&dir, "kernel").status.code(), Some(0));
    assert!(read(&dir, "kernel_summary.txt").contains("agreement_pct = "));

    let grid = "[grid]\ny_min = 0\ny_max = 5000000\nz_min = 0\nz_max = 100000\ncells = 20\n";
    let (dir, _) = setup(&format!("{MODEL}{FLOORS}{grid}"));
    assert_eq!(cmd(&dir, "kernel").status.code(), Some(0));
    assert_eq!(value(&read(&dir, "kernel_summary.txt"), "empty"), "true");
}

#[test]
fn fit_round_trip() {
    let efforts = [[0.30, 0.25], [0.50, 0.30], [0.20, 0.35], [0.60, 0.20], [0.30, 0.45], [0.40, 0.30],
        [0.50, 0.25], [0.25, 0.40], [0.45, 0.30], [0.35, 0.35], [0.30, 0.30]];
    let s = synthetic_series(&LvParams::peru(), [1.5e7, 4e5], &efforts, 1971).unwrap();
    let guess = "[fit]\nr = 2.7\nl = 0.756\nk = 44742000\nalpha = 9.76e-7\nbeta = 5.814e-8\n";
    let (dir, _) = setup(guess);
    let mut data = Vec::new();
    s.write_csv(&mut data).unwrap();
    fs::write(dir.path().join("obs.csv"), data).unwrap();
    let out = evykit(dir.path(), &["fit", "--config", "run.ini", "--data", "obs.csv", "--out", "out"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read(&dir, "fit_params.txt");
    let truth = LvParams::peru().to_array();
    for (key, t) in ["r", "l", "k", "alpha", "beta"].iter().zip(truth) {
        let got: f64 = value(&r, key).parse().unwrap();
        assert!((got - t).abs() / t < 0.05, "{key}: {got} vs {t}");
    }
    assert_eq!(read(&dir, "fit_trajectory.csv").lines().count(), 2 + 11);
}

#[test]
fn simulate_and_audit() {
    let base = format!("{MODEL}{FLOORS}min_catch_prey = 5000000\nmin_catch_pred = 50000\n[state0]\nprey = 12000000\npred = 300000\n");
    let (dir, _) = setup(&format!("{base}[simulate]\npolicy = viable_min\nhorizon = 100\n"));
    assert_eq!(cmd(&dir, "simulate").status.code(), Some(0));
    let r = read(&dir, "simulate_report.txt");
    assert_eq!(value(&r, "violations"), "0");
    assert_eq!(cmd(&dir, "audit").status.code(), Some(0));

    // the saved trajectory audits clean, a doctored one does not
    let traj = read(&dir, "trajectory.csv");
    fs::write(dir.path().join("t.csv"), &traj).unwrap();
    let ok = evykit(dir.path(), &["audit", "--config", "run.ini", "--data", "t.csv", "--out", "out"]);
    assert_eq!(ok.status.code(), Some(0));
    let mut lines: Vec<String> = traj.lines().map(String::from).collect();
    let mut cols: Vec<String> = lines[5].split(',').map(String::from).collect();
    cols[5] = "1".into();
    lines[5] = cols.join(",");
    fs::write(dir.path().join("bad.csv"), lines.join("\n")).unwrap();
    let bad = evykit(dir.path(), &["audit", "--config", "run.ini", "--data", "bad.csv", "--out", "out"]);
    assert_eq!(bad.status.code(), Some(3));
    assert_eq!(value(&read(&dir, "audit_report.txt"), "first_violation_year"), "3");

    let (dir, _) = setup(&format!("{base}[simulate]\npolicy = constant_catch\ncatch_prey = 30000000\ncatch_pred = 0\nhorizon = 5\n"));
    assert_eq!(cmd(&dir, "audit").status.code(), Some(3));
}

#[test]
fn msy_uncoupled_is_schaefer() {
    let (dir, _) = setup("[model]\nr = 2.25\nl = 0.945\nk = 37285000\nalpha = 0\nbeta = 0\n");
    assert_eq!(cmd(&dir, "msy").status.code(), Some(0));
    let r = read(&dir, "msy_report.txt");
    let got: f64 = value(&r, "msy_prey").parse().unwrap();
    let want = msy_schaefer(&LvParams::uncoupled(2.25, 0.945, 37_285e3).unwrap()).msy;
    assert!((got - want).abs() / want < 1e-6, "{got} vs {want}");
    assert_eq!(value(&r, "msy_pred"), "none");
}
