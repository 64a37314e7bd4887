// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `uscsim` binary.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uscsim_cli::config_from_header;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uscsim"))
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn uscsim(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Header-stripped CSV rows, split into cells.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let columns = lines.next().unwrap().split(',').map(String::from).collect();
    (columns, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (columns, rows) = rows(csv);
    let k = columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

const SYSTEM_CYCLIC: &str = "units = \"cyclic\"\n[system]\ndelta = 50e6\ngamma_a = 25e6\ngamma_b = 25e6\ngamma_l = 0.5e6\n";

#[test]
fn identical_config_gives_byte_identical_csv() {
    let cfg = bundled("fig3.conf");
    let args = ["spectra", "--config", cfg.to_str().unwrap(), "--no-timestamp", "--grid", "-2:2:201"];
    let (a, b) = (uscsim(&args), uscsim(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let stamped = uscsim(&["spectra", "--config", cfg.to_str().unwrap(), "--grid", "-2:2:201"]);
    let stamped_text = stdout(&stamped);
    let dropped: Vec<&str> = stamped_text.lines().filter(|l| !l.starts_with("## generated")).collect();
    let plain = stdout(&a);
    assert_ne!(stamped_text.lines().count(), dropped.len());
    assert_eq!(dropped, plain.lines().collect::<Vec<_>>());
}

#[test]
fn header_round_trips_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let cal = write(
        dir.path(),
        "cal.conf",
        &format!("{SYSTEM_CYCLIC}omega_a = 9e9\nomega_b = 6e9\n[pump]\nchi = 1e6\nc_blue = [15.0, 0.0]\nc_red = [0.0, 15.0]\n"),
    );
    let fig3 = bundled("fig3.conf");
    let fig1 = bundled("fig1.conf");
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("spectra", vec!["--config", fig3.to_str().unwrap(), "--grid", "-1:1:41", "--units", "cyclic"]),
        ("ground-state", vec!["--config", fig1.to_str().unwrap()]),
        ("calibrate", vec!["--config", cal.as_str()]),
        ("validate-rwa", vec![]),
    ];
    for (mode, extra) in cases {
        let mut args = vec![mode, "--no-timestamp"];
        args.extend(extra.iter().copied());
        let first = uscsim(&args);
        assert_eq!(first.status.code(), Some(0), "{mode}: {}", stderr(&first));
        let echoed = write(dir.path(), "echo.conf", &config_from_header(&stdout(&first)));
        let second = uscsim(&[mode, "--no-timestamp", "--config", &echoed]);
        assert_eq!(second.status.code(), Some(0), "{mode}: {}", stderr(&second));
        assert_eq!(stdout(&first), stdout(&second), "{mode}");
    }
}

#[test]
fn cyclic_and_angular_units_give_identical_physics() {
    let dir = tempfile::tempdir().unwrap();
    let cyclic = write(dir.path(), "c.conf", &format!("{SYSTEM_CYCLIC}g_over_delta = 0.3\n"));
    let angular = write(
        dir.path(),
        "a.conf",
        &format!(
            "units = \"angular\"\n[system]\ndelta = {:?}\ngamma_a = {:?}\ngamma_b = {:?}\ngamma_l = {:?}\ng_over_delta = 0.3\n",
            TAU * 50e6,
            TAU * 25e6,
            TAU * 25e6,
            TAU * 0.5e6
        ),
    );
    let run = |path: &str| stdout(&uscsim(&["spectra", "--no-timestamp", "--config", path, "--grid", "-3:3:301"]));
    let (c, a) = (run(&cyclic), run(&angular));
    let (columns, rc) = rows(&c);
    let (_, ra) = rows(&a);
    assert_eq!(rc.len(), 301);
    for (x, y) in rc.iter().zip(&ra) {
        for (k, (u, v)) in x.iter().zip(y).enumerate() {
            let (u, v): (f64, f64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0), "{}: {u} vs {v}", columns[k]);
        }
    }
}

#[test]
fn parse_errors_exit_one_with_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.conf", "");
    let o = uscsim(&["spectra", "--config", &empty]);
    assert_eq!(o.status.code(), Some(1));
    for key in ["system.delta", "system.gamma_a", "system.gamma_b"] {
        assert!(stderr(&o).contains(key), "{}", stderr(&o));
    }

    let negative = write(dir.path(), "neg.conf", &format!("{SYSTEM_CYCLIC}g_over_delta = 0.3\n").replace("gamma_l = 0.5e6", "gamma_l = -1"));
    let o = uscsim(&["spectra", "--config", &negative]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 6: system.gamma_l"), "{}", stderr(&o));

    let unknown = write(dir.path(), "unknown.conf", "[system]\ndelta = 1.0\nkappa = 2.0\n");
    let o = uscsim(&["spectra", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("kappa"), "{}", stderr(&o));

    let o = uscsim(&["spectra", "--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(uscsim(&["spectra", "--grid", "1:2"]).status.code(), Some(1));
    assert_eq!(uscsim(&["no-such-mode"]).status.code(), Some(1));
    assert_eq!(uscsim(&["spectra", "--units", "furlongs"]).status.code(), Some(1));
    assert_eq!(uscsim(&[]).status.code(), Some(1));
    // validate-rwa has no grid to override.
    assert_eq!(uscsim(&["validate-rwa", "--grid", "0:1:2"]).status.code(), Some(1));
    assert_eq!(uscsim(&["--help"]).status.code(), Some(0));
    assert_eq!(uscsim(&["--version"]).status.code(), Some(0));
}

#[test]
fn unstable_spectra_exit_two_with_flagged_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "u.conf", &format!("{SYSTEM_CYCLIC}g_over_delta = 0.75\n"));
    let out = dir.path().join("u.csv");
    let o = uscsim(&["spectra", "--no-timestamp", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("## FLAGGED: unstable drift"), "{text}");
    assert!(rows(&text).1.is_empty());
}

#[test]
fn invalid_couplings_flagged_in_ground_state_sweep() {
    let fig1 = bundled("fig1.conf");
    let o = uscsim(&["ground-state", "--no-timestamp", "--config", fig1.to_str().unwrap(), "--grid", "0.4:0.6:3"]);
    assert_eq!(o.status.code(), Some(2));
    let (_, r) = rows(&stdout(&o));
    let valid: Vec<&str> = r.iter().map(|row| row.last().unwrap().as_str()).collect();
    assert_eq!(valid, ["true", "false", "false"]);
}

#[test]
fn rotating_wave_violation_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cal.conf",
        &format!("{SYSTEM_CYCLIC}omega_a = 9e9\nomega_b = 6e9\n[pump]\nchi = 1e8\nc_blue = [15.0, 0.0]\nc_red = [15.0, 0.0]\n"),
    );
    let o = uscsim(&["calibrate", "--no-timestamp", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--force"));
    let forced = uscsim(&["calibrate", "--no-timestamp", "--config", &cfg, "--force"]);
    assert_eq!(forced.status.code(), Some(0), "{}", stderr(&forced));
    assert!(stdout(&forced).contains("## rotating-wave regime violated; results forced"));
}

#[test]
fn fig1_config_reproduces_closed_form_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let fig1 = bundled("fig1.conf");
    let ellipses = dir.path().join("e.csv");
    let conf = std::fs::read_to_string(&fig1).unwrap()
        + &format!("\n[output]\nellipses = {:?}\n", ellipses.to_str().unwrap());
    let cfg = write(dir.path(), "fig1e.conf", &conf);
    let o = uscsim(&["ground-state", "--no-timestamp", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let g = column(&csv, "G_over_delta");
    assert_eq!(g.len(), 49);
    let k = g.iter().position(|x| (x - 0.3).abs() < 1e-12).unwrap();
    assert!((column(&csv, "var_Xa")[k] - 0.59293).abs() < 1e-5);
    assert!((column(&csv, "var_Ya")[k] - 0.47434).abs() < 1e-5);
    assert!((column(&csv, "epr_plus_minus")[k] - 1.42302).abs() < 1e-5);

    let text = std::fs::read_to_string(&ellipses).unwrap();
    let (columns, r) = rows(&text);
    assert_eq!(columns, ["G_over_delta", "block", "semi_major", "semi_minor", "angle_rad"]);
    assert_eq!(r.len(), 49 * 4);
    let a = r.iter().find(|row| (row[0].parse::<f64>().unwrap() - 0.3).abs() < 1e-12 && row[1] == "a").unwrap();
    assert!((a[2].parse::<f64>().unwrap() - 0.59293f64.sqrt()).abs() < 1e-5);
    assert!((a[3].parse::<f64>().unwrap() - 0.47434f64.sqrt()).abs() < 1e-5);
}

#[test]
fn stability_margin_crosses_zero_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.conf", SYSTEM_CYCLIC);
    let o = uscsim(&["stability", "--no-timestamp", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let margin = column(&stdout(&o), "margin_over_delta");
    assert_eq!(margin.len(), 101);
    let crossings = margin.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    assert_eq!(crossings, 1);
    assert!(stdout(&o).contains("## stability threshold G / delta = 0.53251"));
}

#[test]
fn spectra_at_operating_point_has_expected_columns() {
    let fig3 = bundled("fig3.conf");
    let o = uscsim(&["spectra", "--no-timestamp", "--config", fig3.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let (columns, r) = rows(&csv);
    assert_eq!(
        columns,
        [
            "omega_over_delta", "S_Xa_dB", "S_Ya_dB", "S_Xb_dB", "S_Yb_dB", "S_Xminus_dB", "S_Yplus_dB",
            "S_Xplus_dB", "S_Yminus_dB", "epr_min", "epr_min_over_vacuum"
        ]
    );
    assert_eq!(r.len(), 2001);
    let ratio = column(&csv, "epr_min_over_vacuum");
    let epr = column(&csv, "epr_min");
    assert!(ratio.iter().zip(&epr).all(|(r, e)| (r - e / 2.0).abs() < 1e-15));
    assert!(csv.contains("# delta = 314159265.3589793"));
}

#[test]
fn oracle_and_rwa_validation_run_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.conf", "[ground_state]\nomega_alpha = 1.0\n[oracle]\nn_max = 30\n");
    let o = uscsim(&["oracle", "--no-timestamp", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(column(&stdout(&o), "max_abs_diff").iter().all(|d| *d < 1e-6));

    let o = uscsim(&["validate-rwa", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(column(&stdout(&o), "discrepancy").iter().all(|d| *d < 0.05));
}
