// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Mode dispatch and deterministic CSV serialization.
//!
//! Every artifact starts with a header of `# `-prefixed lines. Lines starting with `##`
//! carry metadata and notes; the rest are the resolved configuration, so stripping the
//! prefix yields a document that reproduces the run.

use std::f64::consts::TAU;

use num_complex::Complex64;
use uscsim_core::calibrate::{
    effective_params, feasibility_check, rwa_report, FeasibilityInput, LineRates, PumpConfig, RwaThresholds,
};
use uscsim_core::fock::{compare_frames, fock_ground_state, FockConfig, Frame, TimeDependentSpec};
use uscsim_core::groundstate::{diagonalize_polaritons, ground_state_sweep, GroundStateParams};
use uscsim_core::quad::db_clamped;
use uscsim_core::spectra::{
    dip_positions, output_spectral_covariance, spectra_sweep, stability_check, stability_threshold,
};
use uscsim_core::{CovarianceMatrix, Error, Execution, SqueezingReport};

use crate::config::{Mode, RunConfig};
use crate::ellipse::{fmt, write_ellipses};
use crate::RunError;

/// Single-quadrature vacuum variance.
const VACUUM: f64 = 0.5;
/// `Var(X_a ∓ X_b) + Var(Y_a ± Y_b)` of the vacuum.
const VACUUM_EPR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Unix time written to the header; `None` keeps output byte-reproducible.
    pub timestamp: Option<u64>,
    /// Proceed past rotating-wave regime violations.
    pub force: bool,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Output written but some rows or the whole regime are invalid.
    Flagged(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub csv: String,
    pub ellipses: Option<String>,
    pub status: Status,
}

impl Artifacts {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Complete => 0,
            Status::Flagged(_) => 2,
        }
    }
}

/// Rows plus notes for one mode, before serialization.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
    ellipses: Vec<(f64, CovarianceMatrix)>,
    ellipse_label: &'static str,
    flags: Vec<String>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            ellipses: Vec::new(),
            ellipse_label: "",
            flags: Vec::new(),
        }
    }
}

fn header(cfg: &RunConfig, opts: &RunOptions, notes: &[String]) -> String {
    let mut lines = vec![format!("## uscsim {}", env!("CARGO_PKG_VERSION"))];
    if let Some(t) = opts.timestamp {
        lines.push(format!("## generated at unix time {t}"));
    }
    lines.extend(cfg.to_toml().lines().map(|l| if l.is_empty() { "#".to_string() } else { format!("# {l}") }));
    lines.extend(notes.iter().map(|n| format!("## {n}")));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn to_csv(head: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
    Ok(format!("{head}{}", String::from_utf8(body).expect("CSV output is UTF-8")))
}

/// Runs the configured mode and renders all artifacts in memory.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<Artifacts, RunError> {
    let table = match cfg.mode {
        Mode::GroundState => ground_state(cfg, opts)?,
        Mode::Spectra => spectra(cfg, opts)?,
        Mode::Sweep => sweep(cfg, opts)?,
        Mode::Stability => stability(cfg, opts)?,
        Mode::Calibrate => calibrate(cfg, opts)?,
        Mode::Oracle => oracle(cfg, opts)?,
        Mode::ValidateRwa => validate_rwa(cfg)?,
    };
    let mut notes = table.notes.clone();
    notes.extend(table.flags.iter().map(|f| format!("FLAGGED: {f}")));
    let head = header(cfg, opts, &notes);
    let csv = to_csv(&head, &table.columns, &table.rows)?;

    let ellipses = match &cfg.output.ellipses {
        Some(_) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([table.ellipse_label, "block", "semi_major", "semi_minor", "angle_rad"])?;
            for (label, v) in &table.ellipses {
                write_ellipses(&mut w, *label, v)?;
            }
            let body = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
            Some(format!("{head}{}", String::from_utf8(body).expect("CSV output is UTF-8")))
        }
        None => None,
    };
    let status = if table.flags.is_empty() { Status::Complete } else { Status::Flagged(table.flags.join("; ")) };
    Ok(Artifacts { csv, ellipses, status })
}

fn ground_params(cfg: &RunConfig) -> (GroundStateParams, f64) {
    let g = cfg.ground_state.expect("ground-state section resolved");
    let template = GroundStateParams { omega_alpha: g.omega_alpha, omega_beta: g.omega_beta, coupling: 0.0 };
    (template, (g.omega_alpha * g.omega_beta).sqrt())
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    cfg.grid.expect("grid resolved for this mode").values()
}

fn ground_state(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "G_over_delta", "var_Xa", "var_Ya", "db_Xa", "db_Ya", "var_Xminus", "var_Xplus", "var_Yplus",
        "var_Yminus", "epr_minus_plus", "epr_plus_minus", "omega1", "omega2", "valid",
    ]);
    t.ellipse_label = "G_over_delta";
    let (template, scale) = ground_params(cfg);
    t.notes.push(format!("couplings are G / sqrt(omega_alpha * omega_beta), with sqrt(omega_alpha * omega_beta) = {scale:?} rad/s"));
    let xs = grid(cfg);
    let couplings: Vec<f64> = xs.iter().map(|x| x * scale).collect();
    let mut invalid = 0;
    for (x, row) in xs.iter().zip(ground_state_sweep(&template, &couplings, opts.exec)) {
        match (row.report, row.frequencies, row.covariance) {
            (Some(r), Some((w1, w2)), Some(v)) if row.valid => {
                t.rows.push(vec![
                    fmt(*x),
                    fmt(r.var_xa),
                    fmt(r.var_ya),
                    fmt(db_clamped(r.var_xa, VACUUM)),
                    fmt(db_clamped(r.var_ya, VACUUM)),
                    fmt(r.var_xminus),
                    fmt(r.var_xplus),
                    fmt(r.var_yplus),
                    fmt(r.var_yminus),
                    fmt(r.epr_minus_plus),
                    fmt(r.epr_plus_minus),
                    fmt(w1),
                    fmt(w2),
                    "true".into(),
                ]);
                t.ellipses.push((*x, v));
            }
            _ => {
                invalid += 1;
                let mut cells = vec![fmt(*x)];
                cells.extend(std::iter::repeat_n(String::new(), 12));
                cells.push("false".into());
                t.rows.push(cells);
            }
        }
    }
    if invalid > 0 {
        t.flags.push(format!(
            "{invalid} coupling(s) at or beyond the validity bound G = {:?} rad/s",
            template.validity_bound()
        ));
    }
    Ok(t)
}

fn spectra(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "omega_over_delta", "S_Xa_dB", "S_Ya_dB", "S_Xb_dB", "S_Yb_dB", "S_Xminus_dB", "S_Yplus_dB",
        "S_Xplus_dB", "S_Yminus_dB", "epr_min", "epr_min_over_vacuum",
    ]);
    t.ellipse_label = "omega_over_delta";
    let p = cfg.system.expect("system resolved").sim_params();
    p.validate()?;
    let unit = p.delta.abs();
    let report = stability_check(&p);
    t.notes.push(format!("stability margin (max Re eig of drift) = {:?} rad/s", report.margin));
    if !report.stable {
        t.flags.push(format!("unstable drift, margin = {:?} rad/s >= 0; no spectra computed", report.margin));
        return Ok(t);
    }
    if let (Some(wa), Some(wb)) = (p.omega_a, p.omega_b) {
        t.notes.push(format!(
            "lab frequencies: mode a at {wa:?} + delta + omega, mode b at {wb:?} + delta + omega (rad/s)"
        ));
    }
    let xs = grid(cfg);
    let omegas: Vec<f64> = xs.iter().map(|x| x * unit).collect();
    let sweep = spectra_sweep(&p, &omegas, opts.exec)?;
    let dips: Vec<String> = dip_positions(&sweep).iter().map(|w| fmt(w / unit)).collect();
    t.notes.push(format!("EPR dips at omega / delta = [{}]", dips.join(", ")));
    for (x, row) in xs.iter().zip(&sweep.rows) {
        let r = &row.report;
        let mut cells = vec![fmt(*x)];
        cells.extend(r.single_mode_db().iter().map(|v| fmt(*v)));
        cells.extend(r.two_mode_db().iter().map(|v| fmt(*v)));
        cells.push(fmt(r.epr_min()));
        cells.push(fmt(r.epr_min() / VACUUM_EPR));
        t.rows.push(cells);
        t.ellipses.push((*x, row.sigma));
    }
    Ok(t)
}

/// Coupling sweep of the zero-frequency output spectrum.
fn sweep(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "G_over_delta", "stable", "margin_over_delta", "S_Xminus_dB", "S_Yplus_dB", "S_Xplus_dB",
        "S_Yminus_dB", "epr_min", "epr_min_over_vacuum",
    ]);
    let base = cfg.system.expect("system resolved").sim_params();
    let unit = base.delta.abs();
    t.notes.push("spectra evaluated at omega = 0".into());
    let xs = grid(cfg);
    let rows = opts.exec.map(&xs, |x| {
        let p = base.with_coupling(x * unit);
        let report = stability_check(&p);
        let spectrum = if report.stable { Some(output_spectral_covariance(&p, 0.0)) } else { None };
        (report, spectrum)
    });
    let mut unstable = 0;
    for (x, (report, spectrum)) in xs.iter().zip(rows) {
        let mut cells = vec![fmt(*x), report.stable.to_string(), fmt(report.margin / unit)];
        match spectrum {
            Some(v) => {
                let r = SqueezingReport::new(&v?);
                cells.extend(r.two_mode_db().iter().map(|v| fmt(*v)));
                cells.push(fmt(r.epr_min()));
                cells.push(fmt(r.epr_min() / VACUUM_EPR));
            }
            None => {
                unstable += 1;
                cells.extend(std::iter::repeat_n(String::new(), 6));
            }
        }
        t.rows.push(cells);
    }
    if unstable > 0 {
        t.flags.push(format!("{unstable} coupling(s) with unstable drift"));
    }
    Ok(t)
}

fn stability(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&["G_over_delta", "margin_over_delta", "stable"]);
    let base = cfg.system.expect("system resolved").sim_params();
    let unit = base.delta.abs();
    let xs = grid(cfg);
    let reports = opts.exec.map(&xs, |x| stability_check(&base.with_coupling(x * unit)));
    for (x, r) in xs.iter().zip(&reports) {
        t.rows.push(vec![fmt(*x), fmt(r.margin / unit), r.stable.to_string()]);
    }
    let (lo, hi) = (xs[0] * unit, xs[xs.len() - 1] * unit);
    match stability_threshold(&base, lo, hi, 1e-12 * unit) {
        Some(g) => t.notes.push(format!("stability threshold G / delta = {:?}", g / unit)),
        None => t.notes.push("no stability threshold inside the grid".into()),
    }
    Ok(t)
}

fn calibrate(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&["quantity", "value", "limit", "ok"]);
    let sys = cfg.system.expect("system resolved");
    let pump = cfg.pump.expect("pump resolved");
    let pc = PumpConfig {
        chi: pump.chi,
        c_blue: Complex64::new(pump.c_blue[0], pump.c_blue[1]),
        c_red: Complex64::new(pump.c_red[0], pump.c_red[1]),
        omega_a: sys.omega_a.expect("calibrate requires omega_a"),
        omega_b: sys.omega_b.expect("calibrate requires omega_b"),
        delta: sys.delta,
    };
    let thresholds =
        RwaThresholds { max_frequency_ratio: cfg.rwa.max_frequency_ratio, max_detuning_ratio: cfg.rwa.max_detuning_ratio };
    let rates = LineRates { gamma_a: sys.gamma_a, gamma_b: sys.gamma_b, gamma_l: sys.gamma_l };
    let value = |t: &mut Table, name: &str, v: f64| t.rows.push(vec![name.to_string(), fmt(v), String::new(), String::new()]);
    let check = |t: &mut Table, name: &str, v: f64, limit: f64, ok: bool| {
        t.rows.push(vec![name.to_string(), fmt(v), fmt(limit), ok.to_string()]);
    };

    let rwa = rwa_report(&pc, &thresholds);
    match effective_params(&pc, rates, &thresholds, opts.force) {
        Ok(cal) => {
            let unit = sys.delta.abs();
            value(&mut t, "g_blue", cal.params.g_blue);
            value(&mut t, "g_red", cal.params.g_red);
            value(&mut t, "g_blue_over_delta", cal.params.g_blue / unit);
            value(&mut t, "g_red_over_delta", cal.params.g_red / unit);
            value(&mut t, "blue_frequency", cal.blue_frequency);
            value(&mut t, "red_frequency", cal.red_frequency);
            value(&mut t, "blue_phase", cal.blue_phase);
            value(&mut t, "red_phase", cal.red_phase);
            let (theta_a, theta_b) = cal.quadrature_angles();
            value(&mut t, "theta_a", theta_a);
            value(&mut t, "theta_b", theta_b);
            let stab = stability_check(&cal.params);
            check(&mut t, "stability_margin", stab.margin, 0.0, stab.stable);
            if !rwa.passes() {
                t.notes.push("rotating-wave regime violated; results forced".into());
            }
        }
        Err(Error::Regime(msg)) => t.flags.push(format!("rotating-wave regime violated: {msg} (use --force)")),
        Err(e) => return Err(e.into()),
    }
    for (name, ratio, limit) in &rwa.ratios {
        check(&mut t, &format!("rwa {name}"), *ratio, *limit, *ratio <= *limit);
    }

    if let Some(f) = cfg.feasibility {
        let input = FeasibilityInput {
            xi_a: f.xi_a,
            xi_b: f.xi_b,
            q_a: f.q_a,
            q_b: f.q_b,
            gamma_a: sys.gamma_a,
            gamma_b: sys.gamma_b,
            delta: sys.delta.abs(),
            gamma_l: sys.gamma_l,
        };
        input.validate()?;
        let r = feasibility_check(&input, f.target_g_over_delta * sys.delta.abs());
        value(&mut t, "feasibility_bound", r.bound);
        check(&mut t, "coupling_ratio", r.coupling_ratio, r.bound, r.coupling_ok);
        check(&mut t, "detuning_ratio_a", r.detuning_ratios.0, r.bound, 1.0 < r.detuning_ratios.0 && r.detuning_ratios.0 <= r.bound);
        check(&mut t, "detuning_ratio_b", r.detuning_ratios.1, r.bound, 1.0 < r.detuning_ratios.1 && r.detuning_ratios.1 <= r.bound);
        value(&mut t, "loss_ratio", r.loss_ratio);
        t.rows.push(vec!["feasible".into(), String::new(), String::new(), r.feasible.to_string()]);
    }
    Ok(t)
}

fn oracle(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "G_over_delta", "n_max", "converged", "tail_population", "energy", "energy_closed_form", "var_Xa",
        "var_Ya", "var_Xb", "var_Yb", "max_abs_diff",
    ]);
    let (template, scale) = ground_params(cfg);
    let fock_cfg = FockConfig { n_max: cfg.oracle.n_max, convergence_pad: cfg.oracle.convergence_pad };
    let xs = grid(cfg);
    let results = opts.exec.map(&xs, |x| {
        let p = template.with_coupling(x * scale)?;
        let basis = diagonalize_polaritons(&p)?;
        let fock = fock_ground_state(&p, &fock_cfg)?;
        Ok::<_, Error>((basis, fock))
    });
    let mut bad = Vec::new();
    for (x, result) in xs.iter().zip(results) {
        match result {
            Ok((basis, fock)) => {
                let (w1, w2) = basis.frequencies();
                let closed = uscsim_core::groundstate::covariance_from_basis(&basis);
                let r = SqueezingReport::new(&fock.covariance);
                if !fock.converged {
                    bad.push(format!("G/delta = {x:?} not converged"));
                }
                t.rows.push(vec![
                    fmt(*x),
                    fock_cfg.n_max.to_string(),
                    fock.converged.to_string(),
                    fmt(fock.tail_population),
                    fmt(fock.energy),
                    fmt(0.5 * (w1 + w2 - template.omega_alpha - template.omega_beta)),
                    fmt(r.var_xa),
                    fmt(r.var_ya),
                    fmt(r.var_xb),
                    fmt(r.var_yb),
                    fmt(fock.covariance.max_abs_diff(&closed)),
                ]);
            }
            Err(e) => {
                bad.push(format!("G/delta = {x:?}: {e}"));
                let mut cells = vec![fmt(*x), fock_cfg.n_max.to_string(), "false".into()];
                cells.extend(std::iter::repeat_n(String::new(), 8));
                t.rows.push(cells);
            }
        }
    }
    if !bad.is_empty() {
        t.flags.push(bad.join("; "));
    }
    Ok(t)
}

fn validate_rwa(cfg: &RunConfig) -> Result<Table, RunError> {
    let mut t = Table::new(&[
        "t_delta", "discrepancy", "var_Xa_full", "var_Xa_effective", "var_Ya_full", "var_Ya_effective",
        "var_Xb_full", "var_Xb_effective", "var_Yb_full", "var_Yb_effective",
    ]);
    let d = cfg.dynamics;
    let spec = TimeDependentSpec {
        omega_a: d.omega_a_over_delta,
        omega_b: d.omega_b_over_delta,
        delta: 1.0,
        g_blue: d.g_over_delta,
        g_red: d.g_over_delta,
        duration: d.periods * TAU,
        tolerance: d.tolerance,
        samples: d.samples,
        frame: Frame::Effective,
    };
    let cmp = compare_frames(&spec, &FockConfig::new(d.n_max))?;
    for (i, time) in cmp.effective.times.iter().enumerate() {
        let full = SqueezingReport::new(&cmp.full_in_effective_frame[i]);
        let eff = SqueezingReport::new(&cmp.effective.covariances[i]);
        t.rows.push(vec![
            fmt(*time),
            fmt(cmp.discrepancy[i]),
            fmt(full.var_xa),
            fmt(eff.var_xa),
            fmt(full.var_ya),
            fmt(eff.var_ya),
            fmt(full.var_xb),
            fmt(eff.var_xb),
            fmt(full.var_yb),
            fmt(eff.var_yb),
        ]);
    }
    let worst = cmp.max_discrepancy();
    t.notes.push(format!("max relative discrepancy = {worst:?}"));
    t.notes.push(format!("integrator steps: full {}, effective {}", cmp.full.steps, cmp.effective.steps));
    if worst > d.max_discrepancy {
        t.flags.push(format!("rotating-wave discrepancy {worst:?} exceeds {:?}", d.max_discrepancy));
    }
    Ok(t)
}
