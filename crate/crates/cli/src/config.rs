// Copyright 2026 uscsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML document with a strict schema.
//!
//! Every frequency and rate is stored in rad/s once resolved. With `units = "cyclic"`
//! the document gives them in Hz and they are multiplied by 2π on load. Grid bounds
//! and `*_over_delta` keys are dimensionless and never converted.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Dotted key path, empty for document-level errors.
    pub key: String,
    /// 1-based line, when the key appears in the document.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, self.key.is_empty()) {
            (Some(line), false) => write!(f, "line {line}: {}: {}", self.key, self.message),
            (Some(line), true) => write!(f, "line {line}: {}", self.message),
            (None, false) => write!(f, "{}: {}", self.key, self.message),
            (None, true) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    GroundState,
    Spectra,
    Sweep,
    Stability,
    Calibrate,
    Oracle,
    ValidateRwa,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::GroundState => "ground-state",
            Mode::Spectra => "spectra",
            Mode::Sweep => "sweep",
            Mode::Stability => "stability",
            Mode::Calibrate => "calibrate",
            Mode::Oracle => "oracle",
            Mode::ValidateRwa => "validate-rwa",
        }
    }

    /// Default grid, in units of δ: couplings for sweeps, frequencies for spectra.
    fn default_grid(self) -> Option<GridSection> {
        let grid = |min: f64, max: f64, points: usize| Some(GridSection { min, max, points, scale: Scale::Linear });
        match self {
            Mode::GroundState | Mode::Sweep => grid(0.01, 0.49, 49),
            Mode::Spectra => grid(-3.0, 3.0, 2001),
            Mode::Stability => grid(0.0, 1.0, 101),
            Mode::Oracle => grid(0.05, 0.45, 9),
            Mode::Calibrate | Mode::ValidateRwa => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Angular,
    Cyclic,
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "angular" => Ok(Units::Angular),
            "cyclic" => Ok(Units::Cyclic),
            other => Err(format!("unknown unit convention {other:?}, expected angular or cyclic")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Shorthand for `g_blue = g_red = g_over_delta · delta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_over_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_blue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_red: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal_occupancy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStateSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_alpha: Option<f64>,
    /// Defaults to `omega_alpha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl GridSection {
    pub fn values(&self) -> Vec<f64> {
        uscsim_core::spectra::linear_grid(self.min, self.max, self.points)
    }
}

impl FromStr for GridSection {
    type Err = String;

    /// `MIN:MAX:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid {s:?} is not MIN:MAX:N"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("grid bound {p:?}: {e}"));
        let points = parts[2].trim().parse::<usize>().map_err(|e| format!("grid points {:?}: {e}", parts[2]))?;
        Ok(GridSection { min: num(parts[0])?, max: num(parts[1])?, points, scale: Scale::Linear })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    /// `[re, im]` of the blue pump amplitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_blue: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_red: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwaSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_frequency_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_detuning_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilitySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_g_over_delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_pad: Option<usize>,
}

/// Time-dependent validation, all in units of δ.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_a_over_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_b_over_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_over_delta: Option<f64>,
    /// Duration in periods `2π/δ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Largest acceptable relative covariance discrepancy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Companion file with 1-σ ellipse parameters per row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipses: Option<String>,
}

/// The document as written. Also the serialized form of a resolved run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_state: Option<GroundStateSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rwa: Option<RwaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub units: Option<Units>,
    pub grid: Option<GridSection>,
    pub output: Option<String>,
}

/// Fully resolved, validated run in angular units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub system: Option<System>,
    pub ground_state: Option<GroundState>,
    pub grid: Option<GridSection>,
    pub pump: Option<Pump>,
    pub rwa: Rwa,
    pub feasibility: Option<Feasibility>,
    pub oracle: Oracle,
    pub dynamics: Dynamics,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct System {
    pub delta: f64,
    pub g_blue: f64,
    pub g_red: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_l: f64,
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    pub thermal_occupancy: f64,
}

impl System {
    pub fn sim_params(&self) -> uscsim_core::spectra::SimParams {
        uscsim_core::spectra::SimParams {
            delta: self.delta,
            g_blue: self.g_blue,
            g_red: self.g_red,
            gamma_a: self.gamma_a,
            gamma_b: self.gamma_b,
            gamma_l: self.gamma_l,
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            thermal_occupancy: self.thermal_occupancy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    pub omega_alpha: f64,
    pub omega_beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pump {
    pub chi: f64,
    pub c_blue: [f64; 2],
    pub c_red: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rwa {
    pub max_frequency_ratio: f64,
    pub max_detuning_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub xi_a: f64,
    pub xi_b: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub target_g_over_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oracle {
    pub n_max: usize,
    pub convergence_pad: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub omega_a_over_delta: f64,
    pub omega_b_over_delta: f64,
    pub g_over_delta: f64,
    pub periods: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub n_max: usize,
    pub max_discrepancy: f64,
}

/// 1-based line of `key` inside `[section]` (or the root table when `section` is empty).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Resolver<'a> {
    text: &'a str,
    scale: f64,
}

impl Resolver<'_> {
    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        ConfigError { key: path, line: locate(self.text, section, key), message: message.into() }
    }

    /// A frequency or rate, converted to rad/s.
    fn rate(&self, section: &str, key: &str, value: Option<f64>, check: Range) -> Result<Option<f64>, ConfigError> {
        self.number(section, key, value, check).map(|v| v.map(|x| x * self.scale))
    }

    fn number(&self, section: &str, key: &str, value: Option<f64>, check: Range) -> Result<Option<f64>, ConfigError> {
        match value {
            None => Ok(None),
            Some(v) if !v.is_finite() => Err(self.error(section, key, format!("must be finite, got {v}"))),
            Some(v) => match check {
                Range::Any => Ok(Some(v)),
                Range::NonNegative if v >= 0.0 => Ok(Some(v)),
                Range::NonNegative => Err(self.error(section, key, format!("must be >= 0, got {v}"))),
                Range::Positive if v > 0.0 => Ok(Some(v)),
                Range::Positive => Err(self.error(section, key, format!("must be > 0, got {v}"))),
                Range::Open01 if v > 0.0 && v < 1.0 => Ok(Some(v)),
                Range::Open01 => Err(self.error(section, key, format!("must lie in (0, 1), got {v}"))),
            },
        }
    }
}

#[derive(Clone, Copy)]
enum Range {
    Any,
    NonNegative,
    Positive,
    Open01,
}

fn toml_error(text: &str, e: toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    ConfigError { key: String::new(), line, message: e.message().trim().to_string() }
}

/// Parses and validates a document for `mode`, applying command-line overrides.
pub fn parse_config(text: &str, mode: Mode, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| toml_error(text, e))?;
    resolve(text, doc, mode, overrides)
}

fn missing(keys: Vec<&str>) -> ConfigError {
    ConfigError { key: String::new(), line: None, message: format!("missing required keys: {}", keys.join(", ")) }
}

fn resolve(text: &str, doc: Document, mode: Mode, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    if let Some(m) = doc.mode {
        if m != mode {
            return Err(ConfigError {
                key: "mode".into(),
                line: locate(text, "", "mode"),
                message: format!("document is for {:?} but {:?} was requested", m.name(), mode.name()),
            });
        }
    }
    let units = overrides.units.or(doc.units).unwrap_or_default();
    let r = Resolver { text, scale: if units == Units::Cyclic { TAU } else { 1.0 } };

    let needs_system = matches!(mode, Mode::Spectra | Mode::Sweep | Mode::Stability | Mode::Calibrate);
    let needs_ground = matches!(mode, Mode::GroundState | Mode::Oracle);

    let system = match (&doc.system, needs_system) {
        (Some(s), true) => Some(resolve_system(&r, s, mode)?),
        (None, true) => {
            let mut keys = vec!["system.delta", "system.gamma_a", "system.gamma_b"];
            if mode == Mode::Spectra {
                keys.push("system.g_over_delta (or system.g_blue and system.g_red)");
            }
            return Err(missing(keys));
        }
        (Some(_), false) => return Err(r.error("", "system", format!("section not used by {}", mode.name()))),
        (None, false) => None,
    };

    let ground_state = match (&doc.ground_state, needs_ground) {
        (Some(g), true) => {
            let alpha = r.rate("ground_state", "omega_alpha", g.omega_alpha, Range::Positive)?;
            let beta = r.rate("ground_state", "omega_beta", g.omega_beta, Range::Positive)?;
            let alpha = alpha.ok_or_else(|| missing(vec!["ground_state.omega_alpha"]))?;
            Some(GroundState { omega_alpha: alpha, omega_beta: beta.unwrap_or(alpha) })
        }
        (None, true) => return Err(missing(vec!["ground_state.omega_alpha"])),
        (Some(_), false) => return Err(r.error("", "ground_state", format!("section not used by {}", mode.name()))),
        (None, false) => None,
    };

    let grid = match (overrides.grid.or(doc.grid), mode.default_grid()) {
        (Some(_), None) => return Err(r.error("", "grid", format!("no grid is used by {}", mode.name()))),
        (Some(g), Some(_)) => Some(g),
        (None, default) => default,
    };
    if let Some(g) = &grid {
        if !(g.min.is_finite() && g.max.is_finite()) || g.max < g.min {
            return Err(r.error("grid", "max", format!("need finite min <= max, got {}..{}", g.min, g.max)));
        }
        if g.points == 0 || (g.points == 1 && g.min != g.max) {
            return Err(r.error("grid", "points", format!("need at least 2 points for a range, got {}", g.points)));
        }
        if mode != Mode::Spectra && g.min < 0.0 {
            return Err(r.error("grid", "min", format!("coupling grid must be >= 0, got {}", g.min)));
        }
    }

    let pump = match (&doc.pump, mode == Mode::Calibrate) {
        (Some(p), true) => {
            let chi = r.rate("pump", "chi", p.chi, Range::NonNegative)?;
            let chi = chi.ok_or_else(|| missing(vec!["pump.chi"]))?;
            for (key, c) in [("c_blue", p.c_blue), ("c_red", p.c_red)] {
                if let Some(c) = c {
                    if !c.iter().all(|x| x.is_finite()) {
                        return Err(r.error("pump", key, "components must be finite"));
                    }
                }
            }
            Some(Pump { chi, c_blue: p.c_blue.unwrap_or([0.0, 0.0]), c_red: p.c_red.unwrap_or([0.0, 0.0]) })
        }
        (None, true) => return Err(missing(vec!["pump.chi", "pump.c_blue", "pump.c_red"])),
        (Some(_), false) => return Err(r.error("", "pump", format!("section not used by {}", mode.name()))),
        (None, false) => None,
    };

    let rw = doc.rwa.clone().unwrap_or_default();
    let defaults = uscsim_core::calibrate::RwaThresholds::default();
    let rwa = Rwa {
        max_frequency_ratio: r
            .number("rwa", "max_frequency_ratio", rw.max_frequency_ratio, Range::Positive)?
            .unwrap_or(defaults.max_frequency_ratio),
        max_detuning_ratio: r
            .number("rwa", "max_detuning_ratio", rw.max_detuning_ratio, Range::Positive)?
            .unwrap_or(defaults.max_detuning_ratio),
    };

    let feasibility = match &doc.feasibility {
        Some(f) if mode == Mode::Calibrate => {
            let get = |key: &str, v: Option<f64>, range: Range| -> Result<f64, ConfigError> {
                r.number("feasibility", key, v, range)?
                    .ok_or_else(|| missing(vec![Box::leak(format!("feasibility.{key}").into_boxed_str())]))
            };
            Some(Feasibility {
                xi_a: get("xi_a", f.xi_a, Range::Open01)?,
                xi_b: get("xi_b", f.xi_b, Range::Open01)?,
                q_a: get("q_a", f.q_a, Range::Positive)?,
                q_b: get("q_b", f.q_b, Range::Positive)?,
                target_g_over_delta: r
                    .number("feasibility", "target_g_over_delta", f.target_g_over_delta, Range::NonNegative)?
                    .unwrap_or(0.5),
            })
        }
        Some(_) => return Err(r.error("", "feasibility", format!("section not used by {}", mode.name()))),
        None => None,
    };

    let o = doc.oracle.clone().unwrap_or_default();
    let oracle = Oracle { n_max: o.n_max.unwrap_or(30), convergence_pad: o.convergence_pad.unwrap_or(5) };
    if oracle.n_max < 2 {
        return Err(r.error("oracle", "n_max", format!("must be >= 2, got {}", oracle.n_max)));
    }

    let d = doc.dynamics.clone().unwrap_or_default();
    let dynamics = Dynamics {
        omega_a_over_delta: r.number("dynamics", "omega_a_over_delta", d.omega_a_over_delta, Range::Positive)?.unwrap_or(40.0),
        omega_b_over_delta: r.number("dynamics", "omega_b_over_delta", d.omega_b_over_delta, Range::Positive)?.unwrap_or(27.0),
        g_over_delta: r.number("dynamics", "g_over_delta", d.g_over_delta, Range::NonNegative)?.unwrap_or(0.2),
        periods: r.number("dynamics", "periods", d.periods, Range::Positive)?.unwrap_or(1.0),
        tolerance: r.number("dynamics", "tolerance", d.tolerance, Range::Positive)?.unwrap_or(1e-10),
        samples: d.samples.unwrap_or(101),
        n_max: d.n_max.unwrap_or(8),
        max_discrepancy: r.number("dynamics", "max_discrepancy", d.max_discrepancy, Range::Positive)?.unwrap_or(0.05),
    };
    if dynamics.samples < 2 {
        return Err(r.error("dynamics", "samples", format!("must be >= 2, got {}", dynamics.samples)));
    }
    if dynamics.n_max < 2 {
        return Err(r.error("dynamics", "n_max", format!("must be >= 2, got {}", dynamics.n_max)));
    }

    let mut output = doc.output.clone().unwrap_or_default();
    if output.ellipses.is_some() && !matches!(mode, Mode::GroundState | Mode::Spectra) {
        return Err(r.error("output", "ellipses", format!("no covariance rows to draw in {}", mode.name())));
    }
    if overrides.output.is_some() {
        output.path = overrides.output.clone();
    }

    Ok(RunConfig { mode, system, ground_state, grid, pump, rwa, feasibility, oracle, dynamics, output })
}

fn resolve_system(r: &Resolver<'_>, s: &SystemSection, mode: Mode) -> Result<System, ConfigError> {
    const S: &str = "system";
    let delta = r.rate(S, "delta", s.delta, Range::Any)?;
    let gamma_a = r.rate(S, "gamma_a", s.gamma_a, Range::NonNegative)?;
    let gamma_b = r.rate(S, "gamma_b", s.gamma_b, Range::NonNegative)?;
    let gamma_l = r.rate(S, "gamma_l", s.gamma_l, Range::NonNegative)?.unwrap_or(0.0);
    let g_over = r.number(S, "g_over_delta", s.g_over_delta, Range::NonNegative)?;
    let g_blue = r.rate(S, "g_blue", s.g_blue, Range::NonNegative)?;
    let g_red = r.rate(S, "g_red", s.g_red, Range::NonNegative)?;
    let omega_a = r.rate(S, "omega_a", s.omega_a, Range::Positive)?;
    let omega_b = r.rate(S, "omega_b", s.omega_b, Range::Positive)?;
    let thermal = r.number(S, "thermal_occupancy", s.thermal_occupancy, Range::NonNegative)?.unwrap_or(0.0);

    let mut absent = Vec::new();
    if delta.is_none() {
        absent.push("system.delta");
    }
    if gamma_a.is_none() {
        absent.push("system.gamma_a");
    }
    if gamma_b.is_none() {
        absent.push("system.gamma_b");
    }
    // Coupling sweeps and calibration set the coupling themselves.
    let coupling_needed = mode == Mode::Spectra;
    if coupling_needed && g_over.is_none() && (g_blue.is_none() || g_red.is_none()) {
        absent.push("system.g_over_delta (or system.g_blue and system.g_red)");
    }
    if mode == Mode::Calibrate {
        if omega_a.is_none() {
            absent.push("system.omega_a");
        }
        if omega_b.is_none() {
            absent.push("system.omega_b");
        }
    }
    if !absent.is_empty() {
        return Err(missing(absent));
    }
    let delta = delta.unwrap();
    if delta == 0.0 {
        return Err(r.error(S, "delta", "must be non-zero"));
    }
    if g_over.is_some() && (g_blue.is_some() || g_red.is_some()) {
        return Err(r.error(S, "g_over_delta", "give either g_over_delta or g_blue/g_red, not both"));
    }
    if !coupling_needed && (g_over.is_some() || g_blue.is_some() || g_red.is_some()) {
        let key = if g_over.is_some() { "g_over_delta" } else if g_blue.is_some() { "g_blue" } else { "g_red" };
        return Err(r.error(S, key, format!("coupling is set by the {} mode itself", mode.name())));
    }
    let (g_blue, g_red) = match g_over {
        Some(g) => (g * delta.abs(), g * delta.abs()),
        None => (g_blue.unwrap_or(0.0), g_red.unwrap_or(0.0)),
    };
    let (gamma_a, gamma_b) = (gamma_a.unwrap(), gamma_b.unwrap());
    if gamma_a + gamma_l <= 0.0 {
        return Err(r.error(S, "gamma_a", "gamma_a + gamma_l must be > 0"));
    }
    if gamma_b + gamma_l <= 0.0 {
        return Err(r.error(S, "gamma_b", "gamma_b + gamma_l must be > 0"));
    }
    Ok(System { delta, g_blue, g_red, gamma_a, gamma_b, gamma_l, omega_a, omega_b, thermal_occupancy: thermal })
}

impl RunConfig {
    /// The resolved run as a document in angular units, with every default spelled out.
    pub fn to_document(&self) -> Document {
        let mut doc = Document { mode: Some(self.mode), units: Some(Units::Angular), ..Document::default() };
        if let Some(s) = &self.system {
            let coupling_set = self.mode == Mode::Spectra;
            doc.system = Some(SystemSection {
                delta: Some(s.delta),
                g_over_delta: None,
                g_blue: coupling_set.then_some(s.g_blue),
                g_red: coupling_set.then_some(s.g_red),
                gamma_a: Some(s.gamma_a),
                gamma_b: Some(s.gamma_b),
                gamma_l: Some(s.gamma_l),
                omega_a: s.omega_a,
                omega_b: s.omega_b,
                thermal_occupancy: Some(s.thermal_occupancy),
            });
        }
        if let Some(g) = &self.ground_state {
            doc.ground_state = Some(GroundStateSection { omega_alpha: Some(g.omega_alpha), omega_beta: Some(g.omega_beta) });
        }
        doc.grid = self.grid;
        if let Some(p) = &self.pump {
            doc.pump = Some(PumpSection { chi: Some(p.chi), c_blue: Some(p.c_blue), c_red: Some(p.c_red) });
        }
        if self.mode == Mode::Calibrate {
            doc.rwa = Some(RwaSection {
                max_frequency_ratio: Some(self.rwa.max_frequency_ratio),
                max_detuning_ratio: Some(self.rwa.max_detuning_ratio),
            });
        }
        if let Some(f) = &self.feasibility {
            doc.feasibility = Some(FeasibilitySection {
                xi_a: Some(f.xi_a),
                xi_b: Some(f.xi_b),
                q_a: Some(f.q_a),
                q_b: Some(f.q_b),
                target_g_over_delta: Some(f.target_g_over_delta),
            });
        }
        if self.mode == Mode::Oracle {
            doc.oracle = Some(OracleSection { n_max: Some(self.oracle.n_max), convergence_pad: Some(self.oracle.convergence_pad) });
        }
        if self.mode == Mode::ValidateRwa {
            let d = &self.dynamics;
            doc.dynamics = Some(DynamicsSection {
                omega_a_over_delta: Some(d.omega_a_over_delta),
                omega_b_over_delta: Some(d.omega_b_over_delta),
                g_over_delta: Some(d.g_over_delta),
                periods: Some(d.periods),
                tolerance: Some(d.tolerance),
                samples: Some(d.samples),
                n_max: Some(d.n_max),
                max_discrepancy: Some(d.max_discrepancy),
            });
        }
        if self.output != OutputSection::default() {
            doc.output = Some(self.output.clone());
        }
        doc
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_document()).expect("resolved config serializes")
    }
}

/// Recovers the configuration echoed in the `# `-prefixed header of an output file.
pub fn config_from_header(output: &str) -> String {
    output
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter(|l| !l.starts_with("##"))
        .map(|l| l.strip_prefix("# ").unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}
