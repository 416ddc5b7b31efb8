//! Configuration, the verification experiments and their reports.
//!
//! Every subcommand reads one [`RunConfig`] (a TOML file, or the defaults),
//! applies flag overrides, runs its experiment and writes a CSV or JSON
//! report. Exit codes: [`EXIT_PASS`], [`EXIT_FAILURE`], [`EXIT_USAGE`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::deformation::{convergence_study, validate_schedule, DeformationError};
use crate::lie_model::model_by_name;
use crate::motion_group::{Grading, InverseFourierGrid, MotionError, MotionGroup, OperatorProfile, ScalarProfile};
use crate::pairing::{
    complex_pair, formal_degree, l2_scaling, pairing_value, Method, PairingError, PairingReport, T0Pairing,
};
use crate::quadrature::{ChartKind, KModulation, Resolution, SmoothTestFunction};
use crate::root_character::{det_p_both_ways, HalfWeight, TorusElement, REGULARITY_EPS};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "CARTAN_THREADS";
pub const TOOL_NAME: &str = "cartan-motion";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const MIN_TORUS: usize = 8;
pub const MIN_RADIAL: usize = 16;
pub const MIN_ANGULAR: usize = 8;

/// Recognized keys of the `tolerances` table and `--tolerance.<name>`.
pub const TOLERANCE_NAMES: [&str; 5] = ["det", "prop_tau", "limit", "pair", "l2"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("x not regular: {0:?}")]
    NotRegular(Vec<f64>),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}

impl From<DeformationError> for CliError {
    fn from(e: DeformationError) -> Self {
        match e {
            DeformationError::Motion(MotionError::Singular(x)) => CliError::NotRegular(x),
            DeformationError::BadSchedule(_) | DeformationError::NonPositiveT(_) => CliError::Config(e.to_string()),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<MotionError> for CliError {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::Singular(x) => CliError::NotRegular(x),
            e => CliError::Compute(e.to_string()),
        }
    }
}

impl From<PairingError> for CliError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::Motion(m) => m.into(),
            PairingError::ZeroDegree(_) | PairingError::NonPositiveT(_) | PairingError::TOutOfRange(_) => {
                CliError::Config(e.to_string())
            }
            e => CliError::Compute(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    #[default]
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub torus: usize,
    pub radial: usize,
    pub angular: usize,
    pub cartesian: usize,
    pub chart: Chart,
    pub inverse_radial: usize,
    pub inverse_angular: usize,
    pub inverse_u_points: usize,
    /// Support radius of the bump used by `verify-limit`.
    pub bump_radius: f64,
    /// `c` in the profile `g(z) = e^{−c|z|²}` used by `prop-tau` and `pair`.
    pub profile_rate: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let res = Resolution::default();
        let inverse = InverseFourierGrid::default();
        Self {
            torus: res.torus,
            radial: res.radial,
            angular: res.angular,
            cartesian: res.cartesian,
            chart: Chart::Polar,
            inverse_radial: inverse.radial,
            inverse_angular: inverse.angular,
            inverse_u_points: inverse.u_points,
            bump_radius: 2.0,
            profile_rate: 1.0,
        }
    }
}

impl GridConfig {
    pub fn resolution(&self) -> Resolution {
        Resolution {
            torus: self.torus,
            radial: self.radial,
            angular: self.angular,
            cartesian: self.cartesian,
            chart: match self.chart {
                Chart::Polar => ChartKind::Polar,
                Chart::Cartesian => ChartKind::Cartesian,
            },
        }
    }

    pub fn inverse_grid(&self) -> InverseFourierGrid {
        InverseFourierGrid {
            radial: self.inverse_radial,
            angular: self.inverse_angular,
            u_points: self.inverse_u_points,
        }
    }

    pub fn signature(&self) -> String {
        format!(
            "torus={} radial={} angular={} cartesian={} chart={:?} inverse={}x{}x{} bump_radius={} profile_rate={}",
            self.torus,
            self.radial,
            self.angular,
            self.cartesian,
            self.chart,
            self.inverse_radial,
            self.inverse_angular,
            self.inverse_u_points,
            self.bump_radius,
            self.profile_rate
        )
    }

    fn validate(&self) -> Result<(), CliError> {
        let counts = [
            ("torus", self.torus, MIN_TORUS),
            ("radial", self.radial, MIN_RADIAL),
            ("angular", self.angular, MIN_ANGULAR),
            ("cartesian", self.cartesian, MIN_RADIAL),
            ("inverse_radial", self.inverse_radial, MIN_RADIAL),
            ("inverse_angular", self.inverse_angular, MIN_ANGULAR),
            ("inverse_u_points", self.inverse_u_points, 1),
        ];
        for (name, value, min) in counts {
            if value < min {
                return Err(CliError::Config(format!("grid.{name} = {value} is below the minimum {min}")));
            }
        }
        for (name, value) in [("bump_radius", self.bump_radius), ("profile_rate", self.profile_rate)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!("grid.{name} must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// One experiment's inputs. Missing keys take their defaults; `x_angles`
/// and `mu` default per model rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub grid: GridConfig,
    /// Torus elements, `rank` consecutive angles each.
    pub x_angles: Option<Vec<f64>>,
    pub mu: Option<Vec<i32>>,
    pub t_schedule: Vec<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "sl2r".into(),
            grid: GridConfig::default(),
            x_angles: None,
            mu: None,
            t_schedule: (0..7).map(|k| 0.5f64.powi(k)).collect(),
            tolerances: BTreeMap::new(),
            output: OutputConfig::default(),
        }
    }
}

/// `θ ∈ {π/5, π/3, π/2, 2π/3}`, repeated in every factor.
pub fn default_x_angles(rank: usize) -> Vec<f64> {
    [PI / 5.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0]
        .iter()
        .flat_map(|&a| std::iter::repeat(a).take(rank))
        .collect()
}

pub fn default_mu(rank: usize) -> Vec<i32> {
    vec![2; rank]
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Defaults overlaid with the configured `tolerances`.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        for (name, &value) in &self.tolerances {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance {name} must be positive and finite, got {value}"
                )));
            }
            *tol.slot(name)? = value;
        }
        Ok(tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub det: f64,
    pub prop_tau: f64,
    pub limit: f64,
    pub pair: f64,
    pub l2: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            det: 1e-10,
            prop_tau: 1e-6,
            limit: 1e-3,
            pair: 1e-6,
            l2: 1e-12,
        }
    }
}

impl Tolerances {
    fn slot(&mut self, name: &str) -> Result<&mut f64, CliError> {
        Ok(match name {
            "det" => &mut self.det,
            "prop_tau" => &mut self.prop_tau,
            "limit" => &mut self.limit,
            "pair" => &mut self.pair,
            "l2" => &mut self.l2,
            other => {
                return Err(CliError::Config(format!(
                    "unknown tolerance {other:?} (expected one of {TOLERANCE_NAMES:?})"
                )))
            }
        })
    }
}

/// A report cell. Numbers print with 17 significant digits in CSV and as
/// shortest round-trip decimals in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    pub fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        writer.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::other(e)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub command: &'static str,
    pub pass: bool,
    pub tolerance: f64,
    pub grid_signature: String,
    pub table: Table,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub extra: Option<Value>,
}

impl ExperimentReport {
    fn new(command: &'static str, tolerance: f64, grid_signature: String, columns: Vec<String>) -> Self {
        Self {
            command,
            pass: true,
            tolerance,
            grid_signature,
            table: Table::new(columns),
            notes: Vec::new(),
            warnings: Vec::new(),
            extra: None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "command": self.command,
            "pass": self.pass,
            "tolerance": self.tolerance,
            "grid_signature": self.grid_signature,
            "table": self.table.to_json(),
            "notes": self.notes,
            "warnings": self.warnings,
        });
        if let Some(extra) = &self.extra {
            v["details"] = extra.clone();
        }
        v
    }
}

fn theta_columns(rank: usize) -> Vec<String> {
    if rank == 1 {
        vec!["theta".into()]
    } else {
        (1..=rank).map(|i| format!("theta{i}")).collect()
    }
}

fn columns(rank: usize, rest: &[&str]) -> Vec<String> {
    let mut out = theta_columns(rank);
    out.extend(rest.iter().map(|s| s.to_string()));
    out
}

fn angle_cells(angles: &[f64]) -> Vec<Cell> {
    angles.iter().map(|&a| Cell::Num(a)).collect()
}

/// A validated configuration bound to its model.
pub struct Experiment {
    pub config: RunConfig,
    pub group: MotionGroup,
    pub res: Resolution,
    pub inverse: InverseFourierGrid,
    /// The configured angles, as given.
    pub x_angles: Vec<Vec<f64>>,
    pub mu: HalfWeight,
    pub mu_coords: Vec<i32>,
    pub tol: Tolerances,
}

impl Experiment {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let model = model_by_name(&config.model).map_err(|e| CliError::Config(e.to_string()))?;
        let group = MotionGroup::new(model).map_err(|e| CliError::Config(e.to_string()))?;
        let rank = group.rank();
        config.grid.validate()?;
        let flat = config.x_angles.clone().unwrap_or_else(|| default_x_angles(rank));
        if flat.is_empty() {
            return Err(CliError::Config("x_angles is empty".into()));
        }
        if flat.len() % rank != 0 {
            return Err(CliError::Config(format!(
                "x_angles has {} entries, not a multiple of the rank {rank}",
                flat.len()
            )));
        }
        if let Some(a) = flat.iter().find(|a| !a.is_finite()) {
            return Err(CliError::Config(format!("x_angles contains {a}")));
        }
        let mu_coords = config.mu.clone().unwrap_or_else(|| default_mu(rank));
        if mu_coords.len() != rank {
            return Err(CliError::Config(format!(
                "mu has {} entries, the model has rank {rank}",
                mu_coords.len()
            )));
        }
        validate_schedule(&config.t_schedule).map_err(|e| CliError::Config(format!("t_schedule: {e}")))?;
        let tol = config.tolerances()?;
        Ok(Self {
            res: config.grid.resolution(),
            inverse: config.grid.inverse_grid(),
            x_angles: flat.chunks(rank).map(<[f64]>::to_vec).collect(),
            mu: HalfWeight::integral(&mu_coords),
            mu_coords,
            tol,
            group,
            config,
        })
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    fn elements(&self) -> Vec<TorusElement> {
        self.x_angles.iter().map(|a| TorusElement::new(a)).collect()
    }

    fn regular_elements(&self) -> Result<Vec<TorusElement>, CliError> {
        let xs = self.elements();
        for x in &xs {
            self.group.regular_det(x)?;
        }
        Ok(xs)
    }

    fn scalar_profile(&self) -> ScalarProfile {
        ScalarProfile::gaussian(self.config.grid.profile_rate, 1.0)
    }

    /// The effective configuration, without the output section.
    pub fn echo(&self) -> Value {
        json!({
            "model": self.config.model,
            "grid": self.config.grid,
            "x_angles": self.x_angles,
            "mu": self.mu_coords,
            "t_schedule": self.config.t_schedule,
            "tolerances": self.tol,
        })
    }

    /// `det_𝔭(id − x)` directly and from spinor characters. Singular rows are
    /// flagged and do not count.
    pub fn det_check(&self) -> Result<ExperimentReport, CliError> {
        let mut report = ExperimentReport::new(
            "det-check",
            self.tol.det,
            "exact".into(),
            columns(self.rank(), &["det_direct", "det_character", "abs_diff", "singular"]),
        );
        let model = self.group.model();
        let mut regular = 0;
        for (angles, x) in self.x_angles.iter().zip(self.elements()) {
            let pair = det_p_both_ways(model, self.group.datum(), &x).map_err(|e| CliError::Compute(e.to_string()))?;
            let singular = pair.direct.abs() <= REGULARITY_EPS;
            let diff = pair.abs_diff();
            if !singular {
                regular += 1;
                if !(diff < self.tol.det) {
                    report.pass = false;
                    report.notes.push(format!("x = {angles:?}: |difference| {diff:e} ≥ {:e}", self.tol.det));
                }
            }
            let mut row = angle_cells(angles);
            row.extend([
                Cell::Num(pair.direct),
                Cell::Num(pair.character),
                Cell::Num(diff),
                Cell::Flag(singular),
            ]);
            report.table.rows.push(row);
        }
        if regular == 0 {
            report.warnings.push("every x is singular; nothing was checked".into());
        }
        Ok(report)
    }

    /// Closed form against inverse transform plus orbital integral for
    /// `g · id_E`.
    pub fn prop_tau(&self) -> Result<ExperimentReport, CliError> {
        let xs = self.regular_elements()?;
        let mut report = ExperimentReport::new(
            "prop-tau",
            self.tol.prop_tau,
            self.config.grid.signature(),
            columns(
                self.rank(),
                &["re_closed", "im_closed", "re_quad", "im_quad", "abs_diff"],
            ),
        );
        let scalar = self.scalar_profile();
        let t0 = T0Pairing::new(&self.group, scalar.clone(), &self.inverse, self.res)?;
        let profile = OperatorProfile::new(scalar, self.mu.clone(), Grading::Plain);
        for (angles, x) in self.x_angles.iter().zip(&xs) {
            let closed = self.group.prop_tau_closed_form(&profile, x)?;
            let quad = t0.orbital_value(&self.mu, Grading::Plain, x)?;
            self.compare_row(&mut report, angles, closed, quad);
        }
        Ok(report)
    }

    fn compare_row(&self, report: &mut ExperimentReport, angles: &[f64], closed: Complex64, quad: Complex64) {
        let diff = (closed - quad).norm();
        if !(diff < report.tolerance) {
            report.pass = false;
            report.notes.push(format!(
                "x = {angles:?}: |closed − quadrature| {diff:e} ≥ {:e}",
                report.tolerance
            ));
        }
        let mut row = angle_cells(angles);
        row.extend([
            Cell::Num(closed.re),
            Cell::Num(closed.im),
            Cell::Num(quad.re),
            Cell::Num(quad.im),
            Cell::Num(diff),
        ]);
        report.table.rows.push(row);
    }

    /// `I(t)` over the schedule for the bump, against `I(0)`.
    pub fn verify_limit(&self) -> Result<ExperimentReport, CliError> {
        let xs = self.regular_elements()?;
        let radius = self.config.grid.bump_radius;
        let f = SmoothTestFunction::bump(radius, KModulation::constant(self.rank()));
        let mut report = ExperimentReport::new(
            "verify-limit",
            self.tol.limit,
            String::new(),
            columns(self.rank(), &["t", "re", "im", "gap", "grid_signature"]),
        );
        let single = self.config.t_schedule.len() < 2;
        if single {
            report
                .warnings
                .push("t_schedule has a single entry; convergence check skipped".into());
        }
        for (angles, x) in self.x_angles.iter().zip(&xs) {
            let table = convergence_study(&self.group, &f, x, &self.config.t_schedule, &self.res)?;
            for row in &table.rows {
                let mut cells = angle_cells(angles);
                cells.extend([
                    Cell::Num(row.t),
                    Cell::Num(row.value.re),
                    Cell::Num(row.value.im),
                    Cell::Num(row.gap),
                    Cell::Text(table.grid_signature.clone()),
                ]);
                report.table.rows.push(cells);
            }
            report.grid_signature = table.grid_signature.clone();
            report.notes.push(format!(
                "x = {angles:?}: I(0) = {:.16e} {:+.16e}i, final gap {:.3e}, empirical rate {}",
                table.limit.re,
                table.limit.im,
                table.final_gap(),
                table.empirical_rate().map_or("n/a".into(), |r| format!("{r:.3}"))
            ));
            if !single && !table.passes(self.tol.limit) {
                report.pass = false;
                report.notes.push(format!(
                    "x = {angles:?}: convergence failed (tail monotone: {:?}, final gap {:e}, tolerance {:e})",
                    table.tail_monotone,
                    table.final_gap(),
                    self.tol.limit
                ));
            }
        }
        Ok(report)
    }

    /// `τ_x([P^E])` at `t = 0`: character value against quadrature.
    pub fn pair(&self) -> Result<ExperimentReport, CliError> {
        let xs = self.regular_elements()?;
        let mut report = ExperimentReport::new(
            "pair",
            self.tol.pair,
            self.config.grid.signature(),
            columns(
                self.rank(),
                &["re_closed", "im_closed", "re_quad", "im_quad", "abs_diff"],
            ),
        );
        let t0 = T0Pairing::new(&self.group, self.scalar_profile(), &self.inverse, self.res)?;
        let mut reports = Vec::new();
        for (angles, x) in self.x_angles.iter().zip(&xs) {
            let closed = pairing_value(&self.group, &self.mu, x, 0.0)?;
            let quad = t0.value(&self.mu, x)?;
            self.compare_row(&mut report, angles, closed, quad);
            for (method, value) in [(Method::ClosedForm, closed), (Method::Quadrature, quad)] {
                reports.push(PairingReport {
                    model: self.config.model.clone(),
                    mu: self.mu.as_f64(),
                    x_angles: Some(angles.clone()),
                    t_list: vec![0.0],
                    method,
                    values: vec![complex_pair(value)],
                    tolerance: self.tol.pair,
                });
            }
        }
        report.extra = Some(json!({ "reports": reports }));
        Ok(report)
    }

    /// Formal-degree ratio against `t^{dim 𝔭}` over the schedule.
    pub fn l2_scaling(&self) -> Result<ExperimentReport, CliError> {
        let model = self.group.model();
        let d_p = model.d_p() as i32;
        let mut report = ExperimentReport::new(
            "l2-scaling",
            self.tol.l2,
            "exact".into(),
            vec!["t".into(), "ratio".into(), "t_pow_dim_p".into(), "abs_diff".into()],
        );
        let degree = formal_degree(model, &self.mu)?;
        report.notes.push(format!("formal degree at t = 1: {degree:.16e}"));
        let mut reports = Vec::new();
        for &t in &self.config.t_schedule {
            let ratio = l2_scaling(model, &self.mu, t)?;
            let expected = t.powi(d_p);
            let diff = (ratio - expected).abs();
            if !(diff < self.tol.l2) {
                report.pass = false;
                report.notes.push(format!("t = {t}: |ratio − t^{d_p}| {diff:e} ≥ {:e}", self.tol.l2));
            }
            report
                .table
                .rows
                .push(vec![Cell::Num(t), Cell::Num(ratio), Cell::Num(expected), Cell::Num(diff)]);
            reports.push(ratio);
        }
        report.extra = Some(json!({
            "reports": [PairingReport {
                model: self.config.model.clone(),
                mu: self.mu.as_f64(),
                x_angles: None,
                t_list: self.config.t_schedule.clone(),
                method: Method::CmFormula,
                values: reports.iter().map(|&r| [r, 0.0]).collect(),
                tolerance: self.tol.l2,
            }]
        }));
        Ok(report)
    }

    /// All five experiments in one JSON document.
    pub fn report(&self) -> Result<(Value, bool), CliError> {
        let runs = [
            self.det_check()?,
            self.prop_tau()?,
            self.verify_limit()?,
            self.pair()?,
            self.l2_scaling()?,
        ];
        let pass = runs.iter().all(|r| r.pass);
        let failures: Vec<&str> = runs.iter().filter(|r| !r.pass).map(|r| r.command).collect();
        let doc = json!({
            "tool": TOOL_NAME,
            "version": VERSION,
            "config": self.echo(),
            "experiments": runs.iter().map(ExperimentReport::to_json).collect::<Vec<_>>(),
            "failures": failures,
            "pass": pass,
        });
        Ok((doc, pass))
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL_NAME, version = VERSION)]
#[command(about = "Orbital integrals and trace pairings on Cartan motion group deformations")]
struct Cli {
    /// Model identifier: sl2r or sl2r_x_sl2r.
    #[arg(long, global = true)]
    model: Option<String>,

    /// TOML run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads; falls back to $CARTAN_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Compare det_p(id − x) with the squared spinor difference.
    DetCheck,
    /// Compare the closed-form orbital integral of g·id_E with quadrature.
    PropTau,
    /// Follow I(t) down the schedule towards the t = 0 limit.
    VerifyLimit,
    /// Compare the t = 0 pairing by quadrature with the character value.
    Pair,
    /// Check the formal-degree ratio against t^dim p.
    L2Scaling,
    /// Run every experiment and write one JSON report.
    Report,
}

impl Command {
    fn default_format(self) -> Format {
        match self {
            Command::Pair | Command::Report => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Pulls `--tolerance.<name>=<value>` (or `--tolerance.<name> <value>`) out
/// of the argument list.
pub fn split_tolerance_flags(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, f64)>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(spec) = arg.strip_prefix("--tolerance.") else {
            rest.push(arg);
            continue;
        };
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = iter
                    .next()
                    .ok_or_else(|| CliError::Usage(format!("--tolerance.{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        if !TOLERANCE_NAMES.contains(&name.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown tolerance {name:?} (expected one of {TOLERANCE_NAMES:?})"
            )));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("--tolerance.{name}: {value:?} is not a number")))?;
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

/// What a subcommand produced: the rendered report and whether it passed.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    /// Lines for standard error, already prefixed.
    pub messages: Vec<String>,
}

fn render(report: &ExperimentReport, format: Format) -> Result<Outcome, CliError> {
    let body = match format {
        Format::Csv => report.table.to_csv()?,
        Format::Json => json_text(&report.to_json())?,
    };
    let mut messages: Vec<String> = report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    if format == Format::Csv {
        messages.extend(report.notes.iter().map(|n| format!("note: {n}")));
    }
    Ok(Outcome {
        body,
        pass: report.pass,
        messages,
    })
}

fn json_text(value: &Value) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    text.push('\n');
    Ok(text)
}

fn execute(command: Command, experiment: &Experiment, format: Format) -> Result<Outcome, CliError> {
    match command {
        Command::DetCheck => render(&experiment.det_check()?, format),
        Command::PropTau => render(&experiment.prop_tau()?, format),
        Command::VerifyLimit => render(&experiment.verify_limit()?, format),
        Command::Pair => render(&experiment.pair()?, format),
        Command::L2Scaling => render(&experiment.l2_scaling()?, format),
        Command::Report => {
            let (doc, pass) = experiment.report()?;
            Ok(Outcome {
                body: json_text(&doc)?,
                pass,
                messages: Vec::new(),
            })
        }
    }
}

fn run_inner(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let (args, tolerance_overrides) = split_tolerance_flags(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            if e.use_stderr() {
                write!(stderr, "{text}")?;
            } else {
                write!(stdout, "{text}")?;
            }
            return Ok(code);
        }
    };
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(model) = &cli.model {
        config.model = model.clone();
    }
    for (name, value) in tolerance_overrides {
        config.tolerances.insert(name, value);
    }
    if let Some(out) = &cli.out {
        config.output.path = Some(out.clone());
    }
    if let Some(format) = cli.format {
        config.output.format = Some(format);
    }
    let format = config.output.format.unwrap_or(cli.command.default_format());
    if cli.command == Command::Report && format == Format::Csv {
        return Err(CliError::Usage("report is JSON only".into()));
    }
    let threads = thread_count(cli.threads)?;
    let out_path = config.output.path.clone();
    let experiment = Experiment::new(config)?;
    let outcome = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| execute(cli.command, &experiment, format))?,
        None => execute(cli.command, &experiment, format)?,
    };
    for m in &outcome.messages {
        writeln!(stderr, "{m}")?;
    }
    match out_path {
        Some(path) => fs::write(&path, &outcome.body)?,
        None => stdout.write_all(outcome.body.as_bytes())?,
    }
    if outcome.pass {
        Ok(EXIT_PASS)
    } else {
        writeln!(stderr, "verification failed")?;
        Ok(EXIT_FAILURE)
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(args, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
