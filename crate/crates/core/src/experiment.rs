//! Experiment configuration, the end-to-end solve, sweeps and output files.
//!
//! A configuration is one JSON document, e.g.
//!
//! ```json
//! {
//!   "curve": "kite",
//!   "radii": { "r_in_max": 0.923, "r_ex_min": 1.985 },
//!   "k": [0.5, 1, 5],
//!   "delta": [1e-16, 0.01, 0.05],
//!   "eta": 5,
//!   "tau0": 2.2,
//!   "seeds": [1, 2, 3],
//!   "quadrature_nodes": "auto",
//!   "grid_resolution": 200,
//!   "direction": [0.5, 0.8660254037844386]
//! }
//! ```
//!
//! `curve` is `"kite"`, `"circle:R"`, `"ellipse:a,b"` or
//! `{"fourier": {"x1_cos": [...], "x1_sin": [...], "x2_cos": [...], "x2_sin": [...]}}`.
//! `radii` is optional and replaces the computed inscribed/circumscribed
//! radii in the parameter rule. `N` and `alpha` optionally override the
//! a-priori parameter choice.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::field_eval::{
    error_report, evaluate_field, ErrorReport, ExactSolution, InteriorGrid, PlaneWave,
    DEFAULT_GRID_RESOLUTION,
};
use crate::geometry::{default_quadrature_size, BoundaryCurve, DomainRadii, FourierCoefficients};
use crate::numeric::median;
use crate::regularized_solver::{
    select_parameters, svd, svd_decay_study, tikhonov_solve, CoefficientVector, RegularizationPlan,
    SvdStudy,
};
use crate::trace_operator::{
    add_noise, assemble_operator, plane_wave_data, ProblemParameters, WaveProblem,
};
use crate::Vec2;

/// Number of samples written by [`run_trace_plot`].
pub const TRACE_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Named(String),
    Fourier { fourier: FourierCoefficients },
}

impl CurveSpec {
    pub fn build(&self) -> Result<BoundaryCurve> {
        match self {
            CurveSpec::Named(name) => BoundaryCurve::named(name),
            CurveSpec::Fourier { fourier } => BoundaryCurve::from_fourier(fourier.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// A value or the keyword `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Auto(AutoKeyword),
    Value(T),
}

impl<T> Default for AutoOr<T> {
    fn default() -> Self {
        AutoOr::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiiSpec {
    pub r_in_max: f64,
    pub r_ex_min: f64,
}

fn default_eta() -> f64 {
    5.0
}

fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}

fn default_grid() -> usize {
    DEFAULT_GRID_RESOLUTION
}

fn default_direction() -> [f64; 2] {
    [0.5, 3f64.sqrt() / 2.0]
}

/// The JSON experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub curve: CurveSpec,
    #[serde(default)]
    pub radii: Option<RadiiSpec>,
    pub k: OneOrMany<f64>,
    pub delta: OneOrMany<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub tau0: AutoOr<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, alias = "M_q")]
    pub quadrature_nodes: AutoOr<usize>,
    #[serde(default = "default_grid")]
    pub grid_resolution: usize,
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    #[serde(default, rename = "N")]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FbmError::config("invalid_config", e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| FbmError::io(path, e))?;
        Self::from_json(&text)
    }

    /// A single-case configuration on the named curve with defaults elsewhere.
    pub fn single(curve: &str, k: f64, delta: f64) -> Self {
        Self {
            curve: CurveSpec::Named(curve.to_string()),
            radii: None,
            k: OneOrMany::One(k),
            delta: OneOrMany::One(delta),
            eta: default_eta(),
            tau0: AutoOr::default(),
            seeds: vec![1],
            quadrature_nodes: AutoOr::default(),
            grid_resolution: default_grid(),
            direction: default_direction(),
            truncation: None,
            alpha: None,
            output_dir: None,
        }
    }

    /// Checks the configuration and builds the geometry.
    pub fn prepare(&self) -> Result<Experiment> {
        let ks = self.k.to_vec();
        let deltas = self.delta.to_vec();
        if ks.is_empty() {
            return Err(FbmError::config("empty_list", "k list is empty"));
        }
        if deltas.is_empty() {
            return Err(FbmError::config("empty_list", "delta list is empty"));
        }
        if self.seeds.is_empty() {
            return Err(FbmError::config("empty_seeds", "seed list is empty"));
        }
        if let Some(k) = ks.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(FbmError::config(
                "invalid_k",
                format!("wavenumber must be positive, got {k}"),
            ));
        }
        if let Some(d) = deltas.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(FbmError::config(
                "invalid_delta",
                format!("noise level must lie in [0, 1), got {d}"),
            ));
        }
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(FbmError::config(
                "invalid_eta",
                format!("eta must exceed 1, got {}", self.eta),
            ));
        }
        if self.grid_resolution < 32 {
            return Err(FbmError::config(
                "invalid_grid",
                format!(
                    "grid resolution must be at least 32, got {}",
                    self.grid_resolution
                ),
            ));
        }
        if let AutoOr::Value(m) = self.quadrature_nodes {
            if m < 8 || !m.is_multiple_of(2) {
                return Err(FbmError::config(
                    "invalid_quadrature",
                    format!("quadrature_nodes must be even and at least 8, got {m}"),
                ));
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(FbmError::config(
                    "invalid_alpha",
                    format!("alpha must be nonnegative, got {alpha}"),
                ));
            }
        }
        let direction = Vec2::new(self.direction[0], self.direction[1]);
        if !((direction.norm() - 1.0).abs() < 1e-12) {
            return Err(FbmError::config(
                "invalid_direction",
                "direction must be a unit vector",
            ));
        }
        let curve = self.curve.build()?;
        let radii = match self.radii {
            Some(r) => DomainRadii::new(r.r_in_max, r.r_ex_min)
                .map_err(|e| FbmError::config("invalid_radii", e.to_string()))?,
            None => curve.radii(),
        };
        let tau0 = match self.tau0 {
            AutoOr::Value(t) => t,
            AutoOr::Auto(_) => auto_tau0(radii.tau_min),
        };
        if !(tau0 > radii.tau_min) {
            return Err(FbmError::Tau0TooSmall {
                tau0,
                tau_min: radii.tau_min,
            });
        }
        let grid = InteriorGrid::new(&curve, self.grid_resolution)?;
        Ok(Experiment {
            config: self.clone(),
            curve,
            radii,
            tau0,
            direction,
            grid,
        })
    }
}

/// `1.02 tau_min` rounded up to two decimals.
pub fn auto_tau0(tau_min: f64) -> f64 {
    let scaled = 1.02 * tau_min * 100.0;
    // guard against 219.99999999999997-style representation error
    (scaled - 1e-9).ceil() / 100.0
}

/// A validated configuration with its geometry built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub curve: BoundaryCurve,
    pub radii: DomainRadii,
    pub tau0: f64,
    pub direction: Vec2,
    pub grid: InteriorGrid,
}

/// Everything produced by one `(k, delta, seed)` solve.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub k: f64,
    pub delta: f64,
    pub seed: u64,
    pub plan: RegularizationPlan,
    pub problem: WaveProblem,
    pub quadrature_nodes: usize,
    pub mu_max: f64,
    pub mu_min: f64,
    pub coefficients: CoefficientVector,
    pub report: ErrorReport,
}

/// Metadata attached to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMetadata {
    pub curve: String,
    pub k: f64,
    pub delta: f64,
    pub eta: f64,
    pub tau0: f64,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub alpha: f64,
    pub quadrature_nodes: usize,
    pub grid_resolution: usize,
    pub seed: u64,
    pub m_overridden: bool,
    pub scaling_radius: f64,
    pub column_order: String,
    pub noise_model: String,
}

impl CaseResult {
    pub fn metadata(&self, experiment: &Experiment) -> CaseMetadata {
        let prm = self.problem.params();
        CaseMetadata {
            curve: experiment.curve.name().to_string(),
            k: self.k,
            delta: self.delta,
            eta: self.plan.eta,
            tau0: self.plan.tau0,
            truncation: self.plan.truncation,
            alpha: self.plan.alpha,
            quadrature_nodes: self.quadrature_nodes,
            grid_resolution: experiment.config.grid_resolution,
            seed: self.seed,
            m_overridden: prm.m_overridden,
            scaling_radius: prm.scaling_radius,
            column_order: "n = -N..N".into(),
            noise_model: "complex Gaussian, rescaled to exact relative L2(boundary) norm delta"
                .into(),
        }
    }
}

impl Experiment {
    pub fn ks(&self) -> Vec<f64> {
        self.config.k.to_vec()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.config.delta.to_vec()
    }

    /// Parameter choice for `(k, delta)` with configuration overrides applied.
    pub fn plan(&self, k: f64, delta: f64) -> Result<RegularizationPlan> {
        let mut plan = select_parameters(k, delta, self.config.eta, &self.radii, self.tau0)?;
        if let Some(n) = self.config.truncation {
            plan.truncation = n;
            plan.capped = false;
        }
        if let Some(alpha) = self.config.alpha {
            plan.alpha = alpha;
        }
        Ok(plan)
    }

    pub fn quadrature_nodes(&self, truncation: usize) -> usize {
        match self.config.quadrature_nodes {
            AutoOr::Value(m) => m,
            AutoOr::Auto(_) => default_quadrature_size(truncation),
        }
    }

    pub fn problem(&self, k: f64, truncation: usize) -> Result<WaveProblem> {
        WaveProblem::with_radii(k, self.curve.clone(), self.radii, self.tau0, truncation)
    }

    /// Geometry → plan → assembly → exact data → noise → solve → report.
    pub fn run_case(&self, k: f64, delta: f64, seed: u64) -> Result<CaseResult> {
        let plan = self.plan(k, delta)?;
        let problem = self.problem(k, plan.truncation)?;
        let nodes = self.quadrature_nodes(plan.truncation);
        let rule = self.curve.build_quadrature(nodes)?;
        let op = assemble_operator(&problem, &rule)?;
        let system = svd(&op)?;
        let exact = plane_wave_data(&problem, &rule, self.direction)?;
        let noisy = add_noise(&exact, delta, seed)?;
        let coefficients = tikhonov_solve(&system, &noisy, plan.alpha)?;
        let wave = PlaneWave::new(k, self.direction)?;
        let report = error_report(&problem, &coefficients, &wave, &self.grid, &rule)?;
        Ok(CaseResult {
            k,
            delta,
            seed,
            plan,
            problem,
            quadrature_nodes: nodes,
            mu_max: system.mu_max(),
            mu_min: system.mu_min(),
            coefficients,
            report,
        })
    }

    fn single_case(&self) -> Result<(f64, f64, u64)> {
        let (ks, deltas) = (self.ks(), self.deltas());
        if ks.len() != 1 || deltas.len() != 1 {
            return Err(FbmError::config(
                "multiple_cases",
                "solve needs a single k and a single delta",
            ));
        }
        Ok((ks[0], deltas[0], self.config.seeds[0]))
    }

    /// Solves the configured single case with the first seed.
    pub fn run_solve(&self) -> Result<CaseResult> {
        let (k, delta, seed) = self.single_case()?;
        self.run_case(k, delta, seed)
    }

    /// One row per `(k, delta, seed)`; failed cases become rows with an
    /// error status instead of aborting the sweep.
    pub fn run_sweep(&self) -> SweepTable {
        let mut cells = Vec::new();
        for &k in &self.ks() {
            for &delta in &self.deltas() {
                for &seed in &self.config.seeds {
                    cells.push((k, delta, seed));
                }
            }
        }
        let rows: Vec<SweepRow> = cells
            .par_iter()
            .map(|&(k, delta, seed)| match self.run_case(k, delta, seed) {
                Ok(case) => SweepRow::from_case(&case),
                Err(e) => {
                    log::warn!("case k = {k}, delta = {delta}, seed = {seed} failed: {e}");
                    SweepRow::failed(k, delta, seed, self.plan(k, delta).ok(), e.code())
                }
            })
            .collect();
        let mut summaries = Vec::new();
        for &k in &self.ks() {
            for &delta in &self.deltas() {
                let group: Vec<&SweepRow> = rows
                    .iter()
                    .filter(|r| r.k == k && r.delta == delta && r.status == "ok")
                    .collect();
                summaries.push(SweepSummary::from_rows(k, delta, &group));
            }
        }
        SweepTable {
            eta: self.config.eta,
            tau0: self.tau0,
            grid_resolution: self.config.grid_resolution,
            rows,
            summaries,
        }
    }

    /// `mu_min(N)` for each order in `orders` at the configured single `k`.
    pub fn run_svd_study(&self, orders: &[usize]) -> Result<SvdStudy> {
        let ks = self.ks();
        if ks.len() != 1 {
            return Err(FbmError::config(
                "multiple_cases",
                "svd study needs a single k",
            ));
        }
        let first = *orders
            .first()
            .ok_or_else(|| FbmError::config("empty_list", "order list is empty"))?;
        let template = self.problem(ks[0], first)?;
        let fixed = match self.config.quadrature_nodes {
            AutoOr::Value(m) => Some(m),
            AutoOr::Auto(_) => None,
        };
        svd_decay_study(&template, orders, fixed)
    }

    /// Real parts of `u` and `u_N` along the boundary at
    /// [`TRACE_SAMPLES`] uniform parameter values.
    pub fn run_trace_plot(&self, k: f64, delta: f64, seed: u64) -> Result<TracePlot> {
        let case = self.run_case(k, delta, seed)?;
        let wave = PlaneWave::new(k, self.direction)?;
        let mut t = Vec::with_capacity(TRACE_SAMPLES);
        let mut exact = Vec::with_capacity(TRACE_SAMPLES);
        let mut approx = Vec::with_capacity(TRACE_SAMPLES);
        for j in 0..TRACE_SAMPLES {
            let tj = 2.0 * std::f64::consts::PI * j as f64 / TRACE_SAMPLES as f64;
            let x = self.curve.point(tj);
            t.push(tj);
            exact.push(wave.value(x).re);
            approx.push(evaluate_field(&case.problem, &case.coefficients, x)?.re);
        }
        Ok(TracePlot {
            metadata: case.metadata(self),
            t,
            exact,
            approx,
        })
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub delta: f64,
    pub seed: u64,
    pub status: String,
    #[serde(rename = "N")]
    pub truncation: Option<usize>,
    pub alpha: Option<f64>,
    pub quadrature_nodes: Option<usize>,
    pub m_overridden: Option<bool>,
    pub mu_min: Option<f64>,
    pub rel_l2_interior: Option<f64>,
    pub rel_h1semi_interior: Option<f64>,
    pub rel_l2_boundary: Option<f64>,
    pub rel_l2_normal_derivative: Option<f64>,
}

impl SweepRow {
    fn from_case(case: &CaseResult) -> Self {
        let r = &case.report;
        Self {
            k: case.k,
            delta: case.delta,
            seed: case.seed,
            status: "ok".into(),
            truncation: Some(case.plan.truncation),
            alpha: Some(case.plan.alpha),
            quadrature_nodes: Some(case.quadrature_nodes),
            m_overridden: Some(case.problem.params().m_overridden),
            mu_min: Some(case.mu_min),
            rel_l2_interior: Some(r.rel_l2_interior),
            rel_h1semi_interior: Some(r.rel_h1semi_interior),
            rel_l2_boundary: Some(r.rel_l2_boundary),
            rel_l2_normal_derivative: Some(r.rel_l2_normal_derivative),
        }
    }

    fn failed(k: f64, delta: f64, seed: u64, plan: Option<RegularizationPlan>, code: &str) -> Self {
        Self {
            k,
            delta,
            seed,
            status: format!("failed:{code}"),
            truncation: plan.map(|p| p.truncation),
            alpha: plan.map(|p| p.alpha),
            quadrature_nodes: None,
            m_overridden: None,
            mu_min: None,
            rel_l2_interior: None,
            rel_h1semi_interior: None,
            rel_l2_boundary: None,
            rel_l2_normal_derivative: None,
        }
    }
}

/// Medians over the successful seeds of one `(k, delta)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub k: f64,
    pub delta: f64,
    pub successes: usize,
    #[serde(rename = "N")]
    pub truncation: Option<usize>,
    pub alpha: Option<f64>,
    pub mu_min: Option<f64>,
    pub rel_l2_interior: Option<f64>,
    pub rel_h1semi_interior: Option<f64>,
    pub rel_l2_boundary: Option<f64>,
    pub rel_l2_normal_derivative: Option<f64>,
}

impl SweepSummary {
    fn from_rows(k: f64, delta: f64, rows: &[&SweepRow]) -> Self {
        let med = |f: fn(&SweepRow) -> Option<f64>| {
            median(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
        };
        Self {
            k,
            delta,
            successes: rows.len(),
            truncation: rows.first().and_then(|r| r.truncation),
            alpha: rows.first().and_then(|r| r.alpha),
            mu_min: med(|r| r.mu_min),
            rel_l2_interior: med(|r| r.rel_l2_interior),
            rel_h1semi_interior: med(|r| r.rel_h1semi_interior),
            rel_l2_boundary: med(|r| r.rel_l2_boundary),
            rel_l2_normal_derivative: med(|r| r.rel_l2_normal_derivative),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub eta: f64,
    pub tau0: f64,
    pub grid_resolution: usize,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<SweepSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePlot {
    pub metadata: CaseMetadata,
    pub t: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
}

impl TracePlot {
    pub fn max_gap(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.approx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn fmt_opt_usize(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn metadata_header(meta: &CaseMetadata) -> String {
    let mut s = String::new();
    let value = serde_json::to_value(meta).expect("metadata serializes");
    if let serde_json::Value::Object(map) = value {
        for (key, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            let _ = writeln!(s, "# {key}={text}");
        }
    }
    s
}

/// Sweep table as CSV: one row per case followed by one `median` row per
/// `(k, delta)`.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# eta={}", fmt_num(table.eta));
    let _ = writeln!(s, "# tau0={}", fmt_num(table.tau0));
    let _ = writeln!(s, "# grid_resolution={}", table.grid_resolution);
    let _ = writeln!(s, "# column_order=n = -N..N");
    s.push_str(
        "kind,k,delta,eta,tau0,seed,status,N,alpha,quadrature_nodes,grid_resolution,m_overridden,mu_min,\
         rel_l2_interior,rel_h1semi_interior,rel_l2_boundary,rel_l2_normal_derivative\n",
    );
    for r in &table.rows {
        let _ = writeln!(
            s,
            "case,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.k),
            fmt_num(r.delta),
            fmt_num(table.eta),
            fmt_num(table.tau0),
            r.seed,
            r.status,
            fmt_opt_usize(r.truncation),
            fmt_opt(r.alpha),
            fmt_opt_usize(r.quadrature_nodes),
            table.grid_resolution,
            r.m_overridden.map(|b| b.to_string()).unwrap_or_default(),
            fmt_opt(r.mu_min),
            fmt_opt(r.rel_l2_interior),
            fmt_opt(r.rel_h1semi_interior),
            fmt_opt(r.rel_l2_boundary),
            fmt_opt(r.rel_l2_normal_derivative),
        );
    }
    for m in &table.summaries {
        let _ = writeln!(
            s,
            "median,{},{},{},{},,{},{},{},,{},,{},{},{},{},{}",
            fmt_num(m.k),
            fmt_num(m.delta),
            fmt_num(table.eta),
            fmt_num(table.tau0),
            if m.successes > 0 {
                format!("ok:{}", m.successes)
            } else {
                "failed".into()
            },
            fmt_opt_usize(m.truncation),
            fmt_opt(m.alpha),
            table.grid_resolution,
            fmt_opt(m.mu_min),
            fmt_opt(m.rel_l2_interior),
            fmt_opt(m.rel_h1semi_interior),
            fmt_opt(m.rel_l2_boundary),
            fmt_opt(m.rel_l2_normal_derivative),
        );
    }
    s
}

/// Medians as a fixed-width text table in two-significant-digit `e-n` notation.
pub fn summary_text(table: &SweepTable) -> String {
    let short = |x: Option<f64>| x.map(|v| format!("{v:.1e}")).unwrap_or_else(|| "-".into());
    let mut s = String::from("k        delta    N    L2(D)    H1semi(D) L2(bdry)  dnu(bdry)\n");
    for m in &table.summaries {
        let _ = writeln!(
            s,
            "{:<8} {:<8} {:<4} {:<8} {:<9} {:<9} {}",
            m.k,
            format!("{:.0e}", m.delta),
            fmt_opt_usize(m.truncation),
            short(m.rel_l2_interior),
            short(m.rel_h1semi_interior),
            short(m.rel_l2_boundary),
            short(m.rel_l2_normal_derivative),
        );
    }
    s
}

/// SVD study as CSV with the fitted slope in a footer line.
pub fn svd_study_csv(
    study: &SvdStudy,
    header: &ProblemParameters,
    eta: f64,
    curve: &str,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# curve={curve}");
    let _ = writeln!(s, "# k={}", fmt_num(header.k));
    let _ = writeln!(s, "# eta={}", fmt_num(eta));
    let _ = writeln!(s, "# tau0={}", fmt_num(header.tau0));
    let _ = writeln!(s, "# r_in={}", fmt_num(header.r_in));
    let _ = writeln!(s, "# r_ex={}", fmt_num(header.r_ex));
    let _ = writeln!(s, "# m_overridden={}", header.m_overridden);
    let _ = writeln!(s, "# alpha=n/a");
    let _ = writeln!(s, "# seed=n/a");
    s.push_str("N,quadrature_nodes,mu_max,mu_min,bound_shape\n");
    for r in &study.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.truncation,
            r.quadrature_nodes,
            fmt_num(r.mu_max),
            fmt_num(r.mu_min),
            fmt_num(r.bound_shape)
        );
    }
    match study.slope {
        Some(v) => {
            let _ = writeln!(s, "# slope={}", fmt_num(v));
        }
        None => s.push_str("# slope=n/a\n"),
    }
    s
}

/// `(n, re, im)` rows with the metadata header.
pub fn coefficients_csv(case: &CaseResult, experiment: &Experiment) -> String {
    let mut s = metadata_header(&case.metadata(experiment));
    s.push_str("n,re,im\n");
    for (n, c) in case.coefficients.iter() {
        let _ = writeln!(s, "{n},{},{}", fmt_num(c.re), fmt_num(c.im));
    }
    s
}

/// The JSON report of a single solve.
pub fn solve_report_json(case: &CaseResult, experiment: &Experiment) -> serde_json::Value {
    serde_json::json!({
        "metadata": case.metadata(experiment),
        "plan": case.plan,
        "problem": case.problem.params(),
        "mu_max": case.mu_max,
        "mu_min": case.mu_min,
        "report": case.report,
    })
}

fn two_column(meta: &CaseMetadata, label: &str, t: &[f64], values: &[f64]) -> String {
    let mut s = metadata_header(meta);
    let _ = writeln!(s, "# series={label}");
    let _ = writeln!(s, "# columns=t value");
    for (a, b) in t.iter().zip(values) {
        let _ = writeln!(s, "{} {}", fmt_num(*a), fmt_num(*b));
    }
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| FbmError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| FbmError::io(&path, e))?;
    Ok(path)
}

/// Writes `report.json` and `coefficients.csv`.
pub fn write_solve_outputs(
    case: &CaseResult,
    experiment: &Experiment,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let report = serde_json::to_string_pretty(&solve_report_json(case, experiment))
        .expect("report serializes");
    Ok(vec![
        write_file(dir, "report.json", &(report + "\n"))?,
        write_file(dir, "coefficients.csv", &coefficients_csv(case, experiment))?,
    ])
}

pub fn write_sweep_outputs(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![write_file(dir, "sweep.csv", &sweep_csv(table))?])
}

pub fn write_svd_outputs(
    study: &SvdStudy,
    experiment: &Experiment,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let first = study.rows.first().map(|r| r.truncation).unwrap_or(0);
    let header = experiment.problem(experiment.ks()[0], first)?;
    let csv = svd_study_csv(
        study,
        header.params(),
        experiment.config.eta,
        experiment.curve.name(),
    );
    Ok(vec![write_file(dir, "svd_study.csv", &csv)?])
}

/// Writes `trace_exact.dat` and `trace_fbm.dat`.
pub fn write_trace_outputs(plot: &TracePlot, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_file(
            dir,
            "trace_exact.dat",
            &two_column(&plot.metadata, "Re u", &plot.t, &plot.exact),
        )?,
        write_file(
            dir,
            "trace_fbm.dat",
            &two_column(&plot.metadata, "Re u_N", &plot.t, &plot.approx),
        )?,
    ])
}

/// Parses `"4..24:2"`, `"4..24"`, `"4,6,8"` or `"10"`.
pub fn parse_orders(spec: &str) -> Result<Vec<usize>> {
    let bad = || {
        FbmError::config(
            "invalid_orders",
            format!("cannot parse order list {spec:?}"),
        )
    };
    let spec = spec.trim();
    if let Some((range, step)) = spec.split_once("..").map(|(a, rest)| {
        let (b, s) = rest.split_once(':').unwrap_or((rest, "1"));
        ((a, b), s)
    }) {
        let lo: usize = range.0.trim().parse().map_err(|_| bad())?;
        let hi: usize = range.1.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    let orders = spec
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if orders.is_empty() {
        return Err(bad());
    }
    Ok(orders)
}

/// Complex coefficients by order, for callers outside the crate.
pub fn coefficient_pairs(c: &CoefficientVector) -> Vec<(i32, Complex64)> {
    c.iter().collect()
}
