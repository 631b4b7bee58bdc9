//! Reproducible experiment runs: config → Gram → quotients → HUM solve →
//! control → simulation → checks, with JSON/CSV artifacts.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diophantine::{is_in_s, RealSpec, Verdict};
use crate::error::Error;
use crate::hum::{
    channel_header, simulate_controlled, solve_hum, solve_hum_direct, verify_cost_bound, write_samples, CostReport,
    HumOptions,
};
use crate::observability::{assemble_gram, max_quotient, min_quotient, ObservationGeometry, ObservationKind};
use crate::spectral::{state_norm, DomainSpec, ModalState, Mode, SobolevIndex};

pub const CONFIG_VERSION: u32 = 1;

/// Published JSON schema for [`ScenarioConfig`].
pub const SCHEMA: &str = include_str!("../schema/scenario.schema.json");

const PRESETS: &[(&str, &str)] = &[
    ("square-T9", include_str!("../presets/square-T9.json")),
    ("square-T12", include_str!("../presets/square-T12.json")),
    ("interval-sqrt2", include_str!("../presets/interval-sqrt2.json")),
    ("interval-golden", include_str!("../presets/interval-golden.json")),
    ("interval-xi-half", include_str!("../presets/interval-xi-half.json")),
];

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scenario {scenario}: {source}")]
    NotObservable { scenario: String, source: Error },
    #[error("scenario {scenario}: solver failure: {source}")]
    Solver { scenario: String, source: Error },
    #[error("scenario {scenario}: failed checks: {}", failed.join(", "))]
    ChecksFailed { scenario: String, failed: Vec<String> },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl ScenarioError {
    /// 1 usage/config, 2 infeasible at this truncation, 3 solver or check failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) | ScenarioError::Io { .. } => 1,
            ScenarioError::NotObservable { .. } => 2,
            ScenarioError::Solver { .. } | ScenarioError::ChecksFailed { .. } => 3,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Config(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    SquareLeftEdge,
    IntervalPoint { xi: RealSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// One mode: `[n]` on the interval, `[k1, k2]` on the square.
    Mode {
        mode: Vec<usize>,
        pos: f64,
        vel: f64,
    },
    /// `pos ~ N(0,1)`, `vel ~ ω·N(0,1)` from a ChaCha8 stream.
    Random {
        seed: u64,
    },
    Coefficients {
        pos: Vec<f64>,
        vel: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub name: String,
    pub domain: DomainSpec,
    pub geometry: GeometryConfig,
    pub horizon: f64,
    /// Pair for the observability quotients.
    pub pair: SobolevIndex,
    /// Pair in which the final residual is measured, relative to the target.
    pub residual_pair: SobolevIndex,
    /// Pair for the cost ratio `‖u‖ / ‖target‖`.
    pub cost_pair: SobolevIndex,
    pub target: TargetSpec,
    #[serde(default)]
    pub solver: HumOptions,
    /// Acceptance threshold on the relative final residual.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Sampling step for the CSV artifacts; defaults to `T/1000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_residual_tol() -> f64 {
    1e-6
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            ScenarioError::Config(format!("unknown preset {name:?}; known: {}", preset_names().join(", ")))
        })?;
        Self::from_json(text)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != CONFIG_VERSION {
            return Err(ScenarioError::Config(format!("unsupported config version {}", self.version)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ScenarioError::Config(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ScenarioError::Config(format!("dt must be > 0, got {dt}")));
            }
        }
        if [self.residual_tol, self.solver.tol].iter().any(|t| t.is_nan() || *t <= 0.0) {
            return Err(ScenarioError::Config("tolerances must be > 0".into()));
        }
        self.domain.validate().map_err(config_err)?;
        if let GeometryConfig::IntervalPoint { xi } = &self.geometry {
            xi.validate().map_err(config_err)?;
        }
        self.observation().map_err(config_err)?.check_domain(&self.domain).map_err(config_err)?;
        self.target_state()?;
        Ok(())
    }

    pub fn observation(&self) -> crate::Result<ObservationGeometry> {
        match &self.geometry {
            GeometryConfig::SquareLeftEdge => ObservationGeometry::square_left_edge(self.horizon),
            GeometryConfig::IntervalPoint { xi } => ObservationGeometry::interval_point(xi.to_f64(), self.horizon),
        }
    }

    pub fn target_state(&self) -> Result<ModalState, ScenarioError> {
        match &self.target {
            TargetSpec::Mode { mode, pos, vel } => {
                let m = match (self.domain, mode.as_slice()) {
                    (DomainSpec::Interval { .. }, &[n]) => Mode::Line(n),
                    (DomainSpec::Square { .. }, &[k1, k2]) => Mode::Plane(k1, k2),
                    _ => return Err(ScenarioError::Config(format!("mode {mode:?} does not fit {:?}", self.domain))),
                };
                ModalState::single_mode(self.domain, m, *pos, *vel).map_err(config_err)
            }
            TargetSpec::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(ModalState::random(self.domain, &mut rng))
            }
            TargetSpec::Coefficients { pos, vel } => {
                ModalState::new(self.domain, pos.clone(), vel.clone()).map_err(config_err)
            }
        }
    }
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check reproduces.
    pub criterion: u32,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub residual: f64,
    pub gram_energy: f64,
    /// `max |α_cg − α_direct| / max |α_direct|`.
    pub cg_vs_direct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResults {
    pub name: String,
    pub domain: DomainSpec,
    pub geometry: GeometryConfig,
    pub horizon: f64,
    pub pair: SobolevIndex,
    pub residual_pair: SobolevIndex,
    pub cost_pair: SobolevIndex,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_verdict: Option<Verdict>,
    pub min_quotient: f64,
    pub max_quotient: f64,
    pub solver: SolverReport,
    pub cost: CostReport,
    /// `‖z(T)‖ / ‖z(0)‖` in the residual pair.
    pub final_residual: f64,
    pub checks: Vec<Check>,
}

impl ScenarioResults {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }
}

/// In-memory artifacts of one run.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub results: ScenarioResults,
    pub results_json: String,
    pub control_csv: String,
    pub trace_csv: String,
}

impl Bundle {
    pub fn write_to(&self, dir: &Path) -> Result<(), ScenarioError> {
        let io =
            |p: &Path, e: std::io::Error| ScenarioError::Io { path: p.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, body) in
            [("results.json", &self.results_json), ("control.csv", &self.control_csv), ("trace.csv", &self.trace_csv)]
        {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Bundle, ScenarioError> {
    cfg.validate()?;
    let solver_err = |source: Error| ScenarioError::Solver { scenario: cfg.name.clone(), source };
    let geometry = cfg.observation().map_err(config_err)?;
    let target = cfg.target_state()?;
    let xi_verdict = match &cfg.geometry {
        GeometryConfig::IntervalPoint { xi } => Some(is_in_s(xi, 30).map_err(config_err)?),
        GeometryConfig::SquareLeftEdge => None,
    };

    let gram = assemble_gram(&geometry, &cfg.domain).map_err(solver_err)?;
    let minq = min_quotient(&gram, cfg.pair).map_err(solver_err)?;
    let maxq = max_quotient(&gram, cfg.pair).map_err(solver_err)?;

    let solution = solve_hum(&target, &gram, &cfg.solver).map_err(|source| match source {
        Error::NotObservableAtTruncation { .. } => ScenarioError::NotObservable { scenario: cfg.name.clone(), source },
        other => solver_err(other),
    })?;
    let direct = solve_hum_direct(&target, &gram).map_err(solver_err)?;
    let scale = direct.plus.iter().chain(&direct.minus).map(|c| c.norm()).fold(0.0, f64::max);
    let diff = solution
        .coefficients
        .plus
        .iter()
        .zip(&direct.plus)
        .chain(solution.coefficients.minus.iter().zip(&direct.minus))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let cg_vs_direct = if scale > 0.0 { diff / scale } else { diff };

    let final_state = simulate_controlled(&target, &solution.control, cfg.horizon).map_err(solver_err)?;
    let target_norm = state_norm(&target, cfg.residual_pair);
    let final_norm = state_norm(&final_state, cfg.residual_pair);
    let final_residual = if target_norm > 0.0 { final_norm / target_norm } else { final_norm };
    let cost = verify_cost_bound(&solution, &target, cfg.cost_pair);

    let residual_criterion = match cfg.geometry {
        GeometryConfig::SquareLeftEdge => 3,
        GeometryConfig::IntervalPoint { .. } => 5,
    };
    let checks = vec![
        Check {
            name: "min_quotient_positive".into(),
            criterion: 1,
            passed: minq.value > 0.0,
            value: minq.value,
            threshold: 0.0,
        },
        Check {
            name: "final_residual".into(),
            criterion: residual_criterion,
            passed: final_residual <= cfg.residual_tol,
            value: final_residual,
            threshold: cfg.residual_tol,
        },
        Check {
            name: "cg_matches_direct".into(),
            criterion: 3,
            passed: cg_vs_direct <= 1e-6,
            value: cg_vs_direct,
            threshold: 1e-6,
        },
    ];

    let results = ScenarioResults {
        name: cfg.name.clone(),
        domain: cfg.domain,
        geometry: cfg.geometry.clone(),
        horizon: cfg.horizon,
        pair: cfg.pair,
        residual_pair: cfg.residual_pair,
        cost_pair: cfg.cost_pair,
        xi_verdict,
        min_quotient: minq.value,
        max_quotient: maxq,
        solver: SolverReport {
            iterations: solution.iterations,
            residual: solution.residual,
            gram_energy: solution.gram_energy,
            cg_vs_direct,
        },
        cost,
        final_residual,
        checks,
    };

    let dt = cfg.dt.unwrap_or(cfg.horizon / 1000.0);
    let mut control_csv = Vec::new();
    solution.control.write_csv(dt, &mut control_csv).map_err(solver_err)?;
    // observed trace of the minimizer: ∂_ν φ̃ on the square, φ̃(ξ,·) on the interval
    let sign = geometry.trace_sign();
    let mut header = channel_header(&geometry, solution.control.channels.len());
    for h in header.iter_mut().skip(1) {
        *h = format!("y_{h}");
    }
    let mut trace_csv = Vec::new();
    write_samples(&mut trace_csv, &header, cfg.horizon, dt, |t| {
        solution.control.sample(t).into_iter().map(|u| sign * u).collect()
    })
    .map_err(solver_err)?;

    let mut results_json = serde_json::to_string_pretty(&results).map_err(config_err)?;
    results_json.push('\n');
    Ok(Bundle {
        results,
        results_json,
        control_csv: String::from_utf8(control_csv).expect("csv is utf-8"),
        trace_csv: String::from_utf8(trace_csv).expect("csv is utf-8"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub truncation: String,
    pub horizon: f64,
    pub min_quotient: f64,
    pub max_quotient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Per truncation, the smallest scanned horizon from which on every
    /// scanned horizon has `min/max > threshold_ratio`.
    pub thresholds: Vec<(String, Option<f64>)>,
    pub threshold_ratio: f64,
}

impl ScanReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ScenarioError> {
        let io = |e: csv::Error| ScenarioError::Io { path: "<scan csv>".into(), message: e.to_string() };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["truncation", "T", "min_quotient", "max_quotient"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.truncation.clone(),
                format!("{}", r.horizon),
                format!("{:e}", r.min_quotient),
                format!("{:e}", r.max_quotient),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| ScenarioError::Io { path: "<scan csv>".into(), message: e.to_string() })
    }
}

pub fn truncation_label(domain: &DomainSpec) -> String {
    match *domain {
        DomainSpec::Interval { n } => format!("{n}"),
        DomainSpec::Square { k1, k2 } => format!("{k1}x{k2}"),
    }
}

/// Min/max quotient over a grid of horizons and truncations. An empty grid
/// gives an empty report.
pub fn scan_observability(
    kind: ObservationKind,
    pair: SobolevIndex,
    horizons: &[f64],
    truncations: &[DomainSpec],
) -> Result<ScanReport, ScenarioError> {
    const THRESHOLD_RATIO: f64 = 1e-8;
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for domain in truncations {
        let label = truncation_label(domain);
        let mut ok_from: Option<f64> = None;
        let mut sorted = horizons.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut per_t = Vec::new();
        for &t in horizons {
            let geometry = ObservationGeometry::new(kind, t).map_err(config_err)?;
            let gram = assemble_gram(&geometry, domain).map_err(config_err)?;
            let solver = |source| ScenarioError::Solver { scenario: "scan".into(), source };
            let minq = min_quotient(&gram, pair).map_err(solver)?.value;
            let maxq = max_quotient(&gram, pair).map_err(solver)?;
            per_t.push((t, minq / maxq));
            rows.push(ScanRow { truncation: label.clone(), horizon: t, min_quotient: minq, max_quotient: maxq });
        }
        for &t in sorted.iter().rev() {
            let ratio = per_t.iter().find(|(h, _)| *h == t).map(|p| p.1).unwrap_or(0.0);
            if ratio > THRESHOLD_RATIO {
                ok_from = Some(t);
            } else {
                break;
            }
        }
        thresholds.push((label, ok_from));
    }
    Ok(ScanReport { rows, thresholds, threshold_ratio: THRESHOLD_RATIO })
}
