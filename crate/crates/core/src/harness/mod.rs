//! Scenario files, builtin systems and convergence sweeps.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "name": "classic_zeno",
//!   "dim": 2,
//!   "measurement": {"kraus": [K1, K2], "kind": "channel"},
//!   "generator": {"hamiltonian": H, "jumps": [V1]},
//!   "t": 1.0,
//!   "sweep": [4, 8, 16],
//!   "norm_kind": "proxy",
//!   "seed": 7,
//!   "gap_min": 0.05
//! }
//! ```
//!
//! Matrices are arrays of rows of `[re, im]` pairs. The measurement may
//! instead be given as `{"superop": S}` with a `d²×d²` matrix in the
//! column-stacking convention, and the generator as `{"path": P}` with `P`
//! in the [`GeneratorPath`] schema. Time-dependent scenarios need an
//! `initial_state`.

pub mod checks;
pub mod emit;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{MatrixJson, MAX_INPUT_DIM};
use crate::error::{Error, Result};
use crate::lindblad::{GeneratorJson, GeneratorPath, GeneratorPathJson, LindbladGenerator};
use crate::spectral::{gap_projector, spectrum_report, SpectralReport, DEFAULT_GAP_MIN};
use crate::superop::{
    apply, kraus_to_superop, rank1_lower_bound, DensityMatrix, KrausKind, KrausSet, MatrixOperator, SuperOp,
};
use crate::timedep::{intercepted_product, zeno_limit_timedep, InterceptedConfig, DEFAULT_TOL};
use crate::zeno_static::{
    convergence_curve, zeno_limit_static, zeno_product, ConvergenceRecord, NormKind, ZenoStaticScenario,
};

/// Default sweep `{4, 8, …, 1024}`.
pub const DEFAULT_SWEEP: [usize; 9] = [4, 8, 16, 32, 64, 128, 256, 512, 1024];
/// Largest number of interceptions accepted in a sweep.
pub const MAX_SWEEP_N: usize = 1 << 20;
/// Tolerance for the time-dependent limit `ρ̃(τ)`.
pub const LIMIT_TOL: f64 = 1e-10;

const BUILTINS: [(&str, &str); 5] = [
    ("classic_zeno", include_str!("../../scenarios/classic_zeno.json")),
    ("damped_rabi", include_str!("../../scenarios/damped_rabi.json")),
    ("timedep_drive", include_str!("../../scenarios/timedep_drive.json")),
    ("random_gapped", include_str!("../../scenarios/random_gapped.json")),
    ("identity_m", include_str!("../../scenarios/identity_m.json")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<KrausKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superop: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<GeneratorPathJson>,
}

/// The scenario file schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub name: String,
    pub dim: usize,
    pub measurement: MeasurementJson,
    pub generator: DynamicsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_kind: Option<NormKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<MatrixJson>,
}

#[derive(Clone, Debug)]
pub enum Measurement {
    Kraus(KrausSet),
    Superop(SuperOp),
}

impl Measurement {
    pub fn superop(&self) -> SuperOp {
        match self {
            Measurement::Kraus(k) => kraus_to_superop(k),
            Measurement::Superop(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Dynamics {
    Static(LindbladGenerator),
    Path(GeneratorPath),
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub dim: usize,
    pub measurement: Measurement,
    pub dynamics: Dynamics,
    /// Evolution time; the horizon for time-dependent scenarios.
    pub t: f64,
    pub sweep: Vec<usize>,
    pub norm_kind: NormKind,
    pub seed: u64,
    pub gap_min: f64,
    pub initial_state: Option<DensityMatrix>,
}

fn check_sweep(sweep: &[usize]) -> Result<()> {
    if let Some(&bad) = sweep.iter().find(|&&n| n == 0 || n > MAX_SWEEP_N) {
        return Err(Error::invariant("sweep", format!("n = {bad} outside 1..={MAX_SWEEP_N}")));
    }
    if let Some(k) = sweep.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invariant("sweep", format!("not strictly increasing at index {}", k + 1)));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(json: &ScenarioJson) -> Result<Self> {
        let d = json.dim;
        if d == 0 || d > MAX_INPUT_DIM {
            return Err(Error::invariant("dim", format!("dimension {d} outside 1..={MAX_INPUT_DIM}")));
        }
        if json.name.is_empty() {
            return Err(Error::invariant("name", "empty name"));
        }
        let measurement = match (&json.measurement.kraus, &json.measurement.superop) {
            (Some(ops), None) => {
                if ops.is_empty() {
                    return Err(Error::invariant("measurement.kraus", "no Kraus operators"));
                }
                let mats = ops
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m.to_square(&format!("measurement.kraus[{k}]"), Some(d)))
                    .collect::<Result<Vec<_>>>()?;
                let kind = json.measurement.kind.unwrap_or(KrausKind::Channel);
                Measurement::Kraus(
                    KrausSet::new(mats, kind).map_err(|e| Error::invariant("measurement.kraus", e.to_string()))?,
                )
            }
            (None, Some(s)) => {
                if json.measurement.kind.is_some() {
                    return Err(Error::invariant("measurement.kind", "only meaningful with `kraus`"));
                }
                let mat = s.to_square("measurement.superop", Some(d * d))?;
                Measurement::Superop(SuperOp::new(d, mat)?)
            }
            _ => return Err(Error::invariant("measurement", "give exactly one of `kraus` and `superop`")),
        };
        let g = &json.generator;
        let dynamics = match (&g.hamiltonian, &g.path) {
            (Some(h), None) => {
                let data = GeneratorJson { hamiltonian: h.clone(), jumps: g.jumps.clone() };
                Dynamics::Static(LindbladGenerator::from_json(&data, d, "generator.")?)
            }
            (None, Some(p)) => {
                if !g.jumps.is_empty() {
                    return Err(Error::invariant("generator.jumps", "jumps belong inside the path keyframes"));
                }
                if p.dim != d {
                    return Err(Error::invariant("generator.path.dim", format!("expected {d}, found {}", p.dim)));
                }
                Dynamics::Path(GeneratorPath::from_json(p).map_err(|e| prefix_field(e, "generator.path."))?)
            }
            _ => return Err(Error::invariant("generator", "give exactly one of `hamiltonian` and `path`")),
        };
        let t = match (&dynamics, json.t) {
            (Dynamics::Static(_), None) => 1.0,
            (Dynamics::Static(_), Some(t)) => {
                if !(t >= 0.0) || !t.is_finite() {
                    return Err(Error::invariant("t", format!("{t} must be finite and non-negative")));
                }
                t
            }
            (Dynamics::Path(p), None) => p.horizon(),
            (Dynamics::Path(p), Some(t)) => {
                if t != p.horizon() {
                    return Err(Error::invariant("t", format!("{t} differs from the path horizon {}", p.horizon())));
                }
                t
            }
        };
        let sweep = json.sweep.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec());
        check_sweep(&sweep)?;
        let gap_min = json.gap_min.unwrap_or(DEFAULT_GAP_MIN);
        if !(gap_min > 0.0 && gap_min < 1.0) {
            return Err(Error::invariant("gap_min", format!("{gap_min} outside (0, 1)")));
        }
        let initial_state = match &json.initial_state {
            None => None,
            Some(m) => {
                let op = MatrixOperator::new(m.to_square("initial_state", Some(d))?)?;
                Some(DensityMatrix::new(op).map_err(|e| Error::invariant("initial_state", e.to_string()))?)
            }
        };
        let default_norm = match dynamics {
            Dynamics::Static(_) => NormKind::Proxy,
            Dynamics::Path(_) => NormKind::StateTrace,
        };
        let norm_kind = json.norm_kind.unwrap_or(default_norm);
        if norm_kind == NormKind::StateTrace && initial_state.is_none() {
            return Err(Error::invariant("initial_state", "required for norm_kind state_trace"));
        }
        if matches!(dynamics, Dynamics::Path(_)) && initial_state.is_none() {
            return Err(Error::invariant("initial_state", "required for time-dependent scenarios"));
        }
        Ok(Self {
            name: json.name.clone(),
            dim: d,
            measurement,
            dynamics,
            t,
            sweep,
            norm_kind,
            seed: json.seed,
            gap_min,
            initial_state,
        })
    }

    pub fn to_json(&self) -> ScenarioJson {
        let measurement = match &self.measurement {
            Measurement::Kraus(k) => MeasurementJson {
                kraus: Some(k.ops().iter().map(MatrixJson::from_matrix).collect()),
                kind: Some(k.kind()),
                superop: None,
            },
            Measurement::Superop(s) => {
                MeasurementJson { kraus: None, kind: None, superop: Some(MatrixJson::from_matrix(s.matrix())) }
            }
        };
        let generator = match &self.dynamics {
            Dynamics::Static(g) => {
                let data = g.to_json();
                DynamicsJson { hamiltonian: Some(data.hamiltonian), jumps: data.jumps, path: None }
            }
            Dynamics::Path(p) => DynamicsJson { hamiltonian: None, jumps: Vec::new(), path: Some(p.to_json()) },
        };
        ScenarioJson {
            name: self.name.clone(),
            dim: self.dim,
            measurement,
            generator,
            t: Some(self.t),
            sweep: Some(self.sweep.clone()),
            norm_kind: Some(self.norm_kind),
            seed: self.seed,
            gap_min: Some(self.gap_min),
            initial_state: self.initial_state.as_ref().map(|r| MatrixJson::from_matrix(r.op().matrix())),
        }
    }

    /// Replaces the sweep, validating it.
    pub fn with_sweep(mut self, sweep: Vec<usize>) -> Result<Self> {
        check_sweep(&sweep)?;
        self.sweep = sweep;
        Ok(self)
    }

    pub fn with_norm_kind(mut self, norm_kind: NormKind) -> Result<Self> {
        if norm_kind == NormKind::StateTrace && self.initial_state.is_none() {
            return Err(Error::invariant("norm_kind", "state_trace requires an initial state"));
        }
        self.norm_kind = norm_kind;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The generator at `t = 0` (the only one for static scenarios).
    pub fn generator(&self) -> &SuperOp {
        match &self.dynamics {
            Dynamics::Static(g) => g.superop(),
            Dynamics::Path(p) => p.keyframes()[0].generator.superop(),
        }
    }
}

fn prefix_field(e: Error, prefix: &str) -> Error {
    match e {
        Error::Invariant { field, message } => Error::Invariant { field: format!("{prefix}{field}"), message },
        other => other,
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let json: ScenarioJson = serde_json::from_str(text)?;
    ScenarioConfig::from_json(&json)
}

/// Loads a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Names of the builtin scenarios.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = BUILTINS.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::UnknownScenario(name.into()))?;
    parse_scenario(text)
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    BUILTINS.iter().map(|(_, text)| parse_scenario(text).expect("builtin scenarios are valid")).collect()
}

/// A builtin name or a path to a scenario file.
pub fn resolve_scenario(spec: &str) -> Result<ScenarioConfig> {
    if BUILTINS.iter().any(|(n, _)| *n == spec) {
        return builtin(spec);
    }
    if Path::new(spec).exists() {
        return load_scenario(spec);
    }
    Err(Error::UnknownScenario(spec.into()))
}

/// Tolerances and settings under which a result was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub gap_min: f64,
    pub norm_kind: NormKind,
    pub propagator_tol: Option<f64>,
    pub limit_tol: Option<f64>,
    /// Wall time of the sweep. Not serialized, so output files stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scenario: String,
    pub records: Vec<ConvergenceRecord>,
    /// Least-squares slope of `log error` against `log n`.
    pub slope: Option<f64>,
    pub final_error: Option<f64>,
    pub metadata: RunMetadata,
}

/// Least-squares slope of `(ln n, ln error)` over records with positive
/// error; `None` with fewer than two such records.
pub fn loglog_slope(records: &[ConvergenceRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        records.iter().filter(|r| r.error > 0.0).map(|r| ((r.n as f64).ln(), r.error.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn state_distance(t: &SuperOp, rho: &DensityMatrix, target: &MatrixOperator) -> Result<f64> {
    let out = apply(t, rho.op())?;
    Ok(crate::superop::trace_norm(&(out.matrix() - target.matrix())))
}

fn diff_norm(diff: &SuperOp, kind: NormKind, seed: u64) -> f64 {
    match kind {
        NormKind::Rank1Lower => rank1_lower_bound(diff, seed),
        _ => diff.proxy_norm(),
    }
}

/// The spectral report of the scenario's measurement.
pub fn scenario_spectrum(cfg: &ScenarioConfig) -> Result<SpectralReport> {
    spectrum_report(&cfg.measurement.superop(), cfg.gap_min)
}

/// Runs the convergence sweep of a scenario. Static scenarios compare
/// `(M·e^{t𝓛/n})ⁿ` with `e^{tP𝓛P}·P`; time-dependent ones compare `Tₙ`
/// with the propagator of `P𝓛ₜP` after `P`.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let m = cfg.measurement.superop();
    let (records, propagator_tol, limit_tol) = match &cfg.dynamics {
        Dynamics::Static(g) => {
            let s = ZenoStaticScenario::new(m, g.superop().clone(), cfg.t, cfg.gap_min)?;
            let records = match (&cfg.initial_state, cfg.norm_kind) {
                (Some(rho), NormKind::StateTrace) => {
                    let limit = zeno_limit_static(&s)?;
                    let target = apply(&limit, rho.op())?;
                    cfg.sweep
                        .par_iter()
                        .map(|&n| {
                            let error = state_distance(&zeno_product(&s, n)?, rho, &target)?;
                            Ok(ConvergenceRecord { n, error, norm_kind: NormKind::StateTrace })
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                _ => convergence_curve(&s, &cfg.sweep, cfg.norm_kind, cfg.seed)?,
            };
            (records, None, None)
        }
        Dynamics::Path(path) => {
            let (_, p) = gap_projector(&m, cfg.gap_min)?;
            let limit = zeno_limit_timedep(&p.proj, path, LIMIT_TOL)?;
            let rho = cfg.initial_state.as_ref().ok_or_else(|| Error::invariant("initial_state", "missing"))?;
            let target = apply(&limit, rho.op())?;
            // Each Tₙ is already parallel over its factors.
            let records = cfg
                .sweep
                .iter()
                .map(|&n| {
                    let tn = intercepted_product(&InterceptedConfig::new(m.clone(), path.clone(), n, 1)?)?;
                    let error = match cfg.norm_kind {
                        NormKind::StateTrace => state_distance(&tn, rho, &target)?,
                        kind => diff_norm(&(&tn - &limit), kind, cfg.seed),
                    };
                    Ok(ConvergenceRecord { n, error, norm_kind: cfg.norm_kind })
                })
                .collect::<Result<Vec<_>>>()?;
            (records, Some(DEFAULT_TOL), Some(LIMIT_TOL))
        }
    };
    Ok(ExperimentResult {
        scenario: cfg.name.clone(),
        slope: loglog_slope(&records),
        final_error: records.last().map(|r| r.error),
        records,
        metadata: RunMetadata {
            seed: cfg.seed,
            gap_min: cfg.gap_min,
            norm_kind: cfg.norm_kind,
            propagator_tol,
            limit_tol,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
    })
}
