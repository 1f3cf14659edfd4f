//! Self-checks run by `zeno check`: each suite evaluates one of the
//! inequalities or identities on seeded random instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::GeneratorPath;
use crate::random::{random_channel, random_gapped_channel, random_gkls};
use crate::spectral::{power_limit_projector, riesz_contour, riesz_schur, spectrum_report, CLUSTER_RADIUS};
use crate::superop::{c, classify_map, kraus_to_superop};
use crate::timedep::{lemma4_bound, telescoping_check, InterceptedConfig};
use crate::zeno_static::chernoff_gap;

use super::{builtin, Dynamics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Chernoff,
    Lemma4,
    Projectors,
    Telescoping,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Chernoff, Suite::Lemma4, Suite::Projectors, Suite::Telescoping];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Chernoff => "chernoff",
            Suite::Lemma4 => "lemma4",
            Suite::Projectors => "projectors",
            Suite::Telescoping => "telescoping",
        }
    }

    /// `"all"` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        Self::ALL
            .iter()
            .find(|x| x.name() == s)
            .map(|x| vec![*x])
            .ok_or_else(|| Error::invariant("suite", format!("unknown suite `{s}`")))
    }
}

/// One evaluated case.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub case: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<12} {:<32} {}", self.suite.name(), self.case, self.detail)
    }
}

pub const CHERNOFF_CHANNELS: u64 = 100;
pub const CHERNOFF_NS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const CHERNOFF_SLACK: f64 = 1e-9;

/// `lhs_lower ≤ √n·‖C − 𝟙‖ + 1e-9` for seeded random channels with
/// `d ∈ {2, 3}`.
pub fn chernoff_suite() -> Result<Vec<CheckOutcome>> {
    (0..CHERNOFF_CHANNELS)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 2 + (seed as usize % 2);
            let ch = kraus_to_superop(&random_channel(&mut rng, d, 1 + (seed as usize % 3)));
            let mut worst = f64::NEG_INFINITY;
            for n in CHERNOFF_NS {
                let g = chernoff_gap(&ch, n, seed)?;
                worst = worst.max(g.lhs_lower - g.rhs);
            }
            Ok(CheckOutcome {
                suite: Suite::Chernoff,
                case: format!("channel seed={seed} d={d}"),
                passed: worst <= CHERNOFF_SLACK,
                detail: format!("max(lhs - rhs) = {worst:.3e}"),
            })
        })
        .collect()
}

pub const LEMMA4_SEED: u64 = 2024;
pub const LEMMA4_TIMES: [f64; 3] = [0.0, 0.3, 0.6];
pub const LEMMA4_DELTAS: [f64; 3] = [0.1, 0.05, 0.025];
pub const LEMMA4_SLACK: f64 = 1e-8;

/// The linear path between two seeded random qubit GKLS generators.
pub fn lemma4_path() -> GeneratorPath {
    let mut rng = ChaCha8Rng::seed_from_u64(LEMMA4_SEED);
    let g0 = random_gkls(&mut rng, 2);
    let g1 = random_gkls(&mut rng, 2);
    GeneratorPath::linear(g0, g1, 1.0).expect("valid path")
}

/// `lhs_lower ≤ L(δ|t−s| + δ²/2) + 1e-8` on the `(t, s, δ)` grid.
pub fn lemma4_suite() -> Result<Vec<CheckOutcome>> {
    let path = lemma4_path();
    let grid: Vec<(f64, f64, f64)> = LEMMA4_TIMES
        .iter()
        .flat_map(|&t| LEMMA4_TIMES.iter().flat_map(move |&s| LEMMA4_DELTAS.iter().map(move |&d| (t, s, d))))
        .collect();
    grid.par_iter()
        .map(|&(t, s, delta)| {
            let b = lemma4_bound(&path, t, s, delta, LEMMA4_SEED)?;
            Ok(CheckOutcome {
                suite: Suite::Lemma4,
                case: format!("t={t} s={s} delta={delta}"),
                passed: b.lhs_lower <= b.rhs + LEMMA4_SLACK,
                detail: format!("lhs {:.3e} <= rhs {:.3e}", b.lhs_lower, b.rhs),
            })
        })
        .collect()
}

pub const PROJECTOR_CASES: u64 = 50;
pub const PROJECTOR_AGREEMENT: f64 = 1e-8;
pub const IDEMPOTENCY_TOL: f64 = 1e-10;
pub const OPERATION_TOL: f64 = 1e-7;

/// Contour, Schur and power projectors of seeded random gapped channels
/// agree, are idempotent, and are quantum operations.
pub fn projectors_suite() -> Result<Vec<CheckOutcome>> {
    (0..PROJECTOR_CASES)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 2 + (seed as usize % 2);
            let (_, m) = random_gapped_channel(&mut rng, d, 0.5);
            let report = spectrum_report(&m, 0.05)?;
            let ps = [
                riesz_contour(&m, &report.outer_contour())?,
                riesz_schur(&m, c(1.0, 0.0), CLUSTER_RADIUS)?,
                power_limit_projector(&m, 1e-13, 64)?,
            ];
            let agreement = ps[0]
                .proj
                .distance(&ps[1].proj)
                .max(ps[0].proj.distance(&ps[2].proj))
                .max(ps[1].proj.distance(&ps[2].proj));
            let idempotency = ps.iter().map(|p| p.idempotency_defect).fold(0.0, f64::max);
            let operations = ps.iter().all(|p| classify_map(&p.proj, OPERATION_TOL).is_operation());
            Ok(CheckOutcome {
                suite: Suite::Projectors,
                case: format!("gapped seed={seed} d={d}"),
                passed: agreement <= PROJECTOR_AGREEMENT && idempotency <= IDEMPOTENCY_TOL && operations,
                detail: format!("agreement {agreement:.2e}, idempotency {idempotency:.2e}, operations {operations}"),
            })
        })
        .collect()
}

pub const TELESCOPING_MS: [usize; 3] = [2, 4, 8];

/// `‖W − W′‖ ≤ 3L/m` on `timedep_drive` with `n = 64m`.
pub fn telescoping_suite() -> Result<Vec<CheckOutcome>> {
    let cfg = builtin("timedep_drive")?;
    let Dynamics::Path(path) = &cfg.dynamics else {
        return Err(Error::invariant("generator", "timedep_drive must be time-dependent"));
    };
    let m = cfg.measurement.superop();
    TELESCOPING_MS
        .iter()
        .map(|&k| {
            let ic = InterceptedConfig::new(m.clone(), path.clone(), 64 * k, k)?;
            let r = telescoping_check(&ic, cfg.seed)?;
            Ok(CheckOutcome {
                suite: Suite::Telescoping,
                case: format!("timedep_drive m={k} n={}", 64 * k),
                passed: r.dist_lower <= r.bound,
                detail: format!("dist {:.3e} <= 3L/m {:.3e}", r.dist_lower, r.bound),
            })
        })
        .collect()
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Chernoff => chernoff_suite(),
        Suite::Lemma4 => lemma4_suite(),
        Suite::Projectors => projectors_suite(),
        Suite::Telescoping => telescoping_suite(),
    }
}
