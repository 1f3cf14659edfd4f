//! Time-independent Zeno products `(M·e^{t𝓛/n})ⁿ` and their limit
//! `e^{tP𝓛P}·P`, together with the intermediate objects used to prove
//! convergence: projected products, the Chernoff gap and `n(C − 𝟙)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{check_generator, TRACE_ANNIHILATION_TOL};
use crate::spectral::{
    epsilon_window, gap_projector, resolvent_sup, riesz_contour, RieszProjector, SpectralReport, WINDOW_GRID,
};
use crate::superop::{classify_map, expm_superop, rank1_lower_bound, SuperOp};

/// Products with fewer factors are multiplied out one by one.
pub const ITERATED_PRODUCT_LIMIT: usize = 1 << 10;
/// Slack in the contraction pre-check of [`chernoff_gap`].
pub const CONTRACTION_TOL: f64 = 1e-9;
/// Required agreement of the three generator variants.
pub const VARIANT_TOL: f64 = 1e-10;

/// Norm used to measure the distance to the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `σ_max` of the superoperator matrix.
    Proxy,
    /// Rank-one lower estimate of the induced trace norm.
    Rank1Lower,
    /// Trace norm of the difference of two output states.
    StateTrace,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Proxy => "proxy",
            NormKind::Rank1Lower => "rank1_lower",
            NormKind::StateTrace => "state_trace",
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proxy" => Ok(NormKind::Proxy),
            "rank1" | "rank1_lower" => Ok(NormKind::Rank1Lower),
            "state_trace" => Ok(NormKind::StateTrace),
            other => Err(Error::invariant("norm_kind", format!("unknown norm `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub error: f64,
    pub norm_kind: NormKind,
}

/// Tolerance for `vec(𝟙)†·𝓛 = 0`, scaled to the size of `l`.
pub(crate) fn generator_tol(l: &SuperOp) -> f64 {
    TRACE_ANNIHILATION_TOL * l.proxy_norm().max(1.0)
}

/// A gapped operation `M`, a generator `𝓛` and a time `t`, with the
/// projector `P` for the eigenvalue 1 of `M` and the admissible window
/// `ε` of `s ↦ M·e^{s·t𝓛}`.
#[derive(Clone, Debug)]
pub struct ZenoStaticScenario {
    m: SuperOp,
    l: SuperOp,
    t: f64,
    report: SpectralReport,
    p: RieszProjector,
    epsilon: f64,
}

impl ZenoStaticScenario {
    pub fn new(m: SuperOp, l: SuperOp, t: f64, gap_min: f64) -> Result<Self> {
        if m.dim() != l.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: l.dim() });
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::OutOfRange(format!("t = {t} must be finite and non-negative")));
        }
        if !check_generator(&l, generator_tol(&l)) {
            return Err(Error::NotGenerator("trace not annihilated or e^{sL} not completely positive".into()));
        }
        let (report, p) = gap_projector(&m, gap_min)?;
        let epsilon = epsilon_window(&m, &l.scale(t), 1.0, WINDOW_GRID);
        Ok(Self { m, l, t, report, p, epsilon })
    }

    pub fn measurement(&self) -> &SuperOp {
        &self.m
    }

    pub fn generator(&self) -> &SuperOp {
        &self.l
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn report(&self) -> &SpectralReport {
        &self.report
    }

    pub fn projector(&self) -> &SuperOp {
        &self.p.proj
    }

    /// Grid estimate of the window in units of the normalized time `s`,
    /// where one Zeno step is `s = 1/n`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Smallest `n` with `n ≥ 1/ε`.
    pub fn min_admissible_n(&self) -> Option<usize> {
        (self.epsilon > 0.0).then(|| (1.0 / self.epsilon).ceil() as usize)
    }

    /// `M·e^{t𝓛/n}`.
    fn step(&self, n: usize) -> Result<SuperOp> {
        Ok(self.m.compose(&expm_superop(&self.l, self.t / n as f64)?))
    }

    fn admissible(&self, n: usize) -> Result<()> {
        match self.min_admissible_n() {
            Some(k) if n >= k => Ok(()),
            Some(k) => Err(Error::BelowThreshold { n, threshold: k as f64 }),
            None => Err(Error::BelowThreshold { n, threshold: f64::INFINITY }),
        }
    }

    /// `P_{1/n}`, the projector of `M·e^{t𝓛/n}` enclosed by `Γ`.
    pub fn moving_projector(&self, n: usize) -> Result<SuperOp> {
        check_n(n)?;
        self.admissible(n)?;
        Ok(riesz_contour(&self.step(n)?, &self.report.outer_contour())?.proj)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    Ok(())
}

/// `fⁿ`, multiplied out for small `n` and by binary powering otherwise.
fn power(f: &SuperOp, n: usize) -> SuperOp {
    if n >= ITERATED_PRODUCT_LIMIT {
        return f.pow(n);
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = f.compose(&acc);
    }
    acc
}

/// `(M·e^{t𝓛/n})ⁿ`.
pub fn zeno_product(s: &ZenoStaticScenario, n: usize) -> Result<SuperOp> {
    check_n(n)?;
    Ok(power(&s.step(n)?, n))
}

/// `e^{tP𝓛P}·P`.
pub fn zeno_limit_static(s: &ZenoStaticScenario) -> Result<SuperOp> {
    let p = s.projector();
    let plp = p.compose(&s.l).compose(p);
    Ok(expm_superop(&plp, s.t)?.compose(p))
}

/// Distance of the `n`-step Zeno product to the limit for every `n`, in
/// input order. Entries are computed in parallel.
pub fn convergence_curve(
    s: &ZenoStaticScenario,
    ns: &[usize],
    norm_kind: NormKind,
    seed: u64,
) -> Result<Vec<ConvergenceRecord>> {
    if norm_kind == NormKind::StateTrace {
        return Err(Error::invariant("norm_kind", "state_trace requires an initial state"));
    }
    let limit = zeno_limit_static(s)?;
    ns.par_iter()
        .map(|&n| {
            let diff = &zeno_product(s, n)? - &limit;
            let error = match norm_kind {
                NormKind::Proxy => diff.proxy_norm(),
                _ => rank1_lower_bound(&diff, seed),
            };
            Ok(ConvergenceRecord { n, error, norm_kind })
        })
        .collect()
}

/// Upper estimate `√d·σ_max` of the induced trace norm.
pub(crate) fn norm_upper(t: &SuperOp) -> f64 {
    (t.dim() as f64).sqrt() * t.proxy_norm()
}

/// Both sides of `‖Cⁿ − e^{n(C−𝟙)}‖ ≤ √n·‖C − 𝟙‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChernoffGap {
    pub n: usize,
    /// Rank-one lower estimate of the left side.
    pub lhs_lower: f64,
    /// `√n` times the upper estimate of `‖C − 𝟙‖`.
    pub rhs: f64,
}

/// Evaluates the Chernoff inequality for a contraction `C`.
///
/// `C` is accepted if it is a quantum operation (hence a trace-norm
/// contraction) or if the upper norm estimate is at most `1 + 1e-9`.
pub fn chernoff_gap(c: &SuperOp, n: usize, seed: u64) -> Result<ChernoffGap> {
    check_n(n)?;
    let upper = norm_upper(c);
    if !classify_map(c, CONTRACTION_TOL).is_operation() && upper > 1.0 + CONTRACTION_TOL {
        return Err(Error::NotContraction(upper));
    }
    let shifted = c - &SuperOp::identity(c.dim());
    let lhs = &c.pow(n) - &expm_superop(&shifted, n as f64)?;
    let lhs_lower = rank1_lower_bound(&lhs, seed);
    let rhs = (n as f64).sqrt() * norm_upper(&shifted);
    Ok(ChernoffGap { n, lhs_lower, rhs })
}

/// `(P_{1/n}·M·e^{t𝓛/n}·P_{1/n})ⁿ`; requires `n ≥ 1/ε`.
pub fn projected_zeno_product(s: &ZenoStaticScenario, n: usize) -> Result<SuperOp> {
    check_n(n)?;
    s.admissible(n)?;
    let f = s.step(n)?;
    let pn = riesz_contour(&f, &s.report.outer_contour())?.proj;
    Ok(power(&pn.compose(&f).compose(&pn), n))
}

/// `n·(C − P_{1/n})` with `C = P_{1/n}·M·e^{t𝓛/n}·P_{1/n}`. The time is
/// absorbed into the generator, so the limit is `P(t𝓛)P`.
pub fn central_quantity(s: &ZenoStaticScenario, n: usize) -> Result<SuperOp> {
    check_n(n)?;
    s.admissible(n)?;
    let f = s.step(n)?;
    let pn = riesz_contour(&f, &s.report.outer_contour())?.proj;
    let c = pn.compose(&f).compose(&pn);
    Ok((&c - &pn).scale(n as f64))
}

/// Both sides of the bound on the part of the Zeno product inside `γ`:
/// `‖(M·e^{t𝓛/n})ⁿ − (P_{1/n}·M·e^{t𝓛/n}·P_{1/n})ⁿ‖ ≤ r^{n+1}·s(n)`,
/// with `r = (1+δ)/2` and `s(n)` the sampled resolvent supremum on `γ`.
/// Both sides are in the proxy norm.
pub fn projection_decay(s: &ZenoStaticScenario, n: usize, t_grid: usize) -> Result<(f64, f64)> {
    let lhs = zeno_product(s, n)?.distance(&projected_zeno_product(s, n)?);
    let gamma = s.report.inner_contour().with_nodes(64);
    let sup = resolvent_sup(&s.m, &s.l.scale(s.t), &gamma, t_grid, n)?;
    let rhs = gamma.radius.powi(n as i32 + 1) * sup;
    Ok((lhs, rhs))
}

/// The three limit generators `P𝓛P`, `P𝓛` and `P(id + 𝓛) − id`, and the
/// largest pairwise distance between the maps `e^{𝓛̃}·P` they produce.
#[derive(Clone, Debug)]
pub struct GeneratorVariants {
    pub plp: SuperOp,
    pub pl: SuperOp,
    pub shifted: SuperOp,
    pub max_distance: f64,
}

pub fn generator_variants(p: &SuperOp, l: &SuperOp) -> Result<GeneratorVariants> {
    if p.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: l.dim() });
    }
    let defect = p.compose(p).distance(p);
    if defect > 1e-8 {
        return Err(Error::OutOfRange(format!("P is not idempotent (defect {defect:.3e})")));
    }
    let id = SuperOp::identity(p.dim());
    let pl = p.compose(l);
    let plp = pl.compose(p);
    let shifted = &p.compose(&(&id + l)) - &id;
    let maps =
        [&plp, &pl, &shifted].iter().map(|g| Ok(expm_superop(g, 1.0)?.compose(p))).collect::<Result<Vec<_>>>()?;
    let max_distance = maps[0].distance(&maps[1]).max(maps[0].distance(&maps[2])).max(maps[1].distance(&maps[2]));
    Ok(GeneratorVariants { plp, pl, shifted, max_distance })
}
