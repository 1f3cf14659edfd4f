//! Spectral gap analysis of quantum operations and the spectral projector
//! for the eigenvalue 1, computed three independent ways: contour
//! quadrature of the resolvent, ordered Schur form, and the power limit
//! `P = lim Mⁿ`.

mod schur;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::superop::{c, expm_superop, spectral_norm, CMatrix, SuperOp, ONE};

pub use schur::SYLVESTER_SEPARATION;

/// Eigenvalues within this distance of 1 form the peripheral cluster.
pub const CLUSTER_RADIUS: f64 = 1e-8;
/// Default quantitative margin in `δ < 1 − gap_min`.
pub const DEFAULT_GAP_MIN: f64 = 0.05;
/// Required clearance between eigenvalues and a contour.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;
pub const MIN_NODES: usize = 16;
pub const MAX_NODES: usize = 1 << 14;
/// Node doubling stops once successive quadratures differ by less than this.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Default number of grid points in [`epsilon_window`].
pub const WINDOW_GRID: usize = 64;

/// Eigenvalues of a square matrix, from its complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    schur::eigenvalues(a)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex64>,
    /// Largest modulus outside the eigenvalue-1 cluster (0 if none).
    pub delta: f64,
    pub peripheral_multiplicity: usize,
    pub gap_min: f64,
    pub gap_ok: bool,
}

impl SpectralReport {
    /// The curve `Γ` around 1, radius `(1 − δ)/2`.
    pub fn outer_contour(&self) -> ContourSpec {
        ContourSpec::around_one(self.delta)
    }

    /// The curve `γ` around 0, radius `(1 + δ)/2`.
    pub fn inner_contour(&self) -> ContourSpec {
        ContourSpec::around_zero(self.delta)
    }
}

/// Checks `1 ∈ spec(M) ⊆ {1} ∪ 𝔻_δ` with `δ < 1 − gap_min`.
pub fn spectrum_report(m: &SuperOp, gap_min: f64) -> Result<SpectralReport> {
    if !(gap_min > 0.0 && gap_min < 1.0) {
        return Err(Error::OutOfRange(format!("gap_min = {gap_min} outside (0, 1)")));
    }
    let eigenvalues = eigenvalues(m.matrix())?;
    let (cluster, rest): (Vec<Complex64>, Vec<Complex64>) =
        eigenvalues.iter().partition(|z| (**z - ONE).norm() <= CLUSTER_RADIUS);
    let delta = rest.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let peripheral_multiplicity = cluster.len();
    let gap_ok = peripheral_multiplicity > 0 && delta < 1.0 - gap_min;
    Ok(SpectralReport { eigenvalues, delta, peripheral_multiplicity, gap_min, gap_ok })
}

/// A circle sampled at `nodes` equispaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::OutOfRange(format!("contour radius {radius}")));
        }
        Ok(Self { center, radius, nodes: nodes.max(MIN_NODES) })
    }

    pub fn around_one(delta: f64) -> Self {
        Self { center: ONE, radius: (1.0 - delta) / 2.0, nodes: MIN_NODES }
    }

    pub fn around_zero(delta: f64) -> Self {
        Self { center: c(0.0, 0.0), radius: (1.0 + delta) / 2.0, nodes: MIN_NODES }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(MIN_NODES);
        self
    }

    fn node(&self, k: usize, total: usize) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / total as f64)
    }

    /// Distance of `z` to the circle.
    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    /// Whether `z` lies strictly inside with the given clearance.
    pub fn encloses(&self, z: Complex64, clearance: f64) -> bool {
        (z - self.center).norm() < self.radius - clearance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorMethod {
    Contour,
    Schur,
    Power,
}

#[derive(Clone, Debug)]
pub struct RieszProjector {
    pub proj: SuperOp,
    /// `‖P² − P‖` in the proxy norm.
    pub idempotency_defect: f64,
    pub method: ProjectorMethod,
}

impl RieszProjector {
    fn new(proj: SuperOp, method: ProjectorMethod) -> Self {
        let idempotency_defect = proj.compose(&proj).distance(&proj);
        Self { proj, idempotency_defect, method }
    }

    /// `‖P·A − A·P‖` in the proxy norm.
    pub fn commutation_defect(&self, a: &SuperOp) -> f64 {
        self.proj.compose(a).distance(&a.compose(&self.proj))
    }
}

fn resolvent(z: Complex64, a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    let shifted = CMatrix::identity(n, n) * z - a;
    shifted.lu().try_inverse()
}

/// Trapezoidal sum `Σₖ (zₖ − c)·(zₖ − A)⁻¹` over the nodes `first, first +
/// step, …` of a `total`-point rule.
fn quadrature_sum(a: &CMatrix, contour: &ContourSpec, total: usize, first: usize, step: usize) -> Result<CMatrix> {
    let n = a.nrows();
    let terms: Vec<Option<CMatrix>> = (first..total)
        .step_by(step)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let z = contour.node(k, total);
            resolvent(z, a).map(|r| r * (z - contour.center))
        })
        .collect();
    let mut sum = CMatrix::zeros(n, n);
    for term in terms {
        sum += term.ok_or(Error::EigenSolver)?;
    }
    Ok(sum)
}

pub(crate) fn contour_projector(a: &CMatrix, contour: &ContourSpec) -> Result<CMatrix> {
    for z in eigenvalues(a)? {
        let distance = contour.distance(z);
        if distance < CONTOUR_CLEARANCE {
            return Err(Error::EigenvalueOnContour { eigenvalue: z, distance });
        }
    }
    // (1/2πi)∮(z − A)⁻¹dz with z = c + r·e^{iφ}: each node carries weight
    // (z − c)/N.
    let mut total = contour.nodes.max(MIN_NODES);
    let mut sum = quadrature_sum(a, contour, total, 0, 1)?;
    let mut current = sum.unscale(total as f64);
    let mut change = f64::INFINITY;
    while total < MAX_NODES {
        sum += quadrature_sum(a, contour, 2 * total, 1, 2)?;
        total *= 2;
        let next = sum.unscale(total as f64);
        change = spectral_norm(&(&next - &current));
        current = next;
        if change < QUADRATURE_TOL {
            return Ok(current);
        }
    }
    Err(Error::QuadratureNonConvergence { nodes: total, change })
}

/// Riesz projector `(1/2πi)∮(z·id − A)⁻¹dz` by the trapezoidal rule with
/// node doubling.
pub fn riesz_contour(a: &SuperOp, contour: &ContourSpec) -> Result<RieszProjector> {
    let proj = contour_projector(a.matrix(), contour)?;
    Ok(RieszProjector::new(SuperOp::from_parts(a.dim(), proj), ProjectorMethod::Contour))
}

/// Spectral projector for the eigenvalues within `cluster_radius` of
/// `cluster_center`, from the ordered Schur form.
pub fn riesz_schur(a: &SuperOp, cluster_center: Complex64, cluster_radius: f64) -> Result<RieszProjector> {
    let proj = schur::schur_projector(a.matrix(), cluster_center, cluster_radius)?;
    Ok(RieszProjector::new(SuperOp::from_parts(a.dim(), proj), ProjectorMethod::Schur))
}

/// Squaring stops at roundoff stagnation once the change is this small
/// relative to `tol`.
const POWER_STAGNATION_FACTOR: f64 = 1e3;

/// `lim Mⁿ` by repeated squaring.
///
/// A peripheral eigenvalue of `1 + O(ε)` makes the squares drift away
/// after convergence, so the iterate with the smallest change is returned
/// once the change starts growing again below `1e3·tol`.
pub fn power_limit_projector(m: &SuperOp, tol: f64, max_iter: usize) -> Result<RieszProjector> {
    let mut current = m.clone();
    let mut previous_change = f64::INFINITY;
    for _ in 0..max_iter {
        let next = current.compose(&current);
        let change = next.distance(&current);
        if !change.is_finite() {
            break;
        }
        if change < tol {
            return Ok(RieszProjector::new(next, ProjectorMethod::Power));
        }
        if change > previous_change && previous_change < POWER_STAGNATION_FACTOR * tol {
            return Ok(RieszProjector::new(current, ProjectorMethod::Power));
        }
        previous_change = change;
        current = next;
    }
    Err(Error::PowerNonConvergence(max_iter))
}

/// The projector `P` for eigenvalue 1 of a gapped `M`, by contour
/// integration over `Γ`, together with the spectral report.
pub fn gap_projector(m: &SuperOp, gap_min: f64) -> Result<(SpectralReport, RieszProjector)> {
    let report = spectrum_report(m, gap_min)?;
    if !report.gap_ok {
        return Err(Error::GapFailure(format!(
            "delta = {:.6}, peripheral multiplicity {}, gap_min {}",
            report.delta, report.peripheral_multiplicity, gap_min
        )));
    }
    let p = riesz_contour(m, &report.outer_contour())?;
    Ok((report, p))
}

/// Whether `Γ` and `γ` (for the given `δ`) separate the spectrum of
/// `b`, with exactly `multiplicity` eigenvalues inside `Γ`.
fn separated(b: &CMatrix, delta: f64, multiplicity: usize) -> bool {
    let (outer, inner) = (ContourSpec::around_one(delta), ContourSpec::around_zero(delta));
    let Ok(ev) = eigenvalues(b) else { return false };
    let mut in_outer = 0;
    for z in ev {
        if outer.encloses(z, CONTOUR_CLEARANCE) {
            in_outer += 1;
        } else if !inner.encloses(z, CONTOUR_CLEARANCE) {
            return false;
        }
    }
    in_outer == multiplicity
}

/// Largest grid time `ε ≤ t_max` such that `Γ` and `γ` separate the
/// spectrum of `M·e^{t𝓛}` at every grid time `t ≤ ε`. A lower estimate of
/// the true window; 0 if `M` is not gapped or the first point fails.
pub fn epsilon_window(m: &SuperOp, l: &SuperOp, t_max: f64, grid: usize) -> f64 {
    let Ok(report) = spectrum_report(m, DEFAULT_GAP_MIN) else { return 0.0 };
    if !report.gap_ok || !(t_max > 0.0) || grid == 0 {
        return 0.0;
    }
    let (delta, mult) = (report.delta, report.peripheral_multiplicity);
    if !separated(m.matrix(), delta, mult) {
        return 0.0;
    }
    let mut eps = 0.0;
    for k in 1..=grid {
        let t = t_max * k as f64 / grid as f64;
        let ok = expm_superop(l, t).map(|e| separated(m.compose(&e).matrix(), delta, mult)).unwrap_or(false);
        if !ok {
            break;
        }
        eps = t;
    }
    eps
}

/// `P' = ∂ₜPₜ` at `t = 0` by the central difference `(P_h − P_{−h})/(2h)`.
pub fn projector_derivative(m: &SuperOp, l: &SuperOp, h: f64) -> Result<SuperOp> {
    if !(h > 0.0) {
        return Err(Error::OutOfRange(format!("step h = {h} must be positive")));
    }
    let report = spectrum_report(m, DEFAULT_GAP_MIN)?;
    if epsilon_window(m, l, 2.0 * h, 2) < 2.0 * h || epsilon_window(m, &(-l), h, 1) < h {
        return Err(Error::WindowViolation(format!("window shorter than 2h = {}", 2.0 * h)));
    }
    let contour = report.outer_contour();
    let plus = riesz_contour(&m.compose(&expm_superop(l, h)?), &contour)?;
    let minus = riesz_contour(&m.compose(&expm_superop(l, -h)?), &contour)?;
    Ok((&plus.proj - &minus.proj).scale(0.5 / h))
}

/// `max σ_max((z·id − M·e^{τ𝓛})⁻¹)` over the contour nodes `z` and the
/// `t_grid + 1` equispaced times `τ ∈ [0, 1/n]`.
pub fn resolvent_sup(m: &SuperOp, l: &SuperOp, contour: &ContourSpec, t_grid: usize, n: usize) -> Result<f64> {
    if n == 0 || t_grid == 0 {
        return Err(Error::OutOfRange("n and t_grid must be positive".into()));
    }
    let dim = m.matrix().nrows();
    let mut sup: f64 = 0.0;
    for k in 0..=t_grid {
        let tau = k as f64 / (n as f64 * t_grid as f64);
        let b = m.compose(&expm_superop(l, tau)?).into_matrix();
        let worst = (0..contour.nodes)
            .into_par_iter()
            .map(|j| {
                let z = contour.node(j, contour.nodes);
                let shifted = CMatrix::identity(dim, dim) * z - &b;
                shifted.singular_values().min()
            })
            .reduce(|| f64::INFINITY, f64::min);
        if !(worst > 1e-300) {
            return Err(Error::EigenvalueOnContour { eigenvalue: c(f64::NAN, f64::NAN), distance: worst });
        }
        sup = sup.max(1.0 / worst);
    }
    Ok(sup)
}
