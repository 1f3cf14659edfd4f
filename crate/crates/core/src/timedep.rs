//! Time-dependent evolutions: propagators `T_{[t,s]}` of `∂ₜρ = 𝓛ₜ(ρ)`,
//! evolutions intercepted by `M`, and their Zeno limit generated by
//! `P𝓛ₜP`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{GeneratorPath, Keyframe};
use crate::spectral::{epsilon_window, WINDOW_GRID};
use crate::superop::{expm_superop, rank1_lower_bound, SuperOp};

/// Largest number of midpoint steps tried by [`propagate`].
pub const MAX_STEPS: usize = 1 << 20;
/// Default tolerance for propagators.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Midpoint-exponential product `∏ₖ e^{h·𝓛(s + (k+½)h)}` over `steps`
/// uniform steps, later factors on the left.
fn midpoint_product<F>(dim: usize, f: &F, s: f64, t: f64, steps: usize) -> Result<SuperOp>
where
    F: Fn(f64) -> SuperOp + Sync,
{
    let h = (t - s) / steps as f64;
    let factors = (0..steps)
        .into_par_iter()
        .map(|k| expm_superop(&f(s + (k as f64 + 0.5) * h), h))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = SuperOp::identity(dim);
    for e in &factors {
        acc = e.compose(&acc);
    }
    Ok(acc)
}

/// Propagator of the generator family `f` from `s` to `t`, doubling the
/// number of midpoint steps until successive products differ by less
/// than `tol` in the proxy norm.
fn propagate_fn<F>(dim: usize, f: &F, s: f64, t: f64, tol: f64) -> Result<SuperOp>
where
    F: Fn(f64) -> SuperOp + Sync,
{
    if s == t {
        return Ok(SuperOp::identity(dim));
    }
    let mut steps = 1;
    let mut current = midpoint_product(dim, f, s, t, steps)?;
    let mut change = f64::INFINITY;
    while steps < MAX_STEPS {
        steps *= 2;
        let next = midpoint_product(dim, f, s, t, steps)?;
        change = next.distance(&current);
        current = next;
        if change < tol {
            return Ok(current);
        }
    }
    Err(Error::PropagatorNonConvergence { steps, change })
}

fn check_interval(path: &GeneratorPath, s: f64, t: f64) -> Result<()> {
    if !(0.0 <= s && s <= t && t <= path.horizon()) {
        return Err(Error::OutOfRange(format!("need 0 ≤ s = {s} ≤ t = {t} ≤ {}", path.horizon())));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// `T_{[t,s]}`, the propagator from time `s` to time `t ≥ s`.
pub fn propagate(path: &GeneratorPath, s: f64, t: f64, tol: f64) -> Result<SuperOp> {
    check_interval(path, s, t)?;
    check_tol(tol)?;
    propagate_fn(path.dim(), &|x| path.eval_unchecked(x), s, t, tol)
}

/// Both sides of `‖T_{[t+δ,t]} − e^{δ𝓛ₛ}‖ ≤ L(δ|t−s| + δ²/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma4Bound {
    pub t: f64,
    pub s: f64,
    pub delta: f64,
    pub lhs_lower: f64,
    pub rhs: f64,
}

pub fn lemma4_bound(path: &GeneratorPath, t: f64, s: f64, delta: f64, seed: u64) -> Result<Lemma4Bound> {
    if !(delta >= 0.0) {
        return Err(Error::OutOfRange(format!("delta = {delta} must be non-negative")));
    }
    check_interval(path, t, t + delta)?;
    check_interval(path, s, s)?;
    let exact = propagate(path, t, t + delta, DEFAULT_TOL)?;
    let frozen = expm_superop(&path.eval_unchecked(s), delta)?;
    let lhs_lower = rank1_lower_bound(&(&exact - &frozen), seed);
    let rhs = path.lipschitz_bound() * (delta * (t - s).abs() + 0.5 * delta * delta);
    Ok(Lemma4Bound { t, s, delta, lhs_lower, rhs })
}

/// An evolution along `path` interrupted `n` times by `measurement`, with
/// a coarse resolution `m ≤ n` for the piecewise-constant comparison.
#[derive(Clone, Debug)]
pub struct InterceptedConfig {
    pub measurement: SuperOp,
    pub path: GeneratorPath,
    pub n: usize,
    pub m: usize,
    /// Total tolerance; each of the `n` propagators gets `tol/n`.
    pub tol: f64,
}

impl InterceptedConfig {
    pub fn new(measurement: SuperOp, path: GeneratorPath, n: usize, m: usize) -> Result<Self> {
        let cfg = Self { measurement, path, n, m, tol: DEFAULT_TOL };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.measurement.dim() != self.path.dim() {
            return Err(Error::DimensionMismatch { expected: self.path.dim(), found: self.measurement.dim() });
        }
        if self.n == 0 || self.m == 0 || self.m > self.n {
            return Err(Error::OutOfRange(format!("need 1 ≤ m = {} ≤ n = {}", self.m, self.n)));
        }
        check_tol(self.tol)
    }

    /// `ε` of `s ↦ M·e^{s·τ𝓛_{τj/m}}` for every coarse cell `j = 1..m`.
    /// A zero entry marks a cell where no admissible window was found.
    pub fn cell_windows(&self) -> Vec<f64> {
        let tau = self.path.horizon();
        (1..=self.m)
            .into_par_iter()
            .map(|j| {
                let l = self.path.eval_unchecked(tau * j as f64 / self.m as f64).scale(tau);
                epsilon_window(&self.measurement, &l, 1.0, WINDOW_GRID)
            })
            .collect()
    }
}

/// `Tₙ = ∏ᵢ M·T_{[iτ/n,(i−1)τ/n]}`, with `i = 1` applied first.
pub fn intercepted_product(cfg: &InterceptedConfig) -> Result<SuperOp> {
    cfg.validate()?;
    let (n, tau) = (cfg.n, cfg.path.horizon());
    let per_factor = cfg.tol / n as f64;
    let props = (1..=n)
        .into_par_iter()
        .map(|i| {
            let s = tau * (i - 1) as f64 / n as f64;
            let t = if i == n { tau } else { tau * i as f64 / n as f64 };
            propagate(&cfg.path, s, t, per_factor)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = SuperOp::identity(cfg.path.dim());
    for t in &props {
        acc = cfg.measurement.compose(t).compose(&acc);
    }
    Ok(acc)
}

/// `θ(i) = ⌈im/n⌉/m`, evaluated in integers.
pub fn theta_step(i: usize, n: usize, m: usize) -> Result<f64> {
    if !(1 <= i && i <= n && 1 <= m && m <= n) {
        return Err(Error::OutOfRange(format!("need 1 ≤ i = {i} ≤ n = {n} and 1 ≤ m = {m} ≤ n")));
    }
    Ok((i * m).div_ceil(n) as f64 / m as f64)
}

/// The intercepted evolution `W` and its piecewise-constant counterpart
/// `W′ = ∏ᵢ M·e^{(1/n)𝓛_{θ(i)}}` on the path normalized to `τ = 1`.
#[derive(Clone, Debug)]
pub struct WPair {
    pub w: SuperOp,
    pub w_prime: SuperOp,
    /// Coarse cells `j` (1-based) with a zero admissible window.
    pub cells_without_window: Vec<usize>,
}

pub fn w_pair(cfg: &InterceptedConfig) -> Result<WPair> {
    cfg.validate()?;
    let w = intercepted_product(cfg)?;
    let (n, m, tau) = (cfg.n, cfg.m, cfg.path.horizon());
    // On the normalized path 𝓛′_u = τ·𝓛_{τu}, a step of length 1/n is
    // e^{(τ/n)𝓛_{τθ}}.
    let factors = (1..=n)
        .into_par_iter()
        .map(|i| {
            let theta = theta_step(i, n, m)?;
            expm_superop(&cfg.path.eval_unchecked(tau * theta), tau / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w_prime = SuperOp::identity(cfg.path.dim());
    for e in &factors {
        w_prime = cfg.measurement.compose(e).compose(&w_prime);
    }
    let cells_without_window =
        cfg.cell_windows().iter().enumerate().filter(|(_, &e)| e == 0.0).map(|(j, _)| j + 1).collect();
    Ok(WPair { w, w_prime, cells_without_window })
}

/// Lipschitz constant of the normalized path `u ↦ τ·𝓛_{τu}` on `[0, 1]`.
pub fn normalized_lipschitz(path: &GeneratorPath) -> f64 {
    path.horizon() * path.horizon() * path.lipschitz_bound()
}

/// `‖W − W′‖` (rank-one lower estimate) against `3L/m`, with `L` the
/// Lipschitz constant of the normalized path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TelescopingCheck {
    pub n: usize,
    pub m: usize,
    pub dist_lower: f64,
    pub bound: f64,
}

pub fn telescoping_check(cfg: &InterceptedConfig, seed: u64) -> Result<TelescopingCheck> {
    let pair = w_pair(cfg)?;
    let dist_lower = rank1_lower_bound(&(&pair.w - &pair.w_prime), seed);
    let bound = 3.0 * normalized_lipschitz(&cfg.path) / cfg.m as f64;
    Ok(TelescopingCheck { n: cfg.n, m: cfg.m, dist_lower, bound })
}

fn check_projector(p: &SuperOp, path: &GeneratorPath) -> Result<()> {
    if p.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: p.dim() });
    }
    let defect = p.compose(p).distance(p);
    if defect > 1e-8 {
        return Err(Error::OutOfRange(format!("P is not idempotent (defect {defect:.3e})")));
    }
    Ok(())
}

/// The map `ρ₀ ↦ ρ̃(τ)` where `∂ₜρ̃ = P𝓛ₜP(ρ̃)` and `ρ̃(0) = P(ρ₀)`.
pub fn zeno_limit_timedep(p: &SuperOp, path: &GeneratorPath, tol: f64) -> Result<SuperOp> {
    check_projector(p, path)?;
    check_tol(tol)?;
    let projected = |t: f64| p.compose(&path.eval_unchecked(t)).compose(p);
    Ok(propagate_fn(path.dim(), &projected, 0.0, path.horizon(), tol)?.compose(p))
}

/// `W′(m) = ∏ⱼ e^{(τ/m)·P𝓛_{jτ/m}P}·P`, with `j = 1` applied first.
pub fn wprime_m(p: &SuperOp, path: &GeneratorPath, m: usize) -> Result<SuperOp> {
    check_projector(p, path)?;
    if m == 0 {
        return Err(Error::OutOfRange("m must be at least 1".into()));
    }
    let tau = path.horizon();
    let factors = (1..=m)
        .into_par_iter()
        .map(|j| {
            let l = path.eval_unchecked(tau * j as f64 / m as f64);
            expm_superop(&p.compose(&l).compose(p), tau / m as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = p.clone();
    for e in &factors {
        acc = e.compose(&acc);
    }
    Ok(acc)
}

/// Breakpoints closer than this are merged.
const BREAKPOINT_TOL: f64 = 1e-14;

/// The path `u ↦ 𝓛_{ν(u)}` for a piecewise-linear, nondecreasing `ν`
/// given by its keyframes `(u, ν(u))` with `ν(0) = 0` and `ν(τ′) = τ`.
///
/// The composition is again piecewise linear, with breakpoints at the
/// keyframes of `ν` and at the preimages of the keyframes of `path`. The
/// certified Lipschitz constant is `Lip(ν)·L`.
pub fn reparameterize_path(path: &GeneratorPath, nu: &[(f64, f64)]) -> Result<GeneratorPath> {
    if nu.len() < 2 {
        return Err(Error::NotMonotone("ν needs at least two keyframes".into()));
    }
    if nu.iter().any(|&(u, v)| !u.is_finite() || !v.is_finite()) {
        return Err(Error::NotMonotone("non-finite keyframe".into()));
    }
    if nu[0] != (0.0, 0.0) {
        return Err(Error::NotMonotone(format!("ν starts at {:?} instead of (0, 0)", nu[0])));
    }
    let tau = path.horizon();
    let last = nu[nu.len() - 1].1;
    if (last - tau).abs() > BREAKPOINT_TOL * tau.max(1.0) {
        return Err(Error::NotMonotone(format!("ν ends at {last} instead of the horizon {tau}")));
    }
    let mut lip_nu: f64 = 0.0;
    for (k, w) in nu.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::NotMonotone(format!("keyframe times not increasing at index {}", k + 1)));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::NotMonotone(format!("ν decreases on segment {k}")));
        }
        lip_nu = lip_nu.max((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
    }
    let nu_at = |u: f64| -> f64 {
        let j = nu.partition_point(|&(x, _)| x <= u).saturating_sub(1).min(nu.len() - 2);
        let ((u0, v0), (u1, v1)) = (nu[j], nu[j + 1]);
        (v0 + (v1 - v0) * (u - u0) / (u1 - u0)).clamp(0.0, tau)
    };
    let mut times: Vec<f64> = nu.iter().map(|&(u, _)| u).collect();
    for w in nu.windows(2) {
        let ((u0, v0), (u1, v1)) = (w[0], w[1]);
        if v1 <= v0 {
            continue;
        }
        for kf in path.keyframes() {
            if kf.t > v0 && kf.t < v1 {
                times.push(u0 + (kf.t - v0) * (u1 - u0) / (v1 - v0));
            }
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|b, a| (*b - *a).abs() <= BREAKPOINT_TOL * a.abs().max(1.0));
    let keyframes = times
        .iter()
        .map(|&u| Ok(Keyframe { t: u, generator: path.generator_at(nu_at(u))? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratorPath::new(keyframes)?.with_lipschitz_bound(lip_nu * path.lipschitz_bound()))
}
