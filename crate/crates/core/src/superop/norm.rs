//! Two-sided estimates of the induced trace norm
//! `‖T‖ = sup ‖T(X)‖₁ / ‖X‖₁`.
//!
//! The lower bound evaluates `T` on rank-one inputs `|x⟩⟨y|`, which are the
//! extreme points of the trace-norm unit ball, and improves them by
//! alternating ascent. The upper bound is `√d·σ_max(T)`, from
//! `‖X‖₂ ≤ ‖X‖₁ ≤ √d·‖X‖₂`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{c, spectral_norm, CMatrix, CVector, SuperOp};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: &'static str,
    pub upper_method: &'static str,
}

const LOWER_METHOD: &str = "rank1-alternating-ascent";
const UPPER_METHOD: &str = "sqrt(d)*sigma_max";

const DEFAULT_RESTARTS: usize = 6;
const DEFAULT_ITERS: usize = 25;

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    let v = CVector::from_fn(d, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let n = v.norm();
    v.unscale(n)
}

fn basis(d: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[k] = c(1.0, 0.0);
    v
}

/// `T(|x⟩⟨y|)` as a `d×d` matrix.
fn apply_rank1(t: &SuperOp, x: &CVector, y: &CVector) -> CMatrix {
    let d = t.dim();
    let v = t.matrix() * y.conjugate().kronecker(x);
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Trace norm of `y` together with the unitary polar factor `U`, so that
/// `‖Y‖₁ = Re tr(U†Y)`.
fn polar(y: &CMatrix) -> (f64, CMatrix) {
    let svd = y.clone().svd(true, true);
    let norm = svd.singular_values.sum();
    let u = svd.u.unwrap() * svd.v_t.unwrap();
    (norm, u)
}

fn ascend(t: &SuperOp, dual: &CMatrix, mut x: CVector, mut y: CVector, iters: usize) -> f64 {
    let d = t.dim();
    let (mut best, mut u) = polar(&apply_rank1(t, &x, &y));
    for _ in 0..iters {
        let z = CMatrix::from_column_slice(d, d, (dual * CVector::from_column_slice(u.as_slice())).as_slice());
        let zx = &z * &y;
        let nz = zx.norm();
        if nz <= f64::MIN_POSITIVE {
            break;
        }
        x = zx.unscale(nz);
        let (_, u_mid) = polar(&apply_rank1(t, &x, &y));
        let z = CMatrix::from_column_slice(d, d, (dual * CVector::from_column_slice(u_mid.as_slice())).as_slice());
        let zy = z.adjoint() * &x;
        let nz = zy.norm();
        if nz <= f64::MIN_POSITIVE {
            break;
        }
        y = zy.unscale(nz);
        let (val, u_new) = polar(&apply_rank1(t, &x, &y));
        u = u_new;
        let gain = val - best;
        best = best.max(val);
        if gain.abs() <= 1e-15 * best.max(1.0) {
            break;
        }
    }
    best
}

/// Estimates `‖T‖` in the trace norm from both sides.
///
/// Starts from every diagonal basis projector `|k⟩⟨k|` and from `restarts`
/// random pairs drawn from `seed`. The result is deterministic in `seed`.
pub fn norm_1to1_estimate(t: &SuperOp, restarts: usize, iters: usize, seed: u64) -> NormEstimate {
    let d = t.dim();
    let upper = (d as f64).sqrt() * spectral_norm(t.matrix());
    let dual = t.matrix().adjoint();
    let mut lower: f64 = 0.0;
    for k in 0..d {
        let e = basis(d, k);
        lower = lower.max(ascend(t, &dual, e.clone(), e, iters.max(1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts.max(1) {
        let x = random_unit(&mut rng, d);
        let y = random_unit(&mut rng, d);
        lower = lower.max(ascend(t, &dual, x, y, iters.max(1)));
    }
    NormEstimate { lower, upper, lower_method: LOWER_METHOD, upper_method: UPPER_METHOD }
}

/// Rank-one lower bound with the default restart and iteration budget.
pub fn rank1_lower_bound(t: &SuperOp, seed: u64) -> f64 {
    norm_1to1_estimate(t, DEFAULT_RESTARTS, DEFAULT_ITERS, seed).lower
}
