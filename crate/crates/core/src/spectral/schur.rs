//! Spectral projectors from an ordered complex Schur form.
//!
//! With `A = Q·T·Q†` and the selected eigenvalues moved to the leading
//! block, `T = [[T₁₁, T₁₂], [0, T₂₂]]`, the projector in Schur
//! coordinates is `[[𝟙, R], [0, 0]]` where `T₁₁·R − R·T₂₂ = T₁₂`.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::superop::{CMatrix, ONE, ZERO};

/// Minimum distance between a selected and an unselected eigenvalue.
pub const SYLVESTER_SEPARATION: f64 = 1e-8;

pub(crate) fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    let s = Schur::try_new(a.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or(Error::EigenSolver)?;
    let (q, mut t) = s.unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }
    Ok((q, t))
}

pub(crate) fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?;
    Ok((0..a.nrows()).map(|k| t[(k, k)]).collect())
}

/// Swaps the diagonal entries `k` and `k + 1` of the triangular factor by a
/// unitary rotation, updating `q` so that `q·t·q†` is unchanged.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let (a, b, off) = (t[(k, k)], t[(k + 1, k + 1)], t[(k, k + 1)]);
    // Eigenvector of the 2×2 block for eigenvalue b.
    let (v1, v2) = (off, b - a);
    let norm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if norm == 0.0 || a == b {
        return;
    }
    let (v1, v2) = (v1 / norm, v2 / norm);
    // G = [[v1, −conj(v2)], [v2, conj(v1)]]
    let g = [[v1, -v2.conj()], [v2, v1.conj()]];
    let n = t.nrows();
    for j in 0..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = g[0][0].conj() * x + g[1][0].conj() * y;
        t[(k + 1, j)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    for i in 0..n {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = x * g[0][0] + y * g[1][0];
        t[(i, k + 1)] = x * g[0][1] + y * g[1][1];
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = x * g[0][0] + y * g[1][0];
        q[(i, k + 1)] = x * g[0][1] + y * g[1][1];
    }
    t[(k + 1, k)] = ZERO;
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

/// Reorders the Schur form so that diagonal entries satisfying `select`
/// come first. Returns how many were selected.
pub(crate) fn reorder(q: &mut CMatrix, t: &mut CMatrix, select: impl Fn(Complex64) -> bool) -> usize {
    let n = t.nrows();
    let mut head = 0;
    for j in 0..n {
        if select(t[(j, j)]) {
            for k in (head..j).rev() {
                swap_adjacent(q, t, k);
            }
            head += 1;
        }
    }
    head
}

/// Solves `t11·r − r·t22 = c` for upper-triangular `t11`, `t22`.
pub(crate) fn solve_triangular_sylvester(t11: &CMatrix, t22: &CMatrix, c: &CMatrix) -> CMatrix {
    let (p, q) = (t11.nrows(), t22.nrows());
    let mut r = CMatrix::zeros(p, q);
    for j in 0..q {
        let mut rhs: Vec<Complex64> = (0..p).map(|i| c[(i, j)]).collect();
        for l in 0..j {
            for (i, v) in rhs.iter_mut().enumerate() {
                *v += r[(i, l)] * t22[(l, j)];
            }
        }
        let shift = t22[(j, j)];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for m in i + 1..p {
                s -= t11[(i, m)] * r[(m, j)];
            }
            r[(i, j)] = s / (t11[(i, i)] - shift);
        }
    }
    r
}

/// Spectral projector of `a` for the eigenvalues inside the closed disk
/// `|z − center| ≤ radius`.
pub(crate) fn schur_projector(a: &CMatrix, center: Complex64, radius: f64) -> Result<CMatrix> {
    let n = a.nrows();
    let (mut q, mut t) = schur(a)?;
    let k = reorder(&mut q, &mut t, |z| (z - center).norm() <= radius);
    if k == 0 {
        return Ok(CMatrix::zeros(n, n));
    }
    if k == n {
        return Ok(CMatrix::identity(n, n));
    }
    let mut sep = f64::INFINITY;
    for i in 0..k {
        for j in k..n {
            sep = sep.min((t[(i, i)] - t[(j, j)]).norm());
        }
    }
    if sep < SYLVESTER_SEPARATION {
        return Err(Error::IllConditionedSylvester(sep));
    }
    let t11 = t.view((0, 0), (k, k)).into_owned();
    let t22 = t.view((k, k), (n - k, n - k)).into_owned();
    let t12 = t.view((0, k), (k, n - k)).into_owned();
    let r = solve_triangular_sylvester(&t11, &t22, &t12);
    let mut local = CMatrix::zeros(n, n);
    for i in 0..k {
        local[(i, i)] = ONE;
    }
    local.view_mut((0, k), (k, n - k)).copy_from(&r);
    Ok(&q * local * q.adjoint())
}
