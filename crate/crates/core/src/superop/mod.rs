//! Dense superoperator algebra on a `d`-dimensional Hilbert space.
//!
//! Operators on the Hilbert space are `d×d` complex matrices. Linear maps
//! on those operators (channels, generators, projectors) are stored as
//! `d²×d²` matrices acting on vectorized operators.
//!
//! The vectorization is column stacking, fixed for the whole crate:
//! `vec(A·X·B) = (Bᵀ ⊗ A)·vec(X)`. Entry `(i, j)` of `X` lands at index
//! `j·d + i` of `vec(X)`.

mod expm;
mod norm;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use expm::{expm, expm_superop, EXPM_MAX_NORM};
pub use norm::{norm_1to1_estimate, rank1_lower_bound, NormEstimate};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Human-readable statement of the vectorization convention.
pub const VEC_CONVENTION: &str = "column-stacking: vec(A X B) = (B^T kron A) vec(X)";

/// Tolerance for Hermiticity of operators (max entry deviation).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for positivity and trace of density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Tolerance for the Kraus completeness relation.
pub const KRAUS_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Shorthand for `Complex64::new`.
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest singular value of a matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if !all_finite(m) {
        return f64::INFINITY;
    }
    m.clone().singular_values().max()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if !all_finite(m) {
        return f64::INFINITY;
    }
    m.clone().singular_values().sum()
}

/// Max absolute entry of `m - m†`.
pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A square complex matrix on the Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOperator {
    mat: CMatrix,
}

impl MatrixOperator {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !all_finite(&mat) {
            return Err(Error::NonFinite("operator".into()));
        }
        Ok(Self { mat })
    }

    /// Builds a `d×d` operator from row-major entries.
    pub fn from_rows(d: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
        }
        Self::new(CMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: CMatrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { mat: CMatrix::zeros(d, d) }
    }

    /// `|i⟩⟨j|`
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut mat = CMatrix::zeros(d, d);
        mat[(i, j)] = ONE;
        Self { mat }
    }

    /// `|x⟩⟨y|`
    pub fn outer(x: &CVector, y: &CVector) -> Self {
        Self { mat: x * y.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.mat)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.mat)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(MatrixOperator);

impl DensityMatrix {
    pub fn new(op: MatrixOperator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { field: "density matrix".into(), deviation: dev });
        }
        let min_ev = hermitian_eigenvalues(op.matrix())[0];
        if min_ev < -STATE_TOL {
            return Err(Error::invariant("density matrix", format!("negative eigenvalue {min_ev:.3e}")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::invariant("density matrix", format!("trace {tr} differs from 1")));
        }
        Ok(Self(op))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invariant("state vector", "zero or non-finite norm"));
        }
        let v = psi.unscale(n);
        Ok(Self(MatrixOperator::outer(&v, &v)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(MatrixOperator { mat: CMatrix::identity(d, d).unscale(d as f64) })
    }

    pub fn op(&self) -> &MatrixOperator {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Column-stacks `x` into a vector of length `d²`.
pub fn vectorize(x: &MatrixOperator) -> CVector {
    CVector::from_column_slice(x.mat.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &CVector, d: usize) -> Result<MatrixOperator> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: v.len() });
    }
    Ok(MatrixOperator { mat: CMatrix::from_column_slice(d, d, v.as_slice()) })
}

/// A linear map on `d×d` matrices, stored as a `d²×d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperOp {
    dim: usize,
    mat: CMatrix,
}

impl SuperOp {
    pub fn new(dim: usize, mat: CMatrix) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let side = dim * dim;
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::DimensionMismatch { expected: side, found: mat.nrows().max(mat.ncols()) });
        }
        if !all_finite(&mat) {
            return Err(Error::NonFinite("superoperator".into()));
        }
        Ok(Self { dim, mat })
    }

    /// Wraps a `d²×d²` matrix, inferring `d`.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let side = mat.nrows();
        let dim = (side as f64).sqrt().round() as usize;
        if dim * dim != side {
            return Err(Error::InvalidDimension(side));
        }
        Self::new(dim, mat)
    }

    pub(crate) fn from_parts(dim: usize, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), dim * dim);
        Self { dim, mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, mat: CMatrix::identity(dim * dim, dim * dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, mat: CMatrix::zeros(dim * dim, dim * dim) }
    }

    /// The map `X ↦ A·X·B`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Self {
        Self { dim: a.nrows(), mat: kron(&b.transpose(), a) }
    }

    /// The map `X ↦ A·X`.
    pub fn left(a: &CMatrix) -> Self {
        let d = a.nrows();
        Self::sandwich(a, &CMatrix::identity(d, d))
    }

    /// The map `X ↦ X·B`.
    pub fn right(b: &CMatrix) -> Self {
        let d = b.nrows();
        Self::sandwich(&CMatrix::identity(d, d), b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, other.dim, "superoperator dimensions differ");
        SuperOp { dim: self.dim, mat: &self.mat * &other.mat }
    }

    pub fn scale(&self, s: f64) -> SuperOp {
        SuperOp { dim: self.dim, mat: self.mat.scale(s) }
    }

    /// `selfⁿ` by binary powering.
    pub fn pow(&self, mut n: usize) -> SuperOp {
        let mut acc = SuperOp::identity(self.dim);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    /// The adjoint map with respect to the Hilbert-Schmidt inner product
    /// (Heisenberg picture).
    pub fn dual(&self) -> SuperOp {
        SuperOp { dim: self.dim, mat: self.mat.adjoint() }
    }

    /// Largest singular value of the matrix representation. This is the
    /// cheap "proxy" norm used for convergence measurements.
    pub fn proxy_norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }

    /// Proxy-norm distance `‖self − other‖`.
    pub fn distance(&self, other: &SuperOp) -> f64 {
        spectral_norm(&(&self.mat - &other.mat))
    }

    /// Row vector `vec(𝟙)†·T − vec(𝟙)†`; vanishes iff `T` preserves trace.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let mut s = ZERO;
            for i in 0..d {
                s += self.mat[(i * d + i, col)];
            }
            let target = if col % (d + 1) == 0 { ONE } else { ZERO };
            worst = worst.max((s - target).norm());
        }
        worst
    }

    /// Max entry of `vec(𝟙)†·T`; vanishes iff `T` annihilates the trace.
    pub fn trace_image_norm(&self) -> f64 {
        let d = self.dim;
        (0..d * d).map(|col| (0..d).map(|i| self.mat[(i * d + i, col)]).sum::<Complex64>().norm()).fold(0.0, f64::max)
    }
}

impl Mul for &SuperOp {
    type Output = SuperOp;
    fn mul(self, rhs: &SuperOp) -> SuperOp {
        self.compose(rhs)
    }
}

impl Add for &SuperOp {
    type Output = SuperOp;
    fn add(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, rhs.dim, "superoperator dimensions differ");
        SuperOp { dim: self.dim, mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &SuperOp {
    type Output = SuperOp;
    fn sub(self, rhs: &SuperOp) -> SuperOp {
        assert_eq!(self.dim, rhs.dim, "superoperator dimensions differ");
        SuperOp { dim: self.dim, mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &SuperOp {
    type Output = SuperOp;
    fn neg(self) -> SuperOp {
        SuperOp { dim: self.dim, mat: -&self.mat }
    }
}

/// Applies `t` to `x`: `devec(T·vec(X))`.
pub fn apply(t: &SuperOp, x: &MatrixOperator) -> Result<MatrixOperator> {
    if x.dim() != t.dim {
        return Err(Error::DimensionMismatch { expected: t.dim, found: x.dim() });
    }
    devectorize(&(&t.mat * vectorize(x)), t.dim)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrausKind {
    /// `Σ K†K = 𝟙`
    Channel,
    /// `Σ K†K ≤ 𝟙`
    Operation,
}

/// Kraus representation of a quantum channel or operation.
#[derive(Clone, Debug)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<CMatrix>,
    kind: KrausKind,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>, kind: KrausKind) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidKraus("empty Kraus set".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        for k in &ops {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k.nrows().max(k.ncols()) });
            }
            if !all_finite(k) {
                return Err(Error::NonFinite("kraus".into()));
            }
        }
        let set = Self { dim, ops, kind };
        let completeness = set.completeness();
        match kind {
            KrausKind::Channel => {
                let dev = (&completeness - CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if dev > KRAUS_TOL {
                    return Err(Error::InvalidKraus(format!("sum of K^dag K deviates from identity by {dev:.3e}")));
                }
            }
            KrausKind::Operation => {
                let top = *hermitian_eigenvalues(&completeness).last().unwrap();
                if top > 1.0 + KRAUS_TOL {
                    return Err(Error::InvalidKraus(format!("sum of K^dag K has eigenvalue {top:.6} > 1")));
                }
            }
        }
        Ok(set)
    }

    pub fn channel(ops: Vec<CMatrix>) -> Result<Self> {
        Self::new(ops, KrausKind::Channel)
    }

    /// `Σ Kᵢ†Kᵢ`
    pub fn completeness(&self) -> CMatrix {
        self.ops.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn kind(&self) -> KrausKind {
        self.kind
    }
}

/// `Σᵢ conj(Kᵢ) ⊗ Kᵢ`, the superoperator of `ρ ↦ Σ Kᵢ ρ Kᵢ†`.
pub fn kraus_to_superop(k: &KrausSet) -> SuperOp {
    let d = k.dim;
    let mat = k.ops.iter().fold(CMatrix::zeros(d * d, d * d), |acc, op| acc + kron(&op.conjugate(), op));
    SuperOp { dim: d, mat }
}

/// Choi matrix `J(T) = Σᵢⱼ T(|i⟩⟨j|) ⊗ |i⟩⟨j|`, i.e. `(T ⊗ id)(|Ω⟩⟨Ω|)` with
/// the unnormalized `|Ω⟩ = Σᵢ |ii⟩`.
pub fn choi_matrix(t: &SuperOp) -> CMatrix {
    let d = t.dim;
    // J[a·d + i, b·d + j] = T(E_ij)[a, b] = T[b·d + a, j·d + i]
    CMatrix::from_fn(d * d, d * d, |r, s| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (s / d, s % d);
        t.mat[(b * d + a, j * d + i)]
    })
}

/// Structural properties of a linear map, each decided at a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MapClass {
    pub cp: bool,
    pub trace_preserving: bool,
    pub trace_nonincreasing: bool,
    pub hermiticity_preserving: bool,
}

impl MapClass {
    pub fn is_channel(&self) -> bool {
        self.cp && self.trace_preserving
    }

    pub fn is_operation(&self) -> bool {
        self.cp && self.trace_nonincreasing
    }
}

pub fn classify_map(t: &SuperOp, tol: f64) -> MapClass {
    let choi = choi_matrix(t);
    let hermiticity_preserving = hermitian_deviation(&choi) <= tol;
    let cp = hermiticity_preserving && hermitian_eigenvalues(&choi)[0] >= -tol;
    let trace_preserving = t.trace_defect() <= tol;
    // Dual image of the identity: T*(𝟙) ≤ 𝟙 iff tr T(ρ) ≤ tr ρ for all ρ ≥ 0.
    let id = vectorize(&MatrixOperator::identity(t.dim));
    let dual_id = CMatrix::from_column_slice(t.dim, t.dim, (t.mat.adjoint() * id).as_slice());
    let trace_nonincreasing =
        hermitian_deviation(&dual_id) <= tol && *hermitian_eigenvalues(&dual_id).last().unwrap() <= 1.0 + tol;
    MapClass { cp, trace_preserving, trace_nonincreasing, hermiticity_preserving }
}
