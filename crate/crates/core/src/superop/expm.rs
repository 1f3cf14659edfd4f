//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham's selection by 1-norm).

use super::{all_finite, c, CMatrix, SuperOp};
use crate::error::{Error, Result};

/// Largest accepted 1-norm of the exponent.
pub const EXPM_MAX_NORM: f64 = 1e4;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^A` for a square complex matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if !all_finite(a) {
        return Err(Error::NonFinite("exponent".into()));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let norm = one_norm(a);
    if norm > EXPM_MAX_NORM {
        return Err(Error::ExpOverflow(norm));
    }
    let ident = CMatrix::identity(n, n);
    if norm == 0.0 {
        return Ok(ident);
    }
    for (m, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, coeffs, &ident);
            return solve_pade(u, v);
        }
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(s));
    let (u, v) = pade13(&scaled, &ident);
    let mut r = solve_pade(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64], ident: &CMatrix) -> (CMatrix, CMatrix) {
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u = ident.scale(b[1]);
    let mut v = ident.scale(b[0]);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += power.scale(b[2 * k + 1]);
        v += power.scale(b[2 * k]);
    }
    (a * u, v)
}

fn pade13(a: &CMatrix, ident: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]));
    let u = a * (inner_u + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + ident.scale(b[1]));
    let inner_v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]));
    let v = inner_v + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + ident.scale(b[0]);
    (u, v)
}

fn solve_pade(u: CMatrix, v: CMatrix) -> Result<CMatrix> {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::ExpOverflow(f64::INFINITY))
}

/// `e^{tA}` for a superoperator.
pub fn expm_superop(a: &SuperOp, t: f64) -> Result<SuperOp> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time".into()));
    }
    let exponent = a.matrix() * c(t, 0.0);
    Ok(SuperOp::from_parts(a.dim(), expm(&exponent)?))
}
