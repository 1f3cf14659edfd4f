//! Seeded random instances: channels, GKLS generators and gapped
//! measurement channels with a nontrivial fixed-point space.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lindblad::LindbladGenerator;
use crate::spectral::{spectrum_report, DEFAULT_GAP_MIN};
use crate::superop::{c, kraus_to_superop, CMatrix, KrausSet, MatrixOperator, SuperOp};

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng)).unscale(std::f64::consts::SQRT_2)
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> MatrixOperator {
    let g = gaussian_matrix(rng, d, d);
    let h = (&g + g.adjoint()).scale(0.5 * scale);
    MatrixOperator::new(h).expect("finite Gaussian entries")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, d, d).qr();
    let (q, r) = qr.unpack();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        (0..d).map(|k| {
            let z = r[(k, k)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                c(1.0, 0.0)
            }
        }),
    ));
    q * phases
}

/// Random channel with `kraus_count` Kraus operators, `Kᵢ = Gᵢ·(G†G)^{-1/2}`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, kraus_count: usize) -> KrausSet {
    let k = kraus_count.max(1);
    let g = gaussian_matrix(rng, k * d, d);
    let s = g.adjoint() * &g;
    let eig = s.symmetric_eigen();
    let inv_sqrt = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| c(1.0 / l.sqrt(), 0.0)),
    ));
    let s_inv_sqrt = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let g = g * s_inv_sqrt;
    let ops = (0..k).map(|i| g.rows(i * d, d).into_owned()).collect();
    KrausSet::channel(ops).expect("normalized Kraus family")
}

/// Random GKLS generator with a Hamiltonian and two jump operators.
pub fn random_gkls<R: Rng + ?Sized>(rng: &mut R, d: usize) -> LindbladGenerator {
    let h = random_hermitian(rng, d, 1.0);
    let jumps = (0..2).map(|_| MatrixOperator::new(gaussian_matrix(rng, d, d).scale(0.4)).unwrap()).collect();
    LindbladGenerator::new(h, jumps).expect("random GKLS data is valid")
}

/// Random channel `M` satisfying the gap condition with `δ ≤ max_delta`.
///
/// The Hilbert space is split into contiguous blocks; `M` first pinches onto
/// the block diagonal and then applies an independent random channel inside
/// each block, all conjugated by a random unitary. The fixed-point space
/// then has one stationary state per block.
pub fn random_gapped_channel<R: Rng + ?Sized>(rng: &mut R, d: usize, max_delta: f64) -> (KrausSet, SuperOp) {
    for _ in 0..10_000 {
        let mut sizes = Vec::new();
        let mut left = d;
        while left > 0 {
            let s = rng.random_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        let u = random_unitary(rng, d);
        let mut ops = Vec::new();
        let mut offset = 0;
        for &s in &sizes {
            let count = rng.random_range(2..=3);
            let block = random_channel(rng, s, count);
            for k in block.ops() {
                let mut embedded = CMatrix::zeros(d, d);
                embedded.view_mut((offset, offset), (s, s)).copy_from(k);
                ops.push(&u * embedded * u.adjoint());
            }
            offset += s;
        }
        let kraus = KrausSet::channel(ops).expect("block channel is trace preserving");
        let m = kraus_to_superop(&kraus);
        let Ok(report) = spectrum_report(&m, DEFAULT_GAP_MIN) else { continue };
        if report.gap_ok && report.delta <= max_delta && report.peripheral_multiplicity == sizes.len() {
            return (kraus, m);
        }
    }
    panic!("no gapped channel found for d = {d}, max_delta = {max_delta}");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::classify_map;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 3);
        assert!((u.adjoint() * &u - CMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 1..=3 {
            let m = kraus_to_superop(&random_channel(&mut rng, d, 3));
            assert!(classify_map(&m, 1e-10).is_channel());
        }
    }

    #[test]
    fn gapped_channel_is_gapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3] {
            let (_, m) = random_gapped_channel(&mut rng, d, 0.5);
            let r = spectrum_report(&m, 0.05).unwrap();
            assert!(r.gap_ok && r.delta <= 0.5);
        }
    }

    #[test]
    fn seeded_determinism() {
        let a = random_gapped_channel(&mut ChaCha8Rng::seed_from_u64(42), 3, 0.5).1;
        let b = random_gapped_channel(&mut ChaCha8Rng::seed_from_u64(42), 3, 0.5).1;
        assert_eq!(a, b);
    }
}
