//! Seeded random operators for property tests and fuzzing.
//!
//! Generators are constructive: complex Gaussian matrices followed by
//! `G G^dag / tr` (states) or QR orthonormalization with the phases of `R`
//! divided out (Haar unitaries). Outputs are bit-identical for a fixed seed.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CMat, ComplexMatrix, DensityMatrix, HermitianOperator, UnitaryOperator};
use crate::scalar::{c, re, Real};

fn gaussian_matrix<T: Real>(dim: usize, seed: u64) -> CMat<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = Mat::zeros(dim, dim);
    // fill in row-major order so the stream layout does not depend on storage
    for i in 0..dim {
        for j in 0..dim {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            g[(i, j)] = c(T::from_f64(a * scale), T::from_f64(b * scale));
        }
    }
    g
}

/// `G G^dag / tr(G G^dag)`; full rank with probability one.
pub fn random_density_matrix<T: Real>(dim: usize, seed: u64) -> DensityMatrix<T> {
    assert!(dim >= 1, "dimension must be positive");
    let g = gaussian_matrix::<T>(dim, seed);
    let gg = &g * g.adjoint();
    let tr = (0..dim).fold(T::zero(), |acc, i| acc + gg[(i, i)].re);
    let rho = Mat::from_fn(dim, dim, |i, j| gg[(i, j)] / re(tr));
    DensityMatrix::from_positive(HermitianOperator::hermitized(rho)).expect("unit trace by construction")
}

/// Haar-distributed unitary.
pub fn random_unitary<T: Real>(dim: usize, seed: u64) -> UnitaryOperator<T> {
    assert!(dim >= 1, "dimension must be positive");
    let g = gaussian_matrix::<T>(dim, seed);
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > T::zero() { d / re(n) } else { c(T::one(), T::zero()) };
        for i in 0..dim {
            u[(i, j)] = u[(i, j)] * phase;
        }
    }
    UnitaryOperator::new(ComplexMatrix::from_mat_unchecked(u)).expect("QR factor is unitary")
}

/// `(G + G^dag) / 2` with complex Gaussian `G`.
pub fn random_hermitian<T: Real>(dim: usize, seed: u64) -> HermitianOperator<T> {
    HermitianOperator::hermitized(gaussian_matrix(dim, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{spectral_values, max_abs_diff};

    #[test]
    fn one_dimensional_state_is_one() {
        for seed in [0, 1, 99] {
            let rho = random_density_matrix::<f64>(1, seed);
            assert_eq!(rho.as_mat()[(0, 0)], c(1.0, 0.0));
        }
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = random_density_matrix::<f64>(4, 42);
        let b = random_density_matrix::<f64>(4, 42);
        assert_eq!(max_abs_diff(a.as_mat(), b.as_mat()), 0.0);
        let u = random_unitary::<f64>(4, 42).to_dense();
        let v = random_unitary::<f64>(4, 42).to_dense();
        assert_eq!(max_abs_diff(u.as_mat(), v.as_mat()), 0.0);
        let c = random_density_matrix::<f64>(4, 43);
        assert!(max_abs_diff(a.as_mat(), c.as_mat()) > 0.0);
    }

    #[test]
    fn random_states_are_full_rank() {
        for seed in 0..100 {
            let rho = random_density_matrix::<f64>(8, seed);
            let min = spectral_values(rho.as_operator()).unwrap()[0];
            assert!(min > 0.0, "seed {seed}: min eigenvalue {min:e}");
        }
    }

    #[test]
    fn one_dimensional_unitary_is_a_phase() {
        let u = random_unitary::<f64>(1, 3).to_dense();
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = random_unitary::<f64>(4, 17);
        assert!(u.unitarity_defect() <= 1e-12);
    }

    #[test]
    fn determinant_has_unit_modulus() {
        for seed in 0..100 {
            let u = random_unitary::<f64>(8, seed).to_dense().into_mat();
            // modulus of det via LU-free route: |det U|^2 = det(U^dag U) = prod of eigenvalues
            let gram = HermitianOperator::hermitized(u.adjoint() * &u);
            let logdet: f64 = spectral_values(&gram).unwrap().iter().map(|v| v.ln()).sum();
            assert!(((0.5 * logdet).exp() - 1.0).abs() < 1e-10, "seed {seed}");
        }
    }
}
