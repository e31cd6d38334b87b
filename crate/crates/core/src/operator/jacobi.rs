//! Cyclic Jacobi eigensolver for Hermitian positive semidefinite matrices.
//!
//! An off-diagonal entry is rotated away unless it is negligible relative to
//! the geometric mean of its two diagonal entries. With that test the small
//! eigenvalues of a strongly graded matrix `D A D` come out with relative
//! accuracy governed by the conditioning of `A` alone.

use faer::{Mat, MatRef};
use num_complex::Complex;
use num_traits::Float;

use super::CMat;
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues (unsorted) and eigenvectors as columns.
pub(crate) fn graded_eigen<T: Real>(a: MatRef<'_, Complex<T>>) -> Result<(Vec<T>, CMat<T>)> {
    let n = a.nrows();
    let mut m: Vec<Complex<T>> = (0..n * n).map(|k| a[(k % n, k / n)]).collect();
    let mut v: Vec<Complex<T>> = (0..n * n).map(|k| if k % n == k / n { c(T::one(), T::zero()) } else { c(T::zero(), T::zero()) }).collect();
    let eps = <T as Float>::epsilon();
    let at = |i: usize, j: usize| j * n + i;
    for k in 0..n {
        m[at(k, k)] = c(m[at(k, k)].re, T::zero());
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = m[at(p, q)];
                let r = b.norm();
                let (app, aqq) = (m[at(p, p)].re, m[at(q, q)].re);
                if r == T::zero() || r <= eps * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = b / r;
                let two = T::one() + T::one();
                let tau = (aqq - app) / (two * r);
                let t = if tau == T::zero() {
                    T::one()
                } else {
                    tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                // G = [[cs, sn], [-sn conj(phase), cs conj(phase)]]
                let g10 = phase.conj() * (-sn);
                let g11 = phase.conj() * cs;
                for k in 0..n {
                    let (x, y) = (m[at(k, p)], m[at(k, q)]);
                    m[at(k, p)] = x * cs + y * g10;
                    m[at(k, q)] = x * sn + y * g11;
                }
                for k in 0..n {
                    let (x, y) = (m[at(p, k)], m[at(q, k)]);
                    m[at(p, k)] = x * cs + y * g10.conj();
                    m[at(q, k)] = x * sn + y * g11.conj();
                }
                m[at(p, p)] = c(app - t * r, T::zero());
                m[at(q, q)] = c(aqq + t * r, T::zero());
                m[at(p, q)] = c(T::zero(), T::zero());
                m[at(q, p)] = c(T::zero(), T::zero());
                for k in 0..n {
                    let (x, y) = (v[at(k, p)], v[at(k, q)]);
                    v[at(k, p)] = x * cs + y * g10;
                    v[at(k, q)] = x * sn + y * g11;
                }
            }
        }
        if !rotated {
            let values = (0..n).map(|k| m[at(k, k)].re).collect();
            return Ok((values, Mat::from_fn(n, n, |i, j| v[at(i, j)])));
        }
    }
    Err(Error::EigenSolver { dim: n, condition: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs_diff, random_density_matrix};

    #[test]
    fn reconstructs_a_random_state() {
        let rho = random_density_matrix::<f64>(12, 3);
        let (values, v) = graded_eigen(rho.as_mat()).unwrap();
        let d = Mat::from_fn(12, 12, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) });
        let back = &v * &d * v.adjoint();
        assert!(max_abs_diff(back.as_ref(), rho.as_mat()) < 1e-14);
        let gram = v.adjoint() * &v;
        let eye = Mat::<Complex<f64>>::identity(12, 12);
        assert!(max_abs_diff(gram.as_ref(), eye.as_ref()) < 1e-14);
    }

    #[test]
    fn small_eigenvalues_of_a_graded_matrix_keep_their_digits() {
        // D A D with A = [[1, 0.5], [0.5, 1]] and D = diag(1, 1e8)
        let a = Mat::from_fn(2, 2, |i, j| {
            let d = [1.0, 1e8];
            c(if i == j { 1.0 } else { 0.5 } * d[i] * d[j], 0.0)
        });
        let (mut values, _) = graded_eigen(a.as_ref()).unwrap();
        values.sort_by(f64::total_cmp);
        // det = 0.75e16, largest ~ 1e16
        let small = 0.75e16 / values[1];
        assert!((values[0] - small).abs() < 1e-15 * small);
        assert!((values[0] - 0.75).abs() < 1e-12);
    }
}
