//! Dense complex operators on a finite-dimensional Hilbert space.
//!
//! Every operator is stored as a dense column-major [`faer::Mat`]. The
//! wrapper types only exist to carry invariants: a [`HermitianOperator`] is
//! exactly Hermitian in storage, a [`DensityMatrix`] is a unit-trace positive
//! operator, and a [`UnitaryOperator`] may keep a structured representation
//! (permutation or single-site factor) so that conjugations stay cheap on
//! large chains.

mod jacobi;
mod random;
mod sectors;
mod spectral;
mod unitary;

use std::sync::Arc;

use faer::{Mat, MatRef};
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::{czero, re, Real};

pub use random::{random_density_matrix, random_hermitian, random_unitary};
pub use sectors::CyclicSectors;
pub use spectral::{
    eigenvalue_floor, matrix_function, matrix_function_floored, spectral_decompose,
    spectral_values, SpectralDecomposition, EIGENVALUE_FLOOR,
};
pub use unitary::UnitaryOperator;
pub(crate) use jacobi::graded_eigen;
pub(crate) use spectral::usable_symmetry;

/// Complex dense matrix storage used throughout the crate.
pub type CMat<T> = Mat<Complex<T>>;

/// Relative asymmetry accepted when certifying Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Accepted `|tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Accepted most negative eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Square, finite, dense complex matrix.
#[derive(Clone, Debug)]
pub struct ComplexMatrix<T: Real> {
    mat: CMat<T>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(mat: CMat<T>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::Empty);
        }
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                let z = mat[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: CMat<T>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Self { mat }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Mat::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Mat::zeros(dim, dim) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.mat[(row, col)]
    }

    #[inline]
    pub fn as_mat(&self) -> MatRef<'_, Complex<T>> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> CMat<T> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: adjoint(self.mat.as_ref()) }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        check_dims(self.dim(), rhs.dim())?;
        Ok(Self { mat: &self.mat * &rhs.mat })
    }

    pub fn max_abs(&self) -> T {
        max_abs(self.mat.as_ref())
    }

    pub fn trace(&self) -> Complex<T> {
        trace(self.mat.as_ref())
    }
}

/// Hermitian operator, stored exactly Hermitian as `(A + A^dag) / 2`.
///
/// An operator may carry a cyclic symmetry hint. When present,
/// [`spectral_decompose`] verifies invariance under the permutation and
/// diagonalizes sector by sector instead of on the full space.
#[derive(Clone, Debug)]
pub struct HermitianOperator<T: Real> {
    matrix: ComplexMatrix<T>,
    symmetry: Option<Arc<CyclicSectors>>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let a = matrix.as_mat();
        let scale = max_abs(a);
        let asym = max_abs_diff_adjoint(a);
        let tol = T::tol(HERMITIAN_TOL) * scale;
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym.to_f64(), tolerance: tol.to_f64() });
        }
        Ok(Self::hermitized(matrix.into_mat()))
    }

    pub fn from_mat(mat: CMat<T>) -> Result<Self> {
        Self::new(ComplexMatrix::new(mat)?)
    }

    /// Symmetrizes without checking; for results that are Hermitian up to round-off
    /// by construction.
    pub(crate) fn hermitized(mut mat: CMat<T>) -> Self {
        hermitize_in_place(&mut mat);
        Self { matrix: ComplexMatrix::from_mat_unchecked(mat), symmetry: None }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim), symmetry: None }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim), symmetry: None }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Result<Self> {
        let n = diag.len();
        Self::from_mat(Mat::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { czero() }))
    }

    /// Attaches a cyclic symmetry the operator is expected to commute with.
    pub fn with_symmetry(mut self, sectors: Arc<CyclicSectors>) -> Self {
        if sectors.dim() == self.dim() {
            self.symmetry = Some(sectors);
        }
        self
    }

    pub(crate) fn set_symmetry(&mut self, sectors: Option<Arc<CyclicSectors>>) {
        self.symmetry = sectors.filter(|s| s.dim() == self.dim());
    }

    pub fn symmetry(&self) -> Option<&Arc<CyclicSectors>> {
        self.symmetry.as_ref()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    #[inline]
    pub fn as_mat(&self) -> MatRef<'_, Complex<T>> {
        self.matrix.as_mat()
    }

    pub fn into_mat(self) -> CMat<T> {
        self.matrix.into_mat()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// `tr(self * other)` for two Hermitian operators (always real).
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        Ok(trace_product(self.as_mat(), other.as_mat()).re)
    }

    pub fn max_abs(&self) -> T {
        self.matrix.max_abs()
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mat = Mat::from_fn(self.dim(), self.dim(), |i, j| self.as_mat()[(i, j)] * factor);
        Self { matrix: ComplexMatrix::from_mat_unchecked(mat), symmetry: self.symmetry.clone() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let (a, b) = (self.as_mat(), other.as_mat());
        let mat = Mat::from_fn(self.dim(), self.dim(), |i, j| a[(i, j)] - b[(i, j)]);
        Ok(Self { matrix: ComplexMatrix::from_mat_unchecked(mat), symmetry: None })
    }

    /// `self - shift * 1`.
    pub fn shifted(&self, shift: T) -> Self {
        let mut out = self.clone();
        let n = out.dim();
        for i in 0..n {
            out.matrix.mat[(i, i)] = out.matrix.mat[(i, i)] - re(shift);
        }
        out
    }
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T: Real> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Certifies trace and positivity (requires a spectral decomposition).
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        let tr = op.trace();
        if Float::abs(tr - T::one()) > T::tol(TRACE_TOL) {
            return Err(Error::InvalidTrace { trace: tr.to_f64() });
        }
        let values = spectral_values(&op)?;
        if let Some(&min) = values.first() {
            if min < -T::tol(POSITIVITY_TOL) {
                return Err(Error::NegativeEigenvalue { eigenvalue: min.to_f64() });
            }
        }
        Ok(Self { op })
    }

    pub fn from_mat(mat: CMat<T>) -> Result<Self> {
        Self::new(HermitianOperator::from_mat(mat)?)
    }

    /// For operators that are positive by construction (unitary conjugations and
    /// their convex mixtures). Only the trace is checked.
    pub(crate) fn from_positive(op: HermitianOperator<T>) -> Result<Self> {
        let tr = op.trace();
        if Float::abs(tr - T::one()) > T::tol(TRACE_TOL) {
            return Err(Error::InvalidTrace { trace: tr.to_f64() });
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim);
        Self { op: HermitianOperator::identity(dim).scaled(w) }
    }

    pub fn from_diagonal(probs: &[T]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(probs)?)
    }

    /// `|psi><psi|` for a normalized copy of `psi`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if norm == T::zero() || psi.is_empty() {
            return Err(Error::Empty);
        }
        let n = psi.len();
        let mat = Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / re(norm * norm));
        Self::from_positive(HermitianOperator::hermitized(mat))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator<T> {
        self.op
    }

    #[inline]
    pub fn as_mat(&self) -> MatRef<'_, Complex<T>> {
        self.op.as_mat()
    }

    pub fn trace(&self) -> T {
        self.op.trace()
    }

    pub fn with_symmetry(self, sectors: Arc<CyclicSectors>) -> Self {
        Self { op: self.op.with_symmetry(sectors) }
    }

    /// Trace distance `||self - other||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        let diff = self.op.sub(&other.op)?;
        let values = spectral_values(&diff)?;
        Ok(values.iter().fold(T::zero(), |acc, v| acc + v.abs()) / T::from_f64(2.0))
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn max_abs<T: Real>(a: MatRef<'_, Complex<T>>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = Float::max(m, a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff<T: Real>(a: MatRef<'_, Complex<T>>, b: MatRef<'_, Complex<T>>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = Float::max(m, (a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// `max |A - A^dag|`.
pub(crate) fn max_abs_diff_adjoint<T: Real>(a: MatRef<'_, Complex<T>>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..=j {
            m = Float::max(m, (a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

/// `max |A - 1|`.
pub(crate) fn max_abs_diff_identity<T: Real>(a: MatRef<'_, Complex<T>>) -> T {
    let mut m = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let target = if i == j { T::one() } else { T::zero() };
            m = Float::max(m, (a[(i, j)] - re(target)).norm());
        }
    }
    m
}

pub(crate) fn hermitize_in_place<T: Real>(mat: &mut CMat<T>) {
    let n = mat.nrows();
    let half = T::from_f64(0.5);
    for j in 0..n {
        for i in 0..j {
            let avg = (mat[(i, j)] + mat[(j, i)].conj()) * half;
            mat[(i, j)] = avg;
            mat[(j, i)] = avg.conj();
        }
        mat[(j, j)] = re(mat[(j, j)].re);
    }
}

pub(crate) fn adjoint<T: Real>(a: MatRef<'_, Complex<T>>) -> CMat<T> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub(crate) fn trace<T: Real>(a: MatRef<'_, Complex<T>>) -> Complex<T> {
    (0..a.nrows()).fold(czero(), |acc, i| acc + a[(i, i)])
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product<T: Real>(a: MatRef<'_, Complex<T>>, b: MatRef<'_, Complex<T>>) -> Complex<T> {
    let mut acc = czero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc = acc + a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `A B - B A`.
pub fn commutator<T: Real>(a: MatRef<'_, Complex<T>>, b: MatRef<'_, Complex<T>>) -> CMat<T> {
    let ab = a * b;
    let ba = b * a;
    &ab - &ba
}

/// Largest singular value.
pub fn operator_norm<T: Real>(a: MatRef<'_, Complex<T>>) -> T {
    // ||A||^2 is the top eigenvalue of the Hermitian matrix A^dag A.
    let gram = HermitianOperator::hermitized(a.adjoint() * a);
    let top = spectral_values(&gram).ok().and_then(|v| v.last().copied()).unwrap_or(T::zero());
    Float::max(top, T::zero()).sqrt()
}

pub(crate) fn scale_columns<T: Real>(v: MatRef<'_, Complex<T>>, weights: &[T]) -> CMat<T> {
    Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * weights[j])
}
