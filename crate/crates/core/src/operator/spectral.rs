use std::sync::Arc;

use faer::{Mat, MatRef, Side};
use num_complex::Complex;
use num_traits::Float;

use super::{max_abs, scale_columns, CMat, ComplexMatrix, CyclicSectors, HermitianOperator};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues below `EIGENVALUE_FLOOR * max eigenvalue` are treated as exact zeros
/// by singular matrix functions.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Invariance defect (relative to `max |A|`) tolerated before a symmetry hint is used.
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    eigenvalues: Vec<T>,
    eigenvectors: CMat<T>,
    symmetry: Option<Arc<CyclicSectors>>,
    blocks: Option<Arc<SectorVectors<T>>>,
}

/// Eigenvectors of the sector blocks, kept so that functions of a symmetric
/// operator can be assembled block by block.
#[derive(Clone, Debug)]
pub(crate) struct SectorVectors<T: Real> {
    /// per sector, block eigenvectors as columns
    pub(crate) vectors: Vec<CMat<T>>,
    /// per sector, position of each block eigenvector in the full spectrum
    pub(crate) columns: Vec<Vec<usize>>,
}

/// `rank[i]`: sorted position of entry `i`.
fn sort_ranks<T: Real>(values: &[T]) -> Option<(Vec<usize>, Vec<usize>)> {
    if values.windows(2).all(|w| w[0] <= w[1]) {
        return None;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut rank = vec![0; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }
    Some((order, rank))
}

impl<T: Real> SpectralDecomposition<T> {
    /// Sorts the pairs by eigenvalue.
    pub(crate) fn from_parts(eigenvalues: Vec<T>, eigenvectors: CMat<T>) -> Self {
        Self::from_parts_ranked(eigenvalues, eigenvectors).0
    }

    fn from_parts_ranked(eigenvalues: Vec<T>, eigenvectors: CMat<T>) -> (Self, Option<Vec<usize>>) {
        match sort_ranks(&eigenvalues) {
            None => (Self { eigenvalues, eigenvectors, symmetry: None, blocks: None }, None),
            Some((order, rank)) => {
                let values = order.iter().map(|&k| eigenvalues[k]).collect();
                let vectors = Mat::from_fn(eigenvectors.nrows(), order.len(), |i, j| eigenvectors[(i, order[j])]);
                (Self { eigenvalues: values, eigenvectors: vectors, symmetry: None, blocks: None }, Some(rank))
            }
        }
    }

    /// Decomposition assembled from sector blocks; `columns` index into `eigenvalues`.
    pub(crate) fn from_sectors(
        eigenvalues: Vec<T>,
        eigenvectors: CMat<T>,
        sectors: Arc<CyclicSectors>,
        mut blocks: SectorVectors<T>,
    ) -> Self {
        let (mut d, rank) = Self::from_parts_ranked(eigenvalues, eigenvectors);
        if let Some(rank) = rank {
            blocks.columns.iter_mut().flatten().for_each(|c| *c = rank[*c]);
        }
        d.symmetry = Some(sectors);
        d.blocks = Some(Arc::new(blocks));
        d
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, Complex<T>> {
        self.eigenvectors.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn spectral_radius(&self) -> T {
        Float::max(self.min_eigenvalue().abs(), self.max_eigenvalue().abs())
    }

    pub fn symmetry(&self) -> Option<&Arc<CyclicSectors>> {
        self.symmetry.as_ref()
    }

    /// Translation sector of each eigenvector, when diagonalized by sectors.
    pub fn sector_labels(&self) -> Option<Vec<usize>> {
        let blocks = self.blocks.as_ref()?;
        let mut labels = vec![0; self.dim()];
        for (k, cols) in blocks.columns.iter().enumerate() {
            cols.iter().for_each(|&c| labels[c] = k);
        }
        Some(labels)
    }

    /// Relative floor below which eigenvalues count as exact zeros.
    pub fn floor(&self) -> T {
        eigenvalue_floor(&self.eigenvalues)
    }

    /// Eigenvalues with everything below [`Self::floor`] replaced by zero.
    pub fn clamped_eigenvalues(&self) -> Vec<T> {
        let floor = self.floor();
        self.eigenvalues.iter().map(|&v| if v < floor { T::zero() } else { v }).collect()
    }

    /// `V diag(values) V^dag`.
    pub fn reconstruct_with(&self, values: &[T]) -> HermitianOperator<T> {
        if let (Some(sym), Some(blocks)) = (&self.symmetry, &self.blocks) {
            let parts: Vec<CMat<T>> = blocks
                .vectors
                .iter()
                .zip(&blocks.columns)
                .map(|(w, cols)| {
                    let vals: Vec<T> = cols.iter().map(|&c| values[c]).collect();
                    scale_columns(w.as_ref(), &vals) * w.adjoint()
                })
                .collect();
            let op = HermitianOperator::hermitized(sym.assemble(&parts));
            return op.with_symmetry(sym.clone());
        }
        let v = self.eigenvectors.as_ref();
        let scaled = scale_columns(v, values);
        let mut op = HermitianOperator::hermitized(&scaled * v.adjoint());
        op.set_symmetry(self.symmetry.clone());
        op
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.reconstruct_with(&self.eigenvalues)
    }

    /// Spectral decomposition of `f(A)`: same eigenvectors, mapped eigenvalues.
    pub fn mapped(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let values = apply_checked(self.eigenvalues.iter().copied(), self.eigenvalues(), f)?;
        let (mut d, rank) = Self::from_parts_ranked(values, self.eigenvectors.clone());
        d.symmetry = self.symmetry.clone();
        d.blocks = match (&self.blocks, rank) {
            (Some(b), None) => Some(b.clone()),
            (Some(b), Some(rank)) => {
                let mut b = SectorVectors::clone(b);
                b.columns.iter_mut().flatten().for_each(|c| *c = rank[*c]);
                Some(Arc::new(b))
            }
            (None, _) => None,
        };
        Ok(d)
    }

    /// `exp(-i t A)`.
    pub fn evolution(&self, t: T) -> ComplexMatrix<T> {
        let v = self.eigenvectors.as_ref();
        let phases: Vec<Complex<T>> = self
            .eigenvalues
            .iter()
            .map(|&e| {
                let a = -e * t;
                Complex::new(a.cos(), a.sin())
            })
            .collect();
        let scaled = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * phases[j]);
        ComplexMatrix::from_mat_unchecked(&scaled * v.adjoint())
    }

    /// Heisenberg picture `exp(i t A) B exp(-i t A)`.
    pub fn heisenberg(&self, b: MatRef<'_, Complex<T>>, t: T) -> ComplexMatrix<T> {
        let u = self.evolution(t);
        let ub = b * u.as_mat();
        ComplexMatrix::from_mat_unchecked(u.as_mat().adjoint() * ub)
    }

    /// Diagonal of `V^dag A V`: the weight `<v_i|A|v_i>` of each eigenvector.
    pub fn diagonal_weights(&self, a: MatRef<'_, Complex<T>>) -> Vec<T> {
        if let (Some(sym), Some(blocks)) = (&self.symmetry, &self.blocks) {
            if symmetric_under(sym, a) {
                let mut out = vec![T::zero(); self.dim()];
                for (k, (w, cols)) in blocks.vectors.iter().zip(&blocks.columns).enumerate() {
                    if cols.is_empty() {
                        continue;
                    }
                    let bw = sym.block(a, k) * w;
                    for (e, &c) in cols.iter().enumerate() {
                        out[c] = (0..w.nrows()).fold(T::zero(), |acc, i| acc + (w[(i, e)].conj() * bw[(i, e)]).re);
                    }
                }
                return out;
            }
        }
        let v = self.eigenvectors.as_ref();
        let av = a * v;
        (0..self.dim())
            .map(|j| (0..v.nrows()).fold(T::zero(), |acc, i| acc + (v[(i, j)].conj() * av[(i, j)]).re))
            .collect()
    }
}

/// Relative eigenvalue floor for a spectrum.
pub fn eigenvalue_floor<T: Real>(values: &[T]) -> T {
    let top = values.iter().copied().fold(T::zero(), Float::max);
    T::from_f64(EIGENVALUE_FLOOR) * top
}

/// Full spectral decomposition. Operators carrying a verified cyclic symmetry are
/// diagonalized sector by sector.
pub fn spectral_decompose<T: Real>(a: &HermitianOperator<T>) -> Result<SpectralDecomposition<T>> {
    if let Some(sectors) = usable_symmetry(a) {
        return sectors.decompose(a.as_mat());
    }
    let mat = a.as_mat();
    let evd = mat.self_adjoint_eigen(Side::Lower).map_err(|_| eigen_error(mat))?;
    let n = a.dim();
    let s = evd.S();
    let values: Vec<T> = (0..n).map(|i| s[i].re).collect();
    let vectors = evd.U().to_owned();
    Ok(SpectralDecomposition::from_parts(values, vectors))
}

/// Eigenvalues only, ascending.
pub fn spectral_values<T: Real>(a: &HermitianOperator<T>) -> Result<Vec<T>> {
    if let Some(sectors) = usable_symmetry(a) {
        return sectors.eigenvalues(a.as_mat());
    }
    let mat = a.as_mat();
    let mut values = mat.self_adjoint_eigenvalues(Side::Lower).map_err(|_| eigen_error(mat))?;
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(values)
}

pub(crate) fn usable_symmetry<T: Real>(a: &HermitianOperator<T>) -> Option<&Arc<CyclicSectors>> {
    let sectors = a.symmetry()?;
    symmetric_under(sectors, a.as_mat()).then_some(sectors)
}

fn symmetric_under<T: Real>(sectors: &CyclicSectors, a: MatRef<'_, Complex<T>>) -> bool {
    let scale = Float::max(max_abs(a), T::min_positive_value());
    a.nrows() == sectors.dim() && sectors.invariance_defect(a) <= T::tol(SYMMETRY_TOL) * scale
}

fn eigen_error<T: Real>(a: MatRef<'_, Complex<T>>) -> Error {
    let n = a.nrows();
    let big = max_abs(a);
    let small = (0..n).map(|i| a[(i, i)].norm()).fold(T::infinity(), Float::min);
    Error::EigenSolver { dim: n, condition: (big / small).to_f64() }
}

/// `V f(Λ) V^dag`. Fails if `f` is not finite on some eigenvalue.
pub fn matrix_function<T: Real>(
    d: &SpectralDecomposition<T>,
    f: impl Fn(T) -> T,
) -> Result<HermitianOperator<T>> {
    let values = apply_checked(d.eigenvalues.iter().copied(), d.eigenvalues(), f)?;
    Ok(d.reconstruct_with(&values))
}

/// Like [`matrix_function`] but eigenvalues below the relative floor are first
/// replaced by exact zeros, so `f(0)` decides the kernel's fate.
pub fn matrix_function_floored<T: Real>(
    d: &SpectralDecomposition<T>,
    f: impl Fn(T) -> T,
) -> Result<HermitianOperator<T>> {
    let clamped = d.clamped_eigenvalues();
    let values = apply_checked(clamped.iter().copied(), d.eigenvalues(), f)?;
    Ok(d.reconstruct_with(&values))
}

fn apply_checked<T: Real>(
    inputs: impl Iterator<Item = T>,
    originals: &[T],
    f: impl Fn(T) -> T,
) -> Result<Vec<T>> {
    inputs
        .zip(originals)
        .map(|(x, &orig)| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::Domain { eigenvalue: orig.to_f64() })
            }
        })
        .collect()
}
