use std::sync::Arc;

use faer::{Mat, MatRef};
use num_complex::Complex;

use super::{adjoint, check_dims, max_abs_diff_identity, CMat, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::{czero, Real};

/// Accepted `max |U^dag U - 1|`.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
enum Repr<T: Real> {
    Dense(CMat<T>),
    /// `U |x> = |perm[x]>`
    Permutation(Arc<[usize]>),
    /// `factor` acting on one tensor factor of a `local_dim^sites` space; site 0 is
    /// the most significant digit of the basis index.
    Local { sites: usize, local_dim: usize, site: usize, factor: CMat<T> },
}

/// Unitary operator, stored densely or in one of two structured forms.
#[derive(Clone, Debug)]
pub struct UnitaryOperator<T: Real> {
    repr: Repr<T>,
    dim: usize,
}

impl<T: Real> UnitaryOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let m = matrix.as_mat();
        let deviation = max_abs_diff_identity((m.adjoint() * m).as_ref());
        if deviation > T::tol(UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation: deviation.to_f64() });
        }
        let dim = matrix.dim();
        Ok(Self { repr: Repr::Dense(matrix.into_mat()), dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self { repr: Repr::Permutation((0..dim).collect()), dim }
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let dim = perm.len();
        if dim == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; dim];
        for &p in &perm {
            if p >= dim || seen[p] {
                return Err(Error::NotUnitary { deviation: 1.0 });
            }
            seen[p] = true;
        }
        Ok(Self { repr: Repr::Permutation(perm.into()), dim })
    }

    /// `1 ⊗ .. ⊗ factor ⊗ .. ⊗ 1` with `factor` at `site`.
    pub fn embedded(sites: usize, local_dim: usize, site: usize, factor: ComplexMatrix<T>) -> Result<Self> {
        if site >= sites {
            return Err(Error::SiteOutOfRange { site, sites });
        }
        check_local_dim(local_dim, factor.dim())?;
        let f = factor.as_mat();
        let deviation = max_abs_diff_identity((f.adjoint() * f).as_ref());
        if deviation > T::tol(UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation: deviation.to_f64() });
        }
        let dim = local_dim.pow(sites as u32);
        Ok(Self { repr: Repr::Local { sites, local_dim, site, factor: factor.into_mat() }, dim })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_permutation(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Permutation(p) => Some(p),
            _ => None,
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mat = match &self.repr {
            Repr::Dense(m) => m.clone(),
            _ => self.apply_left(Mat::<Complex<T>>::identity(self.dim, self.dim).as_ref()),
        };
        ComplexMatrix::from_mat_unchecked(mat)
    }

    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(adjoint(m.as_ref())),
            Repr::Permutation(p) => {
                let mut inv = vec![0; p.len()];
                for (x, &px) in p.iter().enumerate() {
                    inv[px] = x;
                }
                Repr::Permutation(inv.into())
            }
            Repr::Local { sites, local_dim, site, factor } => Repr::Local {
                sites: *sites,
                local_dim: *local_dim,
                site: *site,
                factor: adjoint(factor.as_ref()),
            },
        };
        Self { repr, dim: self.dim }
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Permutation(p), Repr::Permutation(q)) => {
                Repr::Permutation(q.iter().map(|&x| p[x]).collect())
            }
            (
                Repr::Local { sites, local_dim, site, factor: f },
                Repr::Local { site: s2, factor: g, .. },
            ) if site == s2 => Repr::Local {
                sites: *sites,
                local_dim: *local_dim,
                site: *site,
                factor: f * g,
            },
            _ => Repr::Dense(self.apply_left(other.to_dense().as_mat())),
        };
        Ok(Self { repr, dim: self.dim })
    }

    pub fn power(&self, n: usize) -> Self {
        let mut acc = Self::identity(self.dim);
        for _ in 0..n {
            acc = self.compose(&acc).expect("same dimension");
        }
        acc
    }

    /// `U A`.
    pub fn apply_left(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        match &self.repr {
            Repr::Dense(u) => u * a,
            Repr::Permutation(p) => {
                let mut out = Mat::zeros(a.nrows(), a.ncols());
                for j in 0..a.ncols() {
                    for (x, &px) in p.iter().enumerate() {
                        out[(px, j)] = a[(x, j)];
                    }
                }
                out
            }
            Repr::Local { sites, local_dim, site, factor } => {
                let stride = local_dim.pow((sites - 1 - site) as u32);
                let mut out = Mat::zeros(a.nrows(), a.ncols());
                for_each_base(self.dim, *local_dim, stride, |base| {
                    for j in 0..a.ncols() {
                        for o in 0..*local_dim {
                            let mut acc = czero::<T>();
                            for i in 0..*local_dim {
                                acc = acc + factor[(o, i)] * a[(base + i * stride, j)];
                            }
                            out[(base + o * stride, j)] = acc;
                        }
                    }
                });
                out
            }
        }
    }

    /// `A U^dag`.
    pub fn apply_right_adjoint(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        match &self.repr {
            Repr::Dense(u) => a * u.adjoint(),
            Repr::Permutation(p) => {
                let mut out = Mat::zeros(a.nrows(), a.ncols());
                for (y, &py) in p.iter().enumerate() {
                    for i in 0..a.nrows() {
                        out[(i, py)] = a[(i, y)];
                    }
                }
                out
            }
            Repr::Local { sites, local_dim, site, factor } => {
                let stride = local_dim.pow((sites - 1 - site) as u32);
                let mut out = Mat::zeros(a.nrows(), a.ncols());
                for_each_base(self.dim, *local_dim, stride, |base| {
                    for o in 0..*local_dim {
                        for i in 0..*local_dim {
                            let w = factor[(o, i)].conj();
                            let (src, dst) = (base + i * stride, base + o * stride);
                            for r in 0..a.nrows() {
                                out[(r, dst)] = out[(r, dst)] + a[(r, src)] * w;
                            }
                        }
                    }
                });
                out
            }
        }
    }

    /// `A U`.
    pub fn apply_right(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        self.adjoint().apply_right_adjoint(a)
    }

    /// `U A U^dag`.
    pub fn conjugate(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        match &self.repr {
            Repr::Permutation(p) => {
                let mut out = Mat::zeros(a.nrows(), a.ncols());
                for (y, &py) in p.iter().enumerate() {
                    for (x, &px) in p.iter().enumerate() {
                        out[(px, py)] = a[(x, y)];
                    }
                }
                out
            }
            _ => self.apply_right_adjoint(self.apply_left(a).as_ref()),
        }
    }

    /// `max |U^dag U - 1|`, evaluated on the dense form.
    pub fn unitarity_defect(&self) -> T {
        let u = self.to_dense();
        let m = u.as_mat();
        max_abs_diff_identity((m.adjoint() * m).as_ref())
    }
}

fn check_local_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LocalDimMismatch { expected, found });
    }
    Ok(())
}

/// Visits every basis index whose digit at `stride` is zero.
fn for_each_base(dim: usize, local_dim: usize, stride: usize, mut f: impl FnMut(usize)) {
    let block = stride * local_dim;
    for hi in (0..dim).step_by(block) {
        for lo in 0..stride {
            f(hi + lo);
        }
    }
}
