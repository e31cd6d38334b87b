use std::f64::consts::TAU;
use std::sync::Arc;

use faer::{Mat, MatRef, Side};
use num_complex::Complex;
use num_traits::Float;

use super::spectral::{SectorVectors, SpectralDecomposition};
use super::CMat;
use crate::error::{Error, Result};
use crate::scalar::{c, czero, Real};

/// Eigenspaces of a cyclic basis permutation `P` with `P^order = 1`.
///
/// Basis states split into orbits `r, P r, P^2 r, ...` of period `p | order`.
/// Sector `k` (eigenvalue `exp(2 pi i k / order)` of `P`) is spanned by
/// `|r, k> = p^{-1/2} sum_j w^{-j} P^j |r>` for every orbit with `k p = 0 mod order`.
/// Operators commuting with `P` are block diagonal in this basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicSectors {
    perm: Vec<usize>,
    order: usize,
    /// orbit index of each basis state
    orbit_of: Vec<usize>,
    /// position of each basis state within its orbit
    position: Vec<usize>,
    /// members of each orbit, starting at the representative
    orbits: Vec<Vec<usize>>,
    /// orbits admitted in each sector
    sectors: Vec<Vec<usize>>,
}

impl CyclicSectors {
    /// `perm[x]` is the image of basis state `x`.
    pub fn new(perm: &[usize], order: usize) -> Result<Self> {
        let dim = perm.len();
        if dim == 0 || order == 0 {
            return Err(Error::Empty);
        }
        let mut orbit_of = vec![usize::MAX; dim];
        let mut position = vec![0; dim];
        let mut orbits = Vec::new();
        for start in 0..dim {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = Vec::new();
            let mut x = start;
            loop {
                if orbit_of[x] != usize::MAX {
                    if x == start {
                        break;
                    }
                    return Err(Error::InvalidLattice("translation is not a permutation".into()));
                }
                orbit_of[x] = id;
                position[x] = members.len();
                members.push(x);
                x = perm[x];
                if x >= dim {
                    return Err(Error::InvalidLattice("translation is not a permutation".into()));
                }
            }
            if !order.is_multiple_of(members.len()) {
                return Err(Error::NotOfOrder { order, deviation: 1.0 });
            }
            orbits.push(members);
        }
        let sectors = (0..order)
            .map(|k| (0..orbits.len()).filter(|&a| (k * orbits[a].len()) % order == 0).collect())
            .collect();
        Ok(Self { perm: perm.to_vec(), order, orbit_of, position, orbits, sectors })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(Vec::len).collect()
    }

    /// `max |A[P x, P y] - A[x, y]|`, zero iff `P A P^dag = A`.
    pub fn invariance_defect<T: Real>(&self, a: MatRef<'_, Complex<T>>) -> T {
        let mut m = T::zero();
        for y in 0..self.dim() {
            let py = self.perm[y];
            for x in 0..self.dim() {
                m = Float::max(m, (a[(self.perm[x], py)] - a[(x, y)]).norm());
            }
        }
        m
    }

    fn phase<T: Real>(&self, k: usize, m: usize) -> Complex<T> {
        // w^{-m} with w = exp(2 pi i k / order)
        let angle = -TAU * ((k * m) % self.order) as f64 / self.order as f64;
        c(T::from_f64(angle.cos()), T::from_f64(angle.sin()))
    }

    /// Block of an invariant operator in sector `k`:
    /// `B[a, b] = sqrt(p_a / p_b) sum_m w^{-m} A[r_a, P^m r_b]`.
    pub fn block<T: Real>(&self, a: MatRef<'_, Complex<T>>, k: usize) -> CMat<T> {
        let members = &self.sectors[k];
        let n = members.len();
        let phases: Vec<Complex<T>> = (0..self.order).map(|m| self.phase(k, m)).collect();
        Mat::from_fn(n, n, |i, j| {
            let (oa, ob) = (&self.orbits[members[i]], &self.orbits[members[j]]);
            let ra = oa[0];
            let mut acc = czero::<T>();
            for (m, &y) in ob.iter().enumerate() {
                acc = acc + a[(ra, y)] * phases[m];
            }
            acc * T::from_f64((oa.len() as f64 / ob.len() as f64).sqrt())
        })
    }

    /// Expands a sector-`k` coefficient vector into the full basis.
    fn expand_into<T: Real>(&self, k: usize, coeffs: impl Fn(usize) -> Complex<T>, out: &mut [Complex<T>]) {
        for (i, &orbit) in self.sectors[k].iter().enumerate() {
            let members = &self.orbits[orbit];
            let norm = T::from_f64(1.0 / (members.len() as f64).sqrt());
            let ci = coeffs(i) * norm;
            for (j, &x) in members.iter().enumerate() {
                out[x] = ci * self.phase(k, j);
            }
        }
    }

    /// Spectral decomposition of an invariant Hermitian operator, assembled from
    /// the sector blocks. The caller is responsible for invariance.
    pub fn decompose<T: Real>(self: &Arc<Self>, a: MatRef<'_, Complex<T>>) -> Result<SpectralDecomposition<T>> {
        let dim = self.dim();
        let mut values = Vec::with_capacity(dim);
        let mut vectors = Mat::<Complex<T>>::zeros(dim, dim);
        let mut blocks = SectorVectors { vectors: Vec::with_capacity(self.order), columns: Vec::with_capacity(self.order) };
        let mut col = 0;
        let mut scratch = vec![czero::<T>(); dim];
        for k in 0..self.order {
            if self.sectors[k].is_empty() {
                blocks.vectors.push(Mat::zeros(0, 0));
                blocks.columns.push(Vec::new());
                continue;
            }
            let block = self.block(a, k);
            let evd = block
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::EigenSolver { dim: block.nrows(), condition: f64::NAN })?;
            let (s, u) = (evd.S(), evd.U());
            let mut cols = Vec::with_capacity(block.nrows());
            for e in 0..block.nrows() {
                values.push(s[e].re);
                scratch.iter_mut().for_each(|z| *z = czero());
                self.expand_into(k, |i| u[(i, e)], &mut scratch);
                for (x, z) in scratch.iter().enumerate() {
                    vectors[(x, col)] = *z;
                }
                cols.push(col);
                col += 1;
            }
            blocks.vectors.push(u.to_owned());
            blocks.columns.push(cols);
        }
        debug_assert_eq!(col, dim);
        Ok(SpectralDecomposition::from_sectors(values, vectors, self.clone(), blocks))
    }

    /// Full-basis operator with the given sector blocks (inverse of [`Self::block`]).
    pub fn assemble<T: Real>(&self, blocks: &[CMat<T>]) -> CMat<T> {
        let dim = self.dim();
        let mut out = Mat::<Complex<T>>::zeros(dim, dim);
        let mut index = vec![usize::MAX; self.orbits.len()];
        for (k, b) in blocks.iter().enumerate() {
            let members = &self.sectors[k];
            if members.is_empty() {
                continue;
            }
            index.iter_mut().for_each(|i| *i = usize::MAX);
            for (i, &o) in members.iter().enumerate() {
                index[o] = i;
            }
            let phases: Vec<Complex<T>> = (0..self.order).map(|m| self.phase(k, m)).collect();
            // (block index, basis-vector amplitude) of every basis state in this sector
            let factor: Vec<(usize, Complex<T>)> = (0..dim)
                .map(|x| {
                    let o = self.orbit_of[x];
                    let norm = T::from_f64(1.0 / (self.orbits[o].len() as f64).sqrt());
                    (index[o], phases[self.position[x]] * norm)
                })
                .collect();
            for (y, &(jb, fy)) in factor.iter().enumerate() {
                if jb == usize::MAX {
                    continue;
                }
                let fy = fy.conj();
                let column = out.col_mut(y).try_as_col_major_mut().expect("contiguous column").as_slice_mut();
                for (x, &(ia, fx)) in factor.iter().enumerate() {
                    if ia != usize::MAX {
                        column[x] = column[x] + b[(ia, jb)] * fx * fy;
                    }
                }
            }
        }
        out
    }

    /// `a b a` for invariant `a` and `b`, multiplied block by block.
    pub fn sandwich<T: Real>(&self, a: MatRef<'_, Complex<T>>, b: MatRef<'_, Complex<T>>) -> CMat<T> {
        let parts: Vec<CMat<T>> = (0..self.order)
            .map(|k| {
                if self.sectors[k].is_empty() {
                    return Mat::zeros(0, 0);
                }
                let ba = self.block(a, k);
                let bb = self.block(b, k);
                &ba * (&bb * &ba)
            })
            .collect();
        self.assemble(&parts)
    }

    /// Eigenvalues of an invariant Hermitian operator, ascending.
    pub fn eigenvalues<T: Real>(&self, a: MatRef<'_, Complex<T>>) -> Result<Vec<T>> {
        let mut values = Vec::with_capacity(self.dim());
        for k in 0..self.order {
            if self.sectors[k].is_empty() {
                continue;
            }
            let block = self.block(a, k);
            let v = block
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|_| Error::EigenSolver { dim: block.nrows(), condition: f64::NAN })?;
            values.extend(v);
        }
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(values)
    }

    /// Orbit index and position of a basis state.
    pub fn locate(&self, x: usize) -> (usize, usize) {
        (self.orbit_of[x], self.position[x])
    }
}
