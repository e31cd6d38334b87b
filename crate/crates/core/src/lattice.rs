//! Periodic spin chains: tensor-product basis, site embeddings, the cyclic
//! translation and translation-invariant model Hamiltonians.
//!
//! Basis convention: the computational basis index of `|s_0 s_1 .. s_{N-1}>`
//! is `sum_i s_i d^(N-1-i)`, i.e. site 0 is the most significant digit.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use faer::{Mat, MatRef};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::{CMat, ComplexMatrix, CyclicSectors, HermitianOperator, UnitaryOperator};
use crate::scalar::{c, czero, re, Real};

/// Largest Hilbert-space dimension a lattice may have.
pub const MAX_DIM: usize = 1 << 14;

/// Finite periodic chain of `sites` sites with `local_dim` states each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    sites: usize,
    local_dim: usize,
    periodic: bool,
}

impl LatticeSpec {
    pub fn new(sites: usize, local_dim: usize) -> Result<Self> {
        Self::with_max_dim(sites, local_dim, MAX_DIM)
    }

    /// Spin-1/2 chain.
    pub fn qubits(sites: usize) -> Result<Self> {
        Self::new(sites, 2)
    }

    /// Like [`LatticeSpec::new`] with a lower dimension guard; `max_dim` can only
    /// tighten [`MAX_DIM`].
    pub fn with_max_dim(sites: usize, local_dim: usize, max_dim: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidLattice(format!("need at least 2 sites, got {sites}")));
        }
        if local_dim < 1 {
            return Err(Error::InvalidLattice("local dimension must be positive".into()));
        }
        let max = max_dim.min(MAX_DIM);
        let dim = (local_dim as u128).checked_pow(sites as u32).unwrap_or(u128::MAX);
        if dim > max as u128 {
            return Err(Error::LatticeTooLarge { sites, local_dim, dim, max });
        }
        Ok(Self { sites, local_dim, periodic: true })
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    /// Place value of `site` in the basis index.
    #[inline]
    pub fn stride(&self, site: usize) -> usize {
        self.local_dim.pow((self.sites - 1 - site) as u32)
    }

    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.stride(site)) % self.local_dim
    }

    pub fn cyclic_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b) % self.sites;
        d.min(self.sites - d)
    }

    /// Nearest-neighbour bonds `(i, i+1 mod N)`; the two-site ring has a single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        if self.sites == 2 {
            return vec![(0, 1)];
        }
        (0..self.sites).map(|i| (i, (i + 1) % self.sites)).collect()
    }

    /// Basis permutation of the right cyclic shift
    /// `|s_0 s_1 .. s_{N-1}> -> |s_{N-1} s_0 .. s_{N-2}>`.
    pub fn translation_permutation(&self) -> Vec<usize> {
        let top = self.stride(0);
        (0..self.dim()).map(|x| x / self.local_dim + (x % self.local_dim) * top).collect()
    }

    /// Eigenspaces of the translation, for block-diagonalizing invariant operators.
    pub fn translation_sectors(&self) -> Arc<CyclicSectors> {
        Arc::new(
            CyclicSectors::new(&self.translation_permutation(), self.sites)
                .expect("translation has order N"),
        )
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            return Err(Error::SiteOutOfRange { site, sites: self.sites });
        }
        Ok(())
    }
}

/// A local matrix acting on one site.
#[derive(Clone, Debug)]
pub struct SiteOperator<T: Real> {
    pub site: usize,
    pub local: ComplexMatrix<T>,
}

impl<T: Real> SiteOperator<T> {
    pub fn new(site: usize, local: ComplexMatrix<T>) -> Self {
        Self { site, local }
    }
}

/// `1 ⊗ .. ⊗ a ⊗ .. ⊗ 1` with `a` at `op.site`.
pub fn embed_site_operator<T: Real>(lattice: &LatticeSpec, op: &SiteOperator<T>) -> Result<ComplexMatrix<T>> {
    let mut out = Mat::zeros(lattice.dim(), lattice.dim());
    add_local_term(&mut out, lattice, &[op.site], op.local.as_mat(), T::one())?;
    Ok(ComplexMatrix::from_mat_unchecked(out))
}

/// Adds `coeff * embed(local, sites)` to `out`. The first listed site is the most
/// significant digit of the local index.
pub(crate) fn add_local_term<T: Real>(
    out: &mut CMat<T>,
    lattice: &LatticeSpec,
    sites: &[usize],
    local: MatRef<'_, Complex<T>>,
    coeff: T,
) -> Result<()> {
    let d = lattice.local_dim;
    let expected = d.pow(sites.len() as u32);
    if local.nrows() != expected || local.ncols() != expected {
        return Err(Error::LocalDimMismatch { expected, found: local.nrows() });
    }
    for &s in sites {
        lattice.check_site(s)?;
    }
    let strides: Vec<usize> = sites.iter().map(|&s| lattice.stride(s)).collect();
    // basis offset of each local index
    let offsets: Vec<usize> = (0..expected)
        .map(|l| {
            let mut rem = l;
            let mut off = 0;
            for k in (0..sites.len()).rev() {
                off += (rem % d) * strides[k];
                rem /= d;
            }
            off
        })
        .collect();
    let coeff = re(coeff);
    for y in 0..lattice.dim() {
        let mut input = 0;
        let mut base = y;
        for &st in &strides {
            let digit = (y / st) % d;
            input = input * d + digit;
            base -= digit * st;
        }
        for (o, &off) in offsets.iter().enumerate() {
            let v = local[(o, input)];
            if v != czero() {
                out[(base + off, y)] = out[(base + off, y)] + coeff * v;
            }
        }
    }
    Ok(())
}

/// Right cyclic shift of site contents, as a permutation unitary. `T^N = 1`.
pub fn translation_operator<T: Real>(lattice: &LatticeSpec) -> UnitaryOperator<T> {
    UnitaryOperator::from_permutation(lattice.translation_permutation()).expect("valid permutation")
}

/// Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn identity<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::identity(2)
    }

    pub fn x<T: Real>() -> ComplexMatrix<T> {
        let (o, l) = (czero(), c(T::one(), T::zero()));
        ComplexMatrix::from_mat_unchecked(Mat::from_fn(2, 2, |i, j| if i != j { l } else { o }))
    }

    pub fn y<T: Real>() -> ComplexMatrix<T> {
        let i_ = c(T::zero(), T::one());
        ComplexMatrix::from_mat_unchecked(Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -i_,
            (1, 0) => i_,
            _ => czero(),
        }))
    }

    pub fn z<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::from_mat_unchecked(Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(T::one(), T::zero()),
            (1, 1) => c(-T::one(), T::zero()),
            _ => czero(),
        }))
    }

    /// Pauli matrix by label `X`, `Y`, `Z` or `I` (case-insensitive).
    pub fn by_label<T: Real>(label: &str) -> Option<ComplexMatrix<T>> {
        match label.to_ascii_uppercase().as_str() {
            "X" => Some(x()),
            "Y" => Some(y()),
            "Z" => Some(z()),
            "I" => Some(identity()),
            _ => None,
        }
    }
}

/// Translation-invariant spin-1/2 chain Hamiltonians (periodic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    /// `h sum_i Z_i`
    FreeSpins { h: f64 },
    /// `-J sum_i Z_i Z_{i+1} - g sum_i X_i`
    TransverseFieldIsing { j: f64, g: f64 },
    /// `J sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Delta Z_i Z_{i+1})`
    HeisenbergXxz { j: f64, delta: f64 },
}

impl Model {
    pub fn tag(&self) -> &'static str {
        match self {
            Model::FreeSpins { .. } => "free-spins",
            Model::TransverseFieldIsing { .. } => "transverse-field-ising",
            Model::HeisenbergXxz { .. } => "heisenberg-xxz",
        }
    }

    fn couplings(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Model::FreeSpins { h } => vec![("h", h)],
            Model::TransverseFieldIsing { j, g } => vec![("J", j), ("g", g)],
            Model::HeisenbergXxz { j, delta } => vec![("J", j), ("Delta", delta)],
        }
    }
}

/// Model choice with its couplings (energy units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub model: Model,
}

impl HamiltonianSpec {
    pub fn new(model: Model) -> Result<Self> {
        for (name, value) in model.couplings() {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name: name.into(), value });
            }
        }
        Ok(Self { model })
    }

    /// Builds a spec from a model tag and named couplings, rejecting missing or
    /// unknown coupling names.
    pub fn from_named(model: &str, couplings: &BTreeMap<String, f64>) -> Result<Self> {
        let required: &[&str] = match model {
            "free-spins" => &["h"],
            "transverse-field-ising" => &["J", "g"],
            "heisenberg-xxz" => &["J", "Delta"],
            other => return Err(Error::UnknownModel(other.into())),
        };
        if let Some(extra) = couplings.keys().find(|k| !required.contains(&k.as_str())) {
            return Err(Error::UnexpectedCoupling { model: model.into(), coupling: extra.clone() });
        }
        let get = |name: &str| {
            couplings.get(name).copied().ok_or_else(|| Error::MissingCoupling {
                model: model.into(),
                coupling: name.into(),
            })
        };
        let model = match model {
            "free-spins" => Model::FreeSpins { h: get("h")? },
            "transverse-field-ising" => Model::TransverseFieldIsing { j: get("J")?, g: get("g")? },
            _ => Model::HeisenbergXxz { j: get("J")?, delta: get("Delta")? },
        };
        Self::new(model)
    }

    pub fn tag(&self) -> &'static str {
        self.model.tag()
    }
}

impl fmt::Display for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())?;
        for (name, value) in self.model.couplings() {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

fn kron2<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> CMat<T> {
    let (a, b) = (a.as_mat(), b.as_mat());
    Mat::from_fn(4, 4, |i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Dense Hamiltonian of the chain. The result carries the translation symmetry.
pub fn build_hamiltonian<T: Real>(lattice: &LatticeSpec, spec: &HamiltonianSpec) -> Result<HermitianOperator<T>> {
    if lattice.local_dim != 2 {
        return Err(Error::LocalDimMismatch { expected: 2, found: lattice.local_dim });
    }
    let n = lattice.dim();
    let mut h = Mat::<Complex<T>>::zeros(n, n);
    let (x, y, z) = (pauli::x::<T>(), pauli::y::<T>(), pauli::z::<T>());
    let t = T::from_f64;
    match spec.model {
        Model::FreeSpins { h: field } => {
            for i in 0..lattice.sites {
                add_local_term(&mut h, lattice, &[i], z.as_mat(), t(field))?;
            }
        }
        Model::TransverseFieldIsing { j, g } => {
            let zz = kron2(&z, &z);
            for (a, b) in lattice.bonds() {
                add_local_term(&mut h, lattice, &[a, b], zz.as_ref(), t(-j))?;
            }
            for i in 0..lattice.sites {
                add_local_term(&mut h, lattice, &[i], x.as_mat(), t(-g))?;
            }
        }
        Model::HeisenbergXxz { j, delta } => {
            let (xx, yy, zz) = (kron2(&x, &x), kron2(&y, &y), kron2(&z, &z));
            let bond = Mat::from_fn(4, 4, |r, s| xx[(r, s)] + yy[(r, s)] + zz[(r, s)] * t(delta));
            for (a, b) in lattice.bonds() {
                add_local_term(&mut h, lattice, &[a, b], bond.as_ref(), t(j))?;
            }
        }
    }
    Ok(HermitianOperator::from_mat(h)?.with_symmetry(lattice.translation_sectors()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs_diff, random_unitary, spectral_values};

    fn kron(a: MatRef<'_, Complex<f64>>, b: MatRef<'_, Complex<f64>>) -> CMat<f64> {
        a.kron(b)
    }

    #[test]
    fn identity_embeds_to_identity() {
        let l = LatticeSpec::qubits(2).unwrap();
        let e = embed_site_operator(&l, &SiteOperator::new(0, pauli::identity::<f64>())).unwrap();
        assert_eq!(max_abs_diff(e.as_mat(), Mat::identity(4, 4).as_ref()), 0.0);
    }

    #[test]
    fn site_zero_is_most_significant() {
        let l = LatticeSpec::qubits(2).unwrap();
        let e = embed_site_operator(&l, &SiteOperator::new(0, pauli::z::<f64>())).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| e.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        // same thing through an explicit Kronecker product
        let k = kron(pauli::z::<f64>().as_mat(), pauli::identity::<f64>().as_mat());
        assert_eq!(max_abs_diff(e.as_mat(), k.as_ref()), 0.0);
    }

    #[test]
    fn embedding_matches_kronecker_on_three_sites() {
        let l = LatticeSpec::qubits(3).unwrap();
        let a = random_unitary::<f64>(2, 9).to_dense();
        let id = pauli::identity::<f64>();
        for site in 0..3 {
            let factors: Vec<&ComplexMatrix<f64>> =
                (0..3).map(|s| if s == site { &a } else { &id }).collect();
            let k = kron(kron(factors[0].as_mat(), factors[1].as_mat()).as_ref(), factors[2].as_mat());
            let e = embed_site_operator(&l, &SiteOperator::new(site, a.clone())).unwrap();
            assert!(max_abs_diff(e.as_mat(), k.as_ref()) < 1e-15);
        }
    }

    #[test]
    fn disjoint_supports_commute() {
        let l = LatticeSpec::qubits(3).unwrap();
        let x0 = embed_site_operator(&l, &SiteOperator::new(0, pauli::x::<f64>())).unwrap();
        let x2 = embed_site_operator(&l, &SiteOperator::new(2, pauli::x::<f64>())).unwrap();
        let comm = crate::operator::commutator(x0.as_mat(), x2.as_mat());
        assert_eq!(crate::operator::max_abs(comm.as_ref()), 0.0);
    }

    #[test]
    fn embedding_errors() {
        let l = LatticeSpec::qubits(3).unwrap();
        assert!(matches!(
            embed_site_operator(&l, &SiteOperator::new(3, pauli::x::<f64>())),
            Err(Error::SiteOutOfRange { site: 3, sites: 3 })
        ));
        assert!(matches!(
            embed_site_operator(&l, &SiteOperator::new(0, ComplexMatrix::<f64>::identity(3))),
            Err(Error::LocalDimMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn translation_has_order_n() {
        let l = LatticeSpec::qubits(4).unwrap();
        let t = translation_operator::<f64>(&l);
        assert_eq!(t.power(4).as_permutation().unwrap(), (0..16).collect::<Vec<_>>().as_slice());
        assert_ne!(t.power(2).as_permutation().unwrap(), (0..16).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn translation_shifts_right() {
        let l = LatticeSpec::qubits(2).unwrap();
        // |01> has index 1, |10> has index 2
        assert_eq!(l.translation_permutation()[1], 2);
        let l3 = LatticeSpec::qubits(3).unwrap();
        // |001> -> |100>
        assert_eq!(l3.translation_permutation()[0b001], 0b100);
        // |110> -> |011>
        assert_eq!(l3.translation_permutation()[0b110], 0b011);
    }

    #[test]
    fn translation_covariance() {
        let l = LatticeSpec::qubits(3).unwrap();
        let t = translation_operator::<f64>(&l);
        let td = t.to_dense();
        let a = random_unitary::<f64>(2, 4).to_dense();
        for j in 0..3 {
            let ej = embed_site_operator(&l, &SiteOperator::new(j, a.clone())).unwrap();
            let next = embed_site_operator(&l, &SiteOperator::new((j + 1) % 3, a.clone())).unwrap();
            // explicit dense products, independent of the permutation fast path
            let conj = &(td.as_mat() * ej.as_mat()) * td.as_mat().adjoint();
            assert!(max_abs_diff(conj.as_ref(), next.as_mat()) < 1e-12);
            assert!(max_abs_diff(t.conjugate(ej.as_mat()).as_ref(), next.as_mat()) < 1e-12);
        }
    }

    #[test]
    fn free_spins_two_sites() {
        let l = LatticeSpec::qubits(2).unwrap();
        let h = build_hamiltonian::<f64>(&l, &HamiltonianSpec::new(Model::FreeSpins { h: 1.0 }).unwrap())
            .unwrap();
        let expected = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                c([2.0, 0.0, 0.0, -2.0][i], 0.0)
            } else {
                czero()
            }
        });
        assert_eq!(max_abs_diff(h.as_mat(), expected.as_ref()), 0.0);
    }

    #[test]
    fn ising_two_sites_single_bond() {
        let l = LatticeSpec::qubits(2).unwrap();
        let spec = HamiltonianSpec::new(Model::TransverseFieldIsing { j: 1.0, g: 0.0 }).unwrap();
        let h = build_hamiltonian::<f64>(&l, &spec).unwrap();
        let values = spectral_values(&HermitianOperator::from_mat(h.as_mat().to_owned()).unwrap()).unwrap();
        for (v, e) in values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonians_commute_with_translation() {
        let models = [
            Model::FreeSpins { h: 0.7 },
            Model::TransverseFieldIsing { j: 1.0, g: 0.9 },
            Model::HeisenbergXxz { j: 1.0, delta: 0.5 },
        ];
        for n in 2..=12 {
            let l = LatticeSpec::qubits(n).unwrap();
            let t = translation_operator::<f64>(&l);
            for m in models {
                let h = build_hamiltonian::<f64>(&l, &HamiltonianSpec::new(m).unwrap()).unwrap();
                // [H, T] = 0  <=>  T H T^dag = H
                let defect = max_abs_diff(t.conjugate(h.as_mat()).as_ref(), h.as_mat());
                assert!(defect <= 1e-10, "{} N={n}: {defect:e}", m.tag());
            }
        }
    }

    #[test]
    fn xxz_bond_spectrum() {
        // J (XX + YY + Delta ZZ) on two sites: triplet-ish {Delta, Delta, 2 - Delta, -2 - Delta}
        let l = LatticeSpec::qubits(2).unwrap();
        let spec = HamiltonianSpec::new(Model::HeisenbergXxz { j: 1.0, delta: 0.5 }).unwrap();
        let h = build_hamiltonian::<f64>(&l, &spec).unwrap();
        let values = spectral_values(&HermitianOperator::from_mat(h.as_mat().to_owned()).unwrap()).unwrap();
        for (v, e) in values.iter().zip([-2.5, 0.5, 0.5, 1.5]) {
            assert!((v - e).abs() < 1e-14, "{values:?}");
        }
    }

    #[test]
    fn named_couplings() {
        let mut c = BTreeMap::new();
        c.insert("J".to_string(), 1.0);
        assert!(matches!(
            HamiltonianSpec::from_named("transverse-field-ising", &c),
            Err(Error::MissingCoupling { .. })
        ));
        c.insert("g".to_string(), 0.5);
        assert_eq!(
            HamiltonianSpec::from_named("transverse-field-ising", &c).unwrap().model,
            Model::TransverseFieldIsing { j: 1.0, g: 0.5 }
        );
        assert!(matches!(HamiltonianSpec::from_named("hubbard", &c), Err(Error::UnknownModel(_))));
        c.insert("h".to_string(), 0.5);
        assert!(matches!(
            HamiltonianSpec::from_named("transverse-field-ising", &c),
            Err(Error::UnexpectedCoupling { .. })
        ));
    }

    #[test]
    fn lattice_guard() {
        assert!(matches!(LatticeSpec::qubits(15), Err(Error::LatticeTooLarge { sites: 15, .. })));
        assert!(LatticeSpec::qubits(14).is_ok());
        assert!(LatticeSpec::with_max_dim(10, 2, 512).is_err());
        assert!(LatticeSpec::with_max_dim(9, 2, 1 << 20).is_ok());
        assert!(LatticeSpec::qubits(1).is_err());
    }

    #[test]
    fn sector_decomposition_matches_dense() {
        for n in [3, 4, 6] {
            let l = LatticeSpec::qubits(n).unwrap();
            let spec = HamiltonianSpec::new(Model::HeisenbergXxz { j: 1.0, delta: 0.3 }).unwrap();
            let h = build_hamiltonian::<f64>(&l, &spec).unwrap();
            assert!(h.symmetry().is_some());
            let sector_values = spectral_values(&h).unwrap();
            let plain = HermitianOperator::from_mat(h.as_mat().to_owned()).unwrap();
            let dense_values = spectral_values(&plain).unwrap();
            for (a, b) in sector_values.iter().zip(&dense_values) {
                assert!((a - b).abs() < 1e-12);
            }
            let d = crate::operator::spectral_decompose(&h).unwrap();
            let v = d.eigenvectors();
            let gram = v.adjoint() * v;
            assert!(max_abs_diff(gram.as_ref(), Mat::identity(l.dim(), l.dim()).as_ref()) < 1e-12);
            assert!(max_abs_diff(d.reconstruct().as_mat(), h.as_mat()) < 1e-12);
            assert_eq!(l.translation_sectors().sector_dims().iter().sum::<usize>(), l.dim());
        }
    }
}
