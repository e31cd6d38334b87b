//! Kicked thermal states analysed in the eigenbasis of the Hamiltonian.
//!
//! All three averaging maps act entrywise in a translation-adapted eigenbasis:
//! spatial averages through the momentum of each eigenvector, temporal ones
//! through energy differences. Conjugation by `exp(+-beta H / 2)` becomes a
//! diagonal rescaling, so rounding errors stay on high-energy entries, which
//! the thermal weights suppress.

use std::f64::consts::TAU;
use std::sync::Arc;

use faer::{Mat, MatRef, Side};
use num_complex::Complex;
use num_traits::Float;

use crate::averaging::{degenerate_levels, spatial_weights, AveragingKind, TAU_MIN};
use crate::entropy::{eta, spectrum_entropy};
use crate::error::{Error, Result};
use crate::operator::{check_dims, graded_eigen, CMat, SpectralDecomposition, UnitaryOperator};
use crate::scalar::{c, czero, Real};
use crate::thermo::ThermalState;

/// Largest exponent accepted in `exp(beta (E_i - E_j) / 2)` and `Z exp(beta (E_i + E_j) / 2)`.
pub const MAX_EXPONENT: f64 = 700.0;

/// Diagonal spread above which positive blocks go to the Jacobi solver.
pub const GRADED_RATIO: f64 = 1e4;
/// Largest block handed to the Jacobi solver.
pub const GRADED_MAX_DIM: usize = 512;

/// A thermal state seen from its own eigenbasis.
#[derive(Clone, Debug)]
pub struct EnergyFrame<T: Real> {
    decomp: Arc<SpectralDecomposition<T>>,
    beta: T,
    log_partition: T,
    populations: Vec<T>,
    /// translation sector of each eigenvector
    momenta: Option<Vec<usize>>,
    sectors: usize,
}

impl<T: Real> EnergyFrame<T> {
    pub fn new(state: &ThermalState<T>) -> Self {
        let decomp = state.shared_decomp();
        let momenta = decomp.sector_labels();
        let sectors = decomp.symmetry().map_or(0, |s| s.order());
        Self {
            decomp,
            beta: state.beta(),
            log_partition: state.log_partition(),
            populations: state.populations().to_vec(),
            momenta,
            sectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    pub fn energies(&self) -> &[T] {
        self.decomp.eigenvalues()
    }

    pub fn populations(&self) -> &[T] {
        &self.populations
    }

    pub fn momenta(&self) -> Option<&[usize]> {
        self.momenta.as_deref()
    }

    /// `V^dag a V`.
    pub fn to_energy_basis(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        let v = self.decomp.eigenvectors();
        v.adjoint() * (a * v)
    }

    /// `V a V^dag`.
    pub fn from_energy_basis(&self, a: MatRef<'_, Complex<T>>) -> CMat<T> {
        let v = self.decomp.eigenvectors();
        v * (a * v.adjoint())
    }

    /// Entrywise factors of an averaging map over `n` translations.
    pub fn map_weights(&self, kind: AveragingKind<T>, n: usize) -> Result<CMat<T>> {
        kind.validate()?;
        let dim = self.dim();
        match kind {
            AveragingKind::Uniform | AveragingKind::Weighted { .. } => {
                let k = match &self.momenta {
                    Some(k) if self.sectors == n => k,
                    _ => return Err(Error::MissingSymmetry { order: n }),
                };
                let profile: Vec<T> = match kind {
                    AveragingKind::Weighted { r } => {
                        let w = spatial_weights(n, r);
                        (0..n)
                            .map(|dk| {
                                (0..n).fold(T::zero(), |acc, m| {
                                    let angle = TAU * ((dk * m) % n) as f64 / n as f64;
                                    acc + w[m] * T::from_f64(angle.cos())
                                })
                            })
                            .collect()
                    }
                    _ => (0..n).map(|dk| if dk == 0 { T::one() } else { T::zero() }).collect(),
                };
                Ok(Mat::from_fn(dim, dim, |i, j| c(profile[(k[i] + n - k[j]) % n], T::zero())))
            }
            AveragingKind::Temporal { tau } => {
                let (levels, clusters) = degenerate_levels(self.energies());
                Ok(Mat::from_fn(dim, dim, |i, j| match tau {
                    None if clusters[i] == clusters[j] => c(T::one(), T::zero()),
                    None => czero(),
                    Some(t) if t.to_f64() < TAU_MIN => c(T::one(), T::zero()),
                    Some(t) => {
                        let x = (levels[i] - levels[j]) * t;
                        let den = T::one() + x * x;
                        c(T::one() / den, -x / den)
                    }
                }))
            }
        }
    }

    /// Kicks the state with `u` and prepares everything the averages need.
    pub fn kick(&self, u: &UnitaryOperator<T>) -> Result<EnergyKick<T>> {
        check_dims(self.dim(), u.dim())?;
        let e = self.energies();
        let spread = (e[self.dim() - 1] - e[0]).to_f64();
        let exponent = self.beta.to_f64() * spread;
        if exponent / 2.0 > MAX_EXPONENT || exponent + self.log_partition.to_f64().abs() > MAX_EXPONENT {
            return Err(Error::Overflow { exponent });
        }
        let v = self.decomp.eigenvectors();
        let kick = v.adjoint() * u.apply_left(v);
        let p = &self.populations;
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, j| kick[(i, j)] * p[j]);
        let rho_prime = hermitized(&scaled * kick.adjoint());
        drop(scaled);
        let half = T::from_f64(0.5) * self.beta;
        let u_beta = Mat::from_fn(self.dim(), self.dim(), |i, j| kick[(i, j)] * ((e[i] - e[j]) * half).exp());
        let e_beta = hermitized(&u_beta * u_beta.adjoint());
        let values = eigenvalues(rho_prime.as_ref(), None)?;
        let s_rho_prime = spectrum_entropy(&values);
        let energy_prime = (0..self.dim()).fold(T::zero(), |acc, i| acc + e[i] * rho_prime[(i, i)].re);
        let energy = (0..self.dim()).fold(T::zero(), |acc, i| acc + e[i] * p[i]);
        Ok(EnergyKick {
            frame: self.clone(),
            kick,
            rho_prime,
            u_beta,
            e_beta,
            s_rho_prime,
            work: energy_prime - energy,
            relative_entropy: -s_rho_prime + self.beta * energy_prime + self.log_partition,
        })
    }

    fn groups(&self, kind: AveragingKind<T>) -> Option<Vec<Vec<usize>>> {
        match (kind, &self.momenta) {
            (AveragingKind::Uniform, Some(k)) => {
                let mut g = vec![Vec::new(); self.sectors];
                k.iter().enumerate().for_each(|(i, &m)| g[m].push(i));
                g.retain(|x| !x.is_empty());
                Some(g)
            }
            _ => None,
        }
    }
}

/// A kicked thermal state in the energy basis.
#[derive(Clone, Debug)]
pub struct EnergyKick<T: Real> {
    frame: EnergyFrame<T>,
    /// `V^dag U V`
    kick: CMat<T>,
    rho_prime: CMat<T>,
    /// `exp(beta H / 2) U exp(-beta H / 2)`
    u_beta: CMat<T>,
    /// `u_beta u_beta^dag`
    e_beta: CMat<T>,
    s_rho_prime: T,
    work: T,
    relative_entropy: T,
}

/// Quantities of one average of a kicked thermal state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedKick<T> {
    /// `S(M rho')`
    pub entropy: T,
    /// `S(M rho' | rho)`
    pub relative_entropy: T,
    /// `S_BS(M rho' | rho)`
    pub bs_relative_entropy: T,
    /// `tr[rho eta(M E)]`
    pub eta_term: T,
    /// `||M E - 1||_op`
    pub deviation_op: T,
    /// `||M E - 1||_F`
    pub deviation_frobenius: T,
    /// `tr(rho M E)`
    pub normalization: T,
}

impl<T: Real> EnergyKick<T> {
    pub fn frame(&self) -> &EnergyFrame<T> {
        &self.frame
    }

    /// `V^dag U V`.
    pub fn kick_matrix(&self) -> MatRef<'_, Complex<T>> {
        self.kick.as_ref()
    }

    /// `rho'` in the energy basis.
    pub fn rho_prime(&self) -> MatRef<'_, Complex<T>> {
        self.rho_prime.as_ref()
    }

    /// `u_beta` in the energy basis.
    pub fn u_beta(&self) -> MatRef<'_, Complex<T>> {
        self.u_beta.as_ref()
    }

    /// `E_beta` in the energy basis.
    pub fn e_beta(&self) -> MatRef<'_, Complex<T>> {
        self.e_beta.as_ref()
    }

    /// `S(rho')`
    pub fn entropy(&self) -> T {
        self.s_rho_prime
    }

    /// `W = tr(H rho') - tr(H rho)`
    pub fn work(&self) -> T {
        self.work
    }

    /// `S(rho' | rho)`
    pub fn relative_entropy(&self) -> T {
        self.relative_entropy
    }

    pub fn average(&self, kind: AveragingKind<T>, n: usize) -> Result<AveragedKick<T>> {
        let f = &self.frame;
        let w = f.map_weights(kind, n)?;
        let groups = f.groups(kind);
        let groups = groups.as_deref();
        let (e, p, dim) = (f.energies(), f.populations(), f.dim());

        let sigma = hermitized(Mat::from_fn(dim, dim, |i, j| self.rho_prime[(i, j)] * w[(i, j)]));
        let entropy = spectrum_entropy(&eigenvalues(sigma.as_ref(), groups)?);
        let energy = (0..dim).fold(T::zero(), |acc, i| acc + e[i] * sigma[(i, i)].re);
        let relative_entropy = -entropy + f.beta * energy + f.log_partition;

        // rho^{-1/2} sigma rho^{-1/2} = Z exp(beta H / 2) sigma exp(beta H / 2)
        let half = T::from_f64(0.5) * f.beta;
        let x = hermitized(Mat::from_fn(dim, dim, |i, j| {
            sigma[(i, j)] * (f.log_partition + (e[i] + e[j]) * half).exp()
        }));
        drop(sigma);
        let bs_relative_entropy = -weighted_trace(x.as_ref(), p, groups, eta)?;
        drop(x);

        let me = hermitized(Mat::from_fn(dim, dim, |i, j| self.e_beta[(i, j)] * w[(i, j)]));
        drop(w);
        let normalization = (0..dim).fold(T::zero(), |acc, i| acc + p[i] * me[(i, i)].re);
        let eta_term = weighted_trace(me.as_ref(), p, groups, eta)?;
        let mut dev = me;
        let mut sq = T::zero();
        for j in 0..dim {
            dev[(j, j)] = dev[(j, j)] - c(T::one(), T::zero());
            for i in 0..dim {
                sq = sq + dev[(i, j)].norm_sqr();
            }
        }
        let deviation_op = eigenvalues(dev.as_ref(), groups)?.iter().fold(T::zero(), |m, v| Float::max(m, v.abs()));
        Ok(AveragedKick {
            entropy,
            relative_entropy,
            bs_relative_entropy,
            eta_term,
            deviation_op,
            deviation_frobenius: sq.sqrt(),
            normalization,
        })
    }
}

fn hermitized<T: Real>(mut a: CMat<T>) -> CMat<T> {
    let n = a.nrows();
    let half = T::from_f64(0.5);
    for j in 0..n {
        a[(j, j)] = c(a[(j, j)].re, T::zero());
        for i in j + 1..n {
            let z = (a[(i, j)] + a[(j, i)].conj()) * half;
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

fn submatrix<T: Real>(a: MatRef<'_, Complex<T>>, idx: &[usize]) -> CMat<T> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Eigenvalues of a Hermitian matrix that is block diagonal on `groups`.
fn eigenvalues<T: Real>(a: MatRef<'_, Complex<T>>, groups: Option<&[Vec<usize>]>) -> Result<Vec<T>> {
    let solve = |m: MatRef<'_, Complex<T>>| {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenSolver { dim: m.nrows(), condition: f64::NAN })
    };
    let mut values = match groups {
        None => solve(a)?,
        Some(groups) => {
            let mut v = Vec::with_capacity(a.nrows());
            for g in groups {
                v.extend(solve(submatrix(a, g).as_ref())?);
            }
            v
        }
    };
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(values)
}

/// `sum_i p_i f(a)_ii` for Hermitian `a`, block diagonal on `groups`.
fn weighted_trace<T: Real>(
    a: MatRef<'_, Complex<T>>,
    p: &[T],
    groups: Option<&[Vec<usize>]>,
    f: impl Fn(T) -> T,
) -> Result<T> {
    let all: Vec<Vec<usize>>;
    let groups = match groups {
        Some(g) => g,
        None => {
            all = vec![(0..a.nrows()).collect()];
            &all
        }
    };
    let mut total = T::zero();
    for g in groups {
        let block = submatrix(a, g);
        let (values, v) = positive_eigen(block.as_ref())?;
        for (k, &value) in values.iter().enumerate() {
            let weight = (0..g.len()).fold(T::zero(), |acc, i| acc + p[g[i]] * v[(i, k)].norm_sqr());
            total = total + weight * f(value);
        }
    }
    Ok(total)
}

/// Eigenpairs of a positive semidefinite block, by Jacobi rotations when its
/// diagonal spans many orders of magnitude.
fn positive_eigen<T: Real>(a: MatRef<'_, Complex<T>>) -> Result<(Vec<T>, CMat<T>)> {
    let n = a.nrows();
    let (lo, hi) = (0..n).fold((T::infinity(), T::zero()), |(lo, hi), i| {
        (Float::min(lo, a[(i, i)].re), Float::max(hi, a[(i, i)].re))
    });
    if n > 1 && n <= GRADED_MAX_DIM && (hi / lo).to_f64() > GRADED_RATIO {
        return graded_eigen(a);
    }
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenSolver { dim: n, condition: f64::NAN })?;
    Ok(((0..n).map(|k| evd.S()[k].re).collect(), evd.U().to_owned()))
}
