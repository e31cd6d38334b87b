//! Gibbs states, local unitary kicks and the work they perform.

use std::sync::Arc;

use faer::Mat;
use num_traits::Float;

use crate::entropy::relative_entropy_thermal;
use crate::error::{Error, Result};
use crate::lattice::{pauli, LatticeSpec};
use crate::operator::{
    check_dims, spectral_decompose, ComplexMatrix, DensityMatrix, HermitianOperator, SpectralDecomposition,
    UnitaryOperator,
};
use crate::scalar::{c, Real};

/// `rho = exp(-beta H) / Z` together with the spectral data it was built from.
#[derive(Clone, Debug)]
pub struct ThermalState<T: Real> {
    rho: DensityMatrix<T>,
    beta: T,
    log_partition: T,
    hamiltonian: HermitianOperator<T>,
    hamiltonian_decomp: Arc<SpectralDecomposition<T>>,
    populations: Vec<T>,
}

impl<T: Real> ThermalState<T> {
    pub fn rho(&self) -> &DensityMatrix<T> {
        &self.rho
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn log_partition(&self) -> T {
        self.log_partition
    }

    pub fn hamiltonian(&self) -> &HermitianOperator<T> {
        &self.hamiltonian
    }

    pub fn hamiltonian_decomp(&self) -> &SpectralDecomposition<T> {
        &self.hamiltonian_decomp
    }

    pub fn shared_decomp(&self) -> Arc<SpectralDecomposition<T>> {
        self.hamiltonian_decomp.clone()
    }

    /// Eigenvalues of `rho`, aligned with the ascending energies of `H`.
    pub fn populations(&self) -> &[T] {
        &self.populations
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `log rho = -beta H - log Z`, evaluated analytically.
    pub fn log_rho(&self) -> HermitianOperator<T> {
        self.hamiltonian.scaled(-self.beta).shifted(self.log_partition)
    }

    /// `tr(H rho)`.
    pub fn energy(&self) -> T {
        self.hamiltonian_decomp
            .eigenvalues()
            .iter()
            .zip(&self.populations)
            .fold(T::zero(), |acc, (&e, &p)| acc + e * p)
    }

    /// `S(rho) = beta <H> + log Z`.
    pub fn entropy(&self) -> T {
        self.beta * self.energy() + self.log_partition
    }

    /// `exp(s beta (H - c))` with `c` the midpoint of the spectrum, so the
    /// exponent stays within `|s| beta width / 2`. Returns the operator and `c`.
    pub(crate) fn shifted_exponential(&self, s: T) -> Result<(HermitianOperator<T>, T)> {
        let d = &self.hamiltonian_decomp;
        let center = (d.min_eigenvalue() + d.max_eigenvalue()) / T::from_f64(2.0);
        let exponent = Float::abs(s * self.beta) * (d.max_eigenvalue() - center);
        if exponent.to_f64() > 700.0 {
            return Err(Error::Overflow { exponent: exponent.to_f64() });
        }
        let values: Vec<T> = d.eigenvalues().iter().map(|&e| (s * self.beta * (e - center)).exp()).collect();
        Ok((d.reconstruct_with(&values), center))
    }
}

/// Thermal state of `h` at inverse temperature `beta >= 0`.
pub fn thermal_state<T: Real>(h: &HermitianOperator<T>, beta: T) -> Result<ThermalState<T>> {
    if !Float::is_finite(beta) || beta < T::zero() {
        return Err(Error::InvalidParameter { name: "beta".into(), value: beta.to_f64() });
    }
    let decomp = spectral_decompose(h)?;
    let exponents: Vec<T> = decomp.eigenvalues().iter().map(|&e| -beta * e).collect();
    let top = exponents.iter().copied().fold(T::neg_infinity(), Float::max);
    let sum = exponents.iter().fold(T::zero(), |acc, &x| acc + (x - top).exp());
    let log_partition = top + sum.ln();
    let populations: Vec<T> = exponents.iter().map(|&x| (x - log_partition).exp()).collect();
    let rho = DensityMatrix::from_positive(decomp.reconstruct_with(&populations))?;
    Ok(ThermalState {
        rho,
        beta,
        log_partition,
        hamiltonian: h.clone(),
        hamiltonian_decomp: Arc::new(decomp),
        populations,
    })
}

/// Local unitary `exp(-i strength generator)` acting on one site.
#[derive(Clone, Debug)]
pub struct PerturbationSpec<T: Real> {
    pub site: usize,
    pub generator: HermitianOperator<T>,
    pub strength: T,
}

impl<T: Real> PerturbationSpec<T> {
    pub fn new(site: usize, generator: HermitianOperator<T>, strength: T) -> Result<Self> {
        if !Float::is_finite(strength) {
            return Err(Error::InvalidParameter { name: "strength".into(), value: strength.to_f64() });
        }
        Ok(Self { site, generator, strength })
    }

    /// Pauli generator by label (`X`, `Y`, `Z`).
    pub fn pauli(site: usize, label: &str, strength: T) -> Result<Self> {
        let g = pauli::by_label::<T>(label).ok_or_else(|| Error::UnknownModel(format!("pauli `{label}`")))?;
        Self::new(site, HermitianOperator::new(g)?, strength)
    }

    /// X generator at site 0, strength 0.7.
    pub fn default_kick() -> Self {
        Self::pauli(0, "X", T::from_f64(0.7)).expect("valid default")
    }
}

/// `exp(-i strength generator)` on the local space.
pub fn kick_factor<T: Real>(p: &PerturbationSpec<T>) -> Result<ComplexMatrix<T>> {
    let d = spectral_decompose(&p.generator)?;
    let v = d.eigenvectors();
    let n = d.dim();
    let phases: Vec<_> = d
        .eigenvalues()
        .iter()
        .map(|&e| {
            let a = -p.strength * e;
            c(a.cos(), a.sin())
        })
        .collect();
    let m = Mat::from_fn(n, n, |i, j| {
        (0..n).fold(c(T::zero(), T::zero()), |acc, k| acc + v[(i, k)] * phases[k] * v[(j, k)].conj())
    });
    ComplexMatrix::new(m)
}

/// The kick as a structured single-site unitary on the chain.
pub fn local_kick<T: Real>(lattice: &LatticeSpec, p: &PerturbationSpec<T>) -> Result<UnitaryOperator<T>> {
    if p.site >= lattice.sites() {
        return Err(Error::SiteOutOfRange { site: p.site, sites: lattice.sites() });
    }
    if p.generator.dim() != lattice.local_dim() {
        return Err(Error::LocalDimMismatch { expected: lattice.local_dim(), found: p.generator.dim() });
    }
    UnitaryOperator::embedded(lattice.sites(), lattice.local_dim(), p.site, kick_factor(p)?)
}

/// `rho' = U rho U^dag`.
pub fn perturb<T: Real>(state: &ThermalState<T>, u: &UnitaryOperator<T>) -> Result<DensityMatrix<T>> {
    check_dims(state.dim(), u.dim())?;
    let out = u.conjugate(state.rho.as_mat());
    DensityMatrix::from_positive(HermitianOperator::hermitized(out))
}

/// `W = tr(H rho') - tr(H rho)`.
pub fn work<T: Real>(h: &HermitianOperator<T>, rho: &DensityMatrix<T>, rho_prime: &DensityMatrix<T>) -> Result<T> {
    Ok(h.trace_product(rho_prime.as_operator())? - h.trace_product(rho.as_operator())?)
}

/// Work together with the relative entropy it must equal after multiplying by beta.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkReport<T> {
    pub work: T,
    pub beta_work: T,
    pub relative_entropy_check: T,
}

impl<T: Real> WorkReport<T> {
    pub fn residual(&self) -> T {
        Float::abs(self.beta_work - self.relative_entropy_check)
    }
}

pub fn work_report<T: Real>(state: &ThermalState<T>, rho_prime: &DensityMatrix<T>) -> Result<WorkReport<T>> {
    let w = work(state.hamiltonian(), state.rho(), rho_prime)?;
    let rel = relative_entropy_thermal(rho_prime, state)?;
    Ok(WorkReport { work: w, beta_work: state.beta() * w, relative_entropy_check: rel.nats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_hamiltonian, translation_operator, HamiltonianSpec, Model};
    use crate::operator::{max_abs_diff, random_unitary, spectral_values, CMat};
    use num_complex::Complex;

    fn free_spins(n: usize, h: f64) -> (LatticeSpec, HermitianOperator<f64>) {
        let l = LatticeSpec::qubits(n).unwrap();
        let spec = HamiltonianSpec::new(Model::FreeSpins { h }).unwrap();
        let ham = build_hamiltonian(&l, &spec).unwrap();
        (l, ham)
    }

    fn taylor_exp(a: &CMat<f64>) -> CMat<f64> {
        let n = a.nrows();
        let mut term = Mat::<Complex<f64>>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            let next = &term * a;
            term = Mat::from_fn(n, n, |i, j| next[(i, j)] / k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_hamiltonian_is_maximally_mixed() {
        let s = thermal_state(&HermitianOperator::<f64>::zero(4), 3.0).unwrap();
        assert!((s.log_partition() - 4f64.ln()).abs() < 1e-15);
        let mm = DensityMatrix::<f64>::maximally_mixed(4);
        assert!(max_abs_diff(s.rho().as_mat(), mm.as_mat()) < 1e-15);
    }

    #[test]
    fn single_spin_populations() {
        let z = HermitianOperator::new(pauli::z::<f64>()).unwrap();
        let s = thermal_state(&z, 1.0).unwrap();
        // energies ascending: -1 then +1
        assert!((s.populations()[0] - 0.8807970780).abs() < 1e-10);
        assert!((s.populations()[1] - 0.1192029220).abs() < 1e-10);
        assert!((s.log_partition() - 1.1269280110).abs() < 1e-10);
        assert!((s.rho().as_mat()[(0, 0)].re - 0.1192029220).abs() < 1e-10);
    }

    #[test]
    fn free_spins_factorize() {
        let z = HermitianOperator::new(pauli::z::<f64>()).unwrap();
        let one = thermal_state(&z, 0.8).unwrap();
        let r = one.rho().as_mat();
        let expected = r.kron(r).kron(r);
        let (_, h) = free_spins(3, 1.0);
        let s = thermal_state(&h, 0.8).unwrap();
        assert!(max_abs_diff(s.rho().as_mat(), expected.as_ref()) < 1e-12);
        assert!((s.log_partition() - 3.0 * one.log_partition()).abs() < 1e-12);
    }

    #[test]
    fn analytic_log_matches_definition() {
        let l = LatticeSpec::qubits(3).unwrap();
        let spec = HamiltonianSpec::new(Model::TransverseFieldIsing { j: 1.0, g: 0.7 }).unwrap();
        let h = build_hamiltonian::<f64>(&l, &spec).unwrap();
        let s = thermal_state(&h, 1.3).unwrap();
        let d = spectral_decompose(s.rho().as_operator()).unwrap();
        let numeric = crate::operator::matrix_function(&d, f64::ln).unwrap();
        assert!(max_abs_diff(numeric.as_mat(), s.log_rho().as_mat()) < 1e-9);
        let t = translation_operator::<f64>(&l);
        assert!(max_abs_diff(t.conjugate(s.rho().as_mat()).as_ref(), s.rho().as_mat()) < 1e-10);
    }

    #[test]
    fn large_beta_is_stable() {
        let (_, h) = free_spins(4, 1.0);
        let s = thermal_state(&h, 50.0).unwrap();
        assert!(s.log_partition().is_finite());
        assert!((s.rho().trace() - 1.0).abs() < 1e-12);
        assert!((s.log_partition() - 200.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_beta() {
        let h = HermitianOperator::<f64>::zero(2);
        assert!(thermal_state(&h, f64::NAN).is_err());
        assert!(thermal_state(&h, f64::INFINITY).is_err());
        assert!(thermal_state(&h, 0.0).is_ok());
    }

    #[test]
    fn kick_matches_series_oracle() {
        let l = LatticeSpec::qubits(2).unwrap();
        let p = PerturbationSpec::<f64>::pauli(0, "X", 0.7).unwrap();
        let u = local_kick(&l, &p).unwrap().to_dense();
        let x0 = crate::lattice::embed_site_operator(&l, &crate::lattice::SiteOperator::new(0, pauli::x::<f64>()))
            .unwrap();
        let gen = Mat::from_fn(4, 4, |i, j| x0.as_mat()[(i, j)] * Complex::new(0.0, -0.7));
        let oracle = taylor_exp(&gen);
        assert!(max_abs_diff(u.as_mat(), oracle.as_ref()) < 1e-12);
    }

    #[test]
    fn kicks_form_a_group() {
        let l = LatticeSpec::qubits(3).unwrap();
        let k = |s: f64| local_kick(&l, &PerturbationSpec::<f64>::pauli(1, "X", s).unwrap()).unwrap();
        let zero = k(0.0).to_dense();
        assert!(max_abs_diff(zero.as_mat(), Mat::identity(8, 8).as_ref()) < 1e-15);
        let lhs = k(0.3).compose(&k(0.45)).unwrap().to_dense();
        assert!(max_abs_diff(lhs.as_mat(), k(0.75).to_dense().as_mat()) < 1e-14);
        // exp(-i pi X) = -1
        let pi = k(std::f64::consts::PI).to_dense();
        let minus = Mat::from_fn(8, 8, |i, j| {
            Complex::<f64>::new(if i == j { -1.0 } else { 0.0 }, 0.0)
        });
        assert!(max_abs_diff(pi.as_mat(), minus.as_ref()) < 1e-14);
    }

    #[test]
    fn work_matches_closed_form() {
        // single flipped spin: W = h (1 - cos 2 lambda) tanh(beta h)
        let (l, h) = free_spins(2, 1.0);
        let s = thermal_state(&h, 1.0).unwrap();
        let u = local_kick(&l, &PerturbationSpec::pauli(0, "X", 0.7).unwrap()).unwrap();
        let rp = perturb(&s, &u).unwrap();
        let w = work(&h, s.rho(), &rp).unwrap();
        let expected = (1.0 - (1.4f64).cos()) * 1.0f64.tanh();
        assert!((w - expected).abs() < 1e-13, "{w} vs {expected}");
        let report = work_report(&s, &rp).unwrap();
        assert!(report.residual() < 1e-12);
    }

    #[test]
    fn commuting_kick_changes_nothing() {
        let (l, h) = free_spins(3, 1.0);
        let s = thermal_state(&h, 1.0).unwrap();
        let u = local_kick(&l, &PerturbationSpec::pauli(1, "Z", 0.9).unwrap()).unwrap();
        let rp = perturb(&s, &u).unwrap();
        assert!(max_abs_diff(rp.as_mat(), s.rho().as_mat()) < 1e-10);
        assert!(work(&h, s.rho(), &rp).unwrap().abs() < 1e-14);
    }

    #[test]
    fn perturbation_preserves_spectrum_and_is_passive() {
        for n in 2..=4 {
            let l = LatticeSpec::qubits(n).unwrap();
            let spec = HamiltonianSpec::new(Model::HeisenbergXxz { j: 1.0, delta: 0.6 }).unwrap();
            let h = build_hamiltonian::<f64>(&l, &spec).unwrap();
            let s = thermal_state(&h, 1.0).unwrap();
            let before = spectral_values(s.rho().as_operator()).unwrap();
            for seed in 0..100 {
                let site = (seed as usize) % n;
                let factor = random_unitary::<f64>(2, seed).to_dense();
                let u = UnitaryOperator::embedded(n, 2, site, factor).unwrap();
                let rp = perturb(&s, &u).unwrap();
                let after = spectral_values(rp.as_operator()).unwrap();
                for (a, b) in before.iter().zip(&after) {
                    assert!((a - b).abs() < 1e-10);
                }
                assert!(work(&h, s.rho(), &rp).unwrap() >= -1e-12);
            }
        }
    }
}
