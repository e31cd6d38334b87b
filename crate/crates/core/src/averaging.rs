//! Frame-averaging maps and the conjugated perturbation `u = e^{bH/2} U e^{-bH/2}`.
//!
//! Spatial maps average over powers of a translation `T` of order `N`:
//! `M(A) = sum_n w_n T^n A T^{-n}`, with uniform weights or weights decaying
//! with cyclic distance on a scale `R`. The temporal map multiplies matrix
//! elements in the energy eigenbasis by `1 / (1 + i (E_m - E_n) tau)`, which
//! is the exponentially weighted time average in closed form.

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{
    check_dims, max_abs_diff_identity, spectral_values, CMat, ComplexMatrix, CyclicSectors, DensityMatrix,
    HermitianOperator, SpectralDecomposition, UnitaryOperator,
};
use crate::scalar::{c, Real};
use crate::thermo::ThermalState;

/// Accepted `max |T^N - 1|`.
pub const ORDER_TOL: f64 = 1e-10;
/// Relative energy gap (in units of the spectral width) below which levels are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Temporal scales below this act as the identity map.
pub const TAU_MIN: f64 = 1e-12;

/// Which average to take.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AveragingKind<T> {
    Uniform,
    /// Spatial weights `exp(-dist(n) / r)`.
    Weighted { r: T },
    /// Temporal scale; `None` is infinite (exact dephasing).
    Temporal { tau: Option<T> },
}

impl<T: Real> AveragingKind<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            AveragingKind::Uniform => "uniform-spatial",
            AveragingKind::Weighted { .. } => "weighted-spatial",
            AveragingKind::Temporal { .. } => "temporal",
        }
    }

    /// `R` or `tau`; infinite tau is `+inf`, uniform has none.
    pub fn param(&self) -> Option<f64> {
        match *self {
            AveragingKind::Uniform => None,
            AveragingKind::Weighted { r } => Some(r.to_f64()),
            AveragingKind::Temporal { tau } => Some(tau.map_or(f64::INFINITY, |t| t.to_f64())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AveragingKind::Weighted { r } if !(r > T::zero() && Float::is_finite(r)) => {
                Err(Error::InvalidParameter { name: "R".into(), value: r.to_f64() })
            }
            AveragingKind::Temporal { tau: Some(t) } if !(t >= T::zero() && Float::is_finite(t)) => {
                Err(Error::InvalidParameter { name: "tau".into(), value: t.to_f64() })
            }
            _ => Ok(()),
        }
    }
}

impl<T: Real> fmt::Display for AveragingKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(p) => write!(f, "{}({p})", self.tag()),
            None => write!(f, "{}", self.tag()),
        }
    }
}

#[derive(Clone, Debug)]
enum Action<T: Real> {
    Spatial { t: UnitaryOperator<T>, weights: Vec<T>, sectors: Option<Arc<CyclicSectors>> },
    Temporal { decomp: Arc<SpectralDecomposition<T>>, energies: Vec<T>, clusters: Vec<usize>, tau: Option<T> },
}

/// A concrete averaging channel.
#[derive(Clone, Debug)]
pub struct FrameMap<T: Real> {
    kind: AveragingKind<T>,
    action: Action<T>,
}

impl<T: Real> FrameMap<T> {
    /// `(1/N) sum_n T^n . T^{-n}`.
    pub fn uniform(t: &UnitaryOperator<T>, n: usize) -> Result<Self> {
        check_order(t, n)?;
        let sectors = t.as_permutation().and_then(|p| CyclicSectors::new(p, n).ok()).map(Arc::new);
        let w = T::one() / T::from_usize(n);
        Ok(Self {
            kind: AveragingKind::Uniform,
            action: Action::Spatial { t: t.clone(), weights: vec![w; n], sectors },
        })
    }

    /// Weights `w_n ∝ exp(-min(n, N - n) / r)`, normalized.
    pub fn weighted(t: &UnitaryOperator<T>, n: usize, r: T) -> Result<Self> {
        let kind = AveragingKind::Weighted { r };
        kind.validate()?;
        check_order(t, n)?;
        let weights = spatial_weights(n, r);
        Ok(Self { kind, action: Action::Spatial { t: t.clone(), weights, sectors: None } })
    }

    /// Eigenbasis weights `1 / (1 + i (E_m - E_n) tau)`; `tau = None` dephases.
    pub fn temporal(decomp: Arc<SpectralDecomposition<T>>, tau: Option<T>) -> Result<Self> {
        let kind = AveragingKind::Temporal { tau };
        kind.validate()?;
        let (energies, clusters) = degenerate_levels(decomp.eigenvalues());
        Ok(Self { kind, action: Action::Temporal { decomp, energies, clusters, tau } })
    }

    /// Builds the map of `kind` for a chain with translation `t` of order `n` and
    /// Hamiltonian spectrum `decomp`.
    pub fn of_kind(
        kind: AveragingKind<T>,
        t: &UnitaryOperator<T>,
        n: usize,
        decomp: impl FnOnce() -> Arc<SpectralDecomposition<T>>,
    ) -> Result<Self> {
        match kind {
            AveragingKind::Uniform => Self::uniform(t, n),
            AveragingKind::Weighted { r } => Self::weighted(t, n, r),
            AveragingKind::Temporal { tau } => Self::temporal(decomp(), tau),
        }
    }

    pub fn kind(&self) -> AveragingKind<T> {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.action {
            Action::Spatial { t, .. } => t.dim(),
            Action::Temporal { decomp, .. } => decomp.dim(),
        }
    }

    /// Spatial weights, `w_0` first.
    pub fn weights(&self) -> Option<&[T]> {
        match &self.action {
            Action::Spatial { weights, .. } => Some(weights),
            Action::Temporal { .. } => None,
        }
    }

    /// `M(A)` for any square matrix.
    pub fn apply_mat(&self, a: faer::MatRef<'_, Complex<T>>) -> Result<CMat<T>> {
        check_dims(self.dim(), a.nrows())?;
        match &self.action {
            Action::Spatial { t, weights, .. } => {
                let mut acc = Mat::<Complex<T>>::zeros(a.nrows(), a.ncols());
                let mut cur = a.to_owned();
                for (n, &w) in weights.iter().enumerate() {
                    if w != T::zero() {
                        acc = Mat::from_fn(a.nrows(), a.ncols(), |i, j| acc[(i, j)] + cur[(i, j)] * w);
                    }
                    if n + 1 < weights.len() {
                        cur = t.conjugate(cur.as_ref());
                    }
                }
                Ok(acc)
            }
            Action::Temporal { decomp, energies, clusters, tau } => {
                if let Some(t) = *tau {
                    if t.to_f64() < TAU_MIN {
                        return Ok(a.to_owned());
                    }
                }
                let v = decomp.eigenvectors();
                let mut tilde = v.adjoint() * (a * v);
                let n = tilde.nrows();
                for j in 0..n {
                    for i in 0..n {
                        let w = match tau {
                            None if clusters[i] == clusters[j] => c(T::one(), T::zero()),
                            None => c(T::zero(), T::zero()),
                            Some(t) => {
                                // 1 / (1 + i x) = (1 - i x) / (1 + x^2)
                                let x = (energies[i] - energies[j]) * *t;
                                let den = T::one() + x * x;
                                c(T::one() / den, -x / den)
                            }
                        };
                        tilde[(i, j)] = tilde[(i, j)] * w;
                    }
                }
                Ok(v * (tilde * v.adjoint()))
            }
        }
    }

    /// `M(A)` for a Hermitian operator; uniform averages carry the translation symmetry.
    pub fn apply_hermitian(&self, a: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
        let out = HermitianOperator::hermitized(self.apply_mat(a.as_mat())?);
        Ok(match &self.action {
            Action::Spatial { sectors: Some(s), .. } => out.with_symmetry(s.clone()),
            _ => out,
        })
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        DensityMatrix::from_positive(self.apply_hermitian(rho.as_operator())?)
    }
}

fn check_order<T: Real>(t: &UnitaryOperator<T>, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::NotOfOrder { order: 0, deviation: f64::NAN });
    }
    let p = t.power(n);
    let deviation = match p.as_permutation() {
        Some(perm) => {
            if perm.iter().enumerate().all(|(i, &x)| i == x) {
                0.0
            } else {
                1.0
            }
        }
        None => max_abs_diff_identity(p.to_dense().as_mat()).to_f64(),
    };
    if deviation > ORDER_TOL {
        return Err(Error::NotOfOrder { order: n, deviation });
    }
    Ok(())
}

/// `exp(-min(k, N - k) / r)` normalized to unit sum.
pub fn spatial_weights<T: Real>(n: usize, r: T) -> Vec<T> {
    let raw: Vec<T> = (0..n)
        .map(|k| {
            let dist = T::from_usize(k.min(n - k));
            (-dist / r).exp()
        })
        .collect();
    let total = raw.iter().fold(T::zero(), |acc, &w| acc + w);
    raw.into_iter().map(|w| w / total).collect()
}

/// Groups ascending energies into degenerate clusters; returns per-level cluster
/// energies (the cluster mean) and cluster ids.
pub(crate) fn degenerate_levels<T: Real>(energies: &[T]) -> (Vec<T>, Vec<usize>) {
    let n = energies.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let width = energies[n - 1] - energies[0];
    let gap = T::from_f64(DEGENERACY_TOL) * width;
    let mut ids = vec![0; n];
    for i in 1..n {
        ids[i] = ids[i - 1] + usize::from(energies[i] - energies[i - 1] > gap);
    }
    let mut snapped = energies.to_vec();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && ids[end] == ids[start] {
            end += 1;
        }
        let mean = energies[start..end].iter().fold(T::zero(), |a, &e| a + e) / T::from_usize(end - start);
        snapped[start..end].iter_mut().for_each(|e| *e = mean);
        start = end;
    }
    (snapped, ids)
}

/// `(1/N) sum_n T^n rho T^{-n}`.
pub fn frame_average<T: Real>(rho: &DensityMatrix<T>, t: &UnitaryOperator<T>, n: usize) -> Result<DensityMatrix<T>> {
    FrameMap::uniform(t, n)?.apply(rho)
}

pub fn weighted_frame_average<T: Real>(
    rho: &DensityMatrix<T>,
    t: &UnitaryOperator<T>,
    n: usize,
    r: T,
) -> Result<DensityMatrix<T>> {
    FrameMap::weighted(t, n, r)?.apply(rho)
}

pub fn temporal_average<T: Real>(
    rho: &DensityMatrix<T>,
    decomp: &SpectralDecomposition<T>,
    tau: Option<T>,
) -> Result<DensityMatrix<T>> {
    FrameMap::temporal(Arc::new(decomp.clone()), tau)?.apply(rho)
}

/// `u = e^{beta H/2} U e^{-beta H/2}` and `E = u u^dag`.
#[derive(Clone, Debug)]
pub struct ConjugatedPerturbation<T: Real> {
    pub u: ComplexMatrix<T>,
    pub e: HermitianOperator<T>,
}

impl<T: Real> ConjugatedPerturbation<T> {
    /// `tr(rho E)`; equals 1 for the thermal state the perturbation was built from.
    pub fn normalization(&self, rho: &DensityMatrix<T>) -> Result<T> {
        rho.as_operator().trace_product(&self.e)
    }
}

pub fn conjugated_perturbation<T: Real>(
    state: &ThermalState<T>,
    u: &UnitaryOperator<T>,
) -> Result<ConjugatedPerturbation<T>> {
    check_dims(state.dim(), u.dim())?;
    let exponent = state.beta() * state.hamiltonian_decomp().spectral_radius();
    if exponent.to_f64() > 700.0 {
        return Err(Error::Overflow { exponent: exponent.to_f64() });
    }
    let (up, _) = state.shifted_exponential(T::from_f64(0.5))?;
    let (down, _) = state.shifted_exponential(T::from_f64(-0.5))?;
    let ud = u.apply_left(down.as_mat());
    let conj = up.as_mat() * ud;
    let e = HermitianOperator::hermitized(&conj * conj.adjoint());
    Ok(ConjugatedPerturbation { u: ComplexMatrix::from_mat_unchecked(conj), e })
}

/// Size of `M E - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EDeviation<T> {
    /// Largest singular value.
    pub op_norm: T,
    pub frobenius: T,
    /// `tr(rho M E)`
    pub normalization: T,
}

pub fn averaged_e_deviation<T: Real>(
    cp: &ConjugatedPerturbation<T>,
    map: &FrameMap<T>,
    rho: &DensityMatrix<T>,
) -> Result<EDeviation<T>> {
    let me = map.apply_hermitian(&cp.e)?;
    let normalization = rho.as_operator().trace_product(&me)?;
    let dev = me.shifted(T::one());
    let values = spectral_values(&dev)?;
    let op_norm = values.iter().fold(T::zero(), |m, v| Float::max(m, v.abs()));
    let m = dev.as_mat();
    let mut sq = T::zero();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            sq = sq + m[(i, j)].norm_sqr();
        }
    }
    Ok(EDeviation { op_norm, frobenius: sq.sqrt(), normalization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{bs_relative_entropy, von_neumann_entropy};
    use crate::lattice::{build_hamiltonian, translation_operator, HamiltonianSpec, LatticeSpec, Model};
    use crate::operator::{commutator, max_abs, max_abs_diff, random_density_matrix, spectral_decompose};
    use crate::thermo::{local_kick, perturb, thermal_state, PerturbationSpec};

    fn chain(n: usize, model: Model) -> (LatticeSpec, HermitianOperator<f64>, UnitaryOperator<f64>) {
        let l = LatticeSpec::qubits(n).unwrap();
        let h = build_hamiltonian(&l, &HamiltonianSpec::new(model).unwrap()).unwrap();
        let t = translation_operator(&l);
        (l, h, t)
    }

    const TFIM: Model = Model::TransverseFieldIsing { j: 1.0, g: 0.9 };

    #[test]
    fn two_site_product_state() {
        let (_, _, t) = chain(2, TFIM);
        let psi: Vec<_> = (0..4).map(|i| c(if i == 1 { 1.0 } else { 0.0 }, 0.0)).collect();
        let avg = frame_average(&DensityMatrix::pure(&psi).unwrap(), &t, 2).unwrap();
        let expected = DensityMatrix::from_diagonal(&[0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!(max_abs_diff(avg.as_mat(), expected.as_mat()) < 1e-15);
    }

    #[test]
    fn uniform_fixes_thermal_and_is_idempotent() {
        let (_, h, t) = chain(4, TFIM);
        let s = thermal_state(&h, 1.0).unwrap();
        let m = FrameMap::uniform(&t, 4).unwrap();
        assert!(max_abs_diff(m.apply(s.rho()).unwrap().as_mat(), s.rho().as_mat()) < 1e-10);
        let r = random_density_matrix::<f64>(16, 2);
        let once = m.apply(&r).unwrap();
        let twice = m.apply(&once).unwrap();
        assert!(max_abs_diff(once.as_mat(), twice.as_mat()) < 1e-10);
        assert!(max_abs_diff(t.conjugate(once.as_mat()).as_ref(), once.as_mat()) < 1e-10);
        assert!(once.as_operator().symmetry().is_some());
    }

    #[test]
    fn wrong_order_is_rejected() {
        let (_, _, t) = chain(4, TFIM);
        assert!(matches!(FrameMap::uniform(&t, 3), Err(Error::NotOfOrder { .. })));
        assert!(FrameMap::uniform(&t, 8).is_ok());
    }

    #[test]
    fn weight_limits() {
        let w = spatial_weights(4, 1.0f64);
        let z = 1.0 + 2.0 * (-1.0f64).exp() + (-2.0f64).exp();
        let expected = [1.0 / z, (-1.0f64).exp() / z, (-2.0f64).exp() / z, (-1.0f64).exp() / z];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let (_, _, t) = chain(4, TFIM);
        let r = random_density_matrix::<f64>(16, 7);
        let sharp = weighted_frame_average(&r, &t, 4, 1e-6).unwrap();
        assert!(max_abs_diff(sharp.as_mat(), r.as_mat()) < 1e-9);
        let flat = weighted_frame_average(&r, &t, 4, 1e6).unwrap();
        let uniform = frame_average(&r, &t, 4).unwrap();
        // weights differ from 1/N by at most 1/(N R)
        let bound = 4.0 * 2.0 / 1e6 * max_abs(r.as_mat());
        assert!(max_abs_diff(flat.as_mat(), uniform.as_mat()) < bound);
        let s_flat = von_neumann_entropy(&flat).unwrap().nats;
        let s_uniform = von_neumann_entropy(&uniform).unwrap().nats;
        assert!((s_flat - s_uniform).abs() < 1e-9);
    }

    #[test]
    fn weighted_gain_lies_between_limits() {
        let (l, h, t) = chain(4, TFIM);
        let s = thermal_state(&h, 1.0).unwrap();
        let rp = perturb(&s, &local_kick(&l, &PerturbationSpec::default_kick()).unwrap()).unwrap();
        let base = von_neumann_entropy(&rp).unwrap().nats;
        let gain = |r: f64| von_neumann_entropy(&weighted_frame_average(&rp, &t, 4, r).unwrap()).unwrap().nats - base;
        let (g0, g1, ginf) = (gain(1e-6), gain(1.0), gain(1e6));
        assert!(g0 < g1 && g1 < ginf, "{g0} {g1} {ginf}");
    }

    #[test]
    fn temporal_fixed_points_and_dephasing() {
        let h = crate::operator::random_hermitian::<f64>(8, 5);
        let d = spectral_decompose(&h).unwrap();
        let diag_state = d.reconstruct_with(&[0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05]);
        let diag_state = DensityMatrix::from_positive(diag_state).unwrap();
        for tau in [Some(0.5), Some(10.0), None] {
            let out = temporal_average(&diag_state, &d, tau).unwrap();
            assert!(max_abs_diff(out.as_mat(), diag_state.as_mat()) < 1e-12);
        }
        let r = random_density_matrix::<f64>(8, 11);
        let tiny = temporal_average(&r, &d, Some(1e-13)).unwrap();
        assert!(max_abs_diff(tiny.as_mat(), r.as_mat()) < 1e-15);
        let deph = temporal_average(&r, &d, None).unwrap();
        let pops = d.diagonal_weights(r.as_mat());
        let expected = crate::entropy::spectrum_entropy(&pops);
        assert!((von_neumann_entropy(&deph).unwrap().nats - expected).abs() < 1e-12);
    }

    #[test]
    fn temporal_keeps_degenerate_blocks() {
        let (_, h, _) = chain(3, Model::FreeSpins { h: 1.0 });
        let d = Arc::new(spectral_decompose(&h).unwrap());
        let m = FrameMap::temporal(d, None).unwrap();
        let r = random_density_matrix::<f64>(8, 3);
        let out = m.apply(&r).unwrap();
        // H is diagonal: dephasing keeps exactly the entries between equal magnetizations
        for i in 0..8 {
            for j in 0..8 {
                let same = (i as u32).count_ones() == (j as u32).count_ones();
                let expect = if same { r.as_mat()[(i, j)] } else { c(0.0, 0.0) };
                assert!((out.as_mat()[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn graceful_for_every_kind() {
        let (_, h, t) = chain(4, Model::HeisenbergXxz { j: 1.0, delta: 0.4 });
        let d = Arc::new(spectral_decompose(&h).unwrap());
        let maps = [
            FrameMap::uniform(&t, 4).unwrap(),
            FrameMap::weighted(&t, 4, 1.5).unwrap(),
            FrameMap::temporal(d.clone(), Some(2.0)).unwrap(),
            FrameMap::temporal(d, None).unwrap(),
        ];
        for seed in 0..10 {
            let r = random_density_matrix::<f64>(16, seed);
            for m in &maps {
                let lhs = m.apply_mat(commutator(h.as_mat(), r.as_mat()).as_ref()).unwrap();
                let rhs = commutator(h.as_mat(), m.apply(&r).unwrap().as_mat());
                assert!(max_abs_diff(lhs.as_ref(), rhs.as_ref()) < 1e-10, "{}", m.kind());
            }
        }
    }

    #[test]
    fn conjugated_perturbation_identities() {
        let (l, h, t) = chain(3, Model::FreeSpins { h: 1.0 });
        let s = thermal_state(&h, 1.0).unwrap();
        let u = local_kick(&l, &PerturbationSpec::default_kick()).unwrap();
        let cp = conjugated_perturbation(&s, &u).unwrap();
        assert!((cp.normalization(s.rho()).unwrap() - 1.0).abs() < 1e-12);
        // E = rho^{-1/2} rho' rho^{-1/2}
        let rp = perturb(&s, &u).unwrap();
        let inv: Vec<f64> = s.populations().iter().map(|p| 1.0 / p.sqrt()).collect();
        let r = s.hamiltonian_decomp().reconstruct_with(&inv);
        let direct = &(r.as_mat() * rp.as_mat()) * r.as_mat();
        assert!(max_abs_diff(cp.e.as_mat(), direct.as_ref()) < 1e-8);
        let m = FrameMap::uniform(&t, 3).unwrap();
        let dev = averaged_e_deviation(&cp, &m, s.rho()).unwrap();
        assert!((dev.normalization - 1.0).abs() < 1e-12);
        assert!(dev.op_norm > 0.0 && dev.frobenius >= dev.op_norm);
        // BS entropy of M rho' equals -tr[rho eta(M E)]
        let mrp = m.apply(&rp).unwrap();
        let bs = bs_relative_entropy(&mrp, s.rho()).unwrap().nats;
        let me = m.apply_hermitian(&cp.e).unwrap();
        let chain_value = crate::entropy::trace_rho_eta(s.rho(), &me).unwrap();
        assert!((bs + chain_value).abs() < 1e-10);
    }

    #[test]
    fn trivial_conjugations() {
        let (l, h, t) = chain(3, TFIM);
        let m = FrameMap::uniform(&t, 3).unwrap();
        let s = thermal_state(&h, 1.0).unwrap();
        let cp = conjugated_perturbation(&s, &UnitaryOperator::identity(8)).unwrap();
        assert!(max_abs_diff_identity(cp.e.as_mat()) < 1e-12);
        assert!(averaged_e_deviation(&cp, &m, s.rho()).unwrap().op_norm < 1e-12);
        let s0 = thermal_state(&h, 0.0).unwrap();
        let u = local_kick(&l, &PerturbationSpec::default_kick()).unwrap();
        let cp0 = conjugated_perturbation(&s0, &u).unwrap();
        assert!(max_abs_diff(cp0.u.as_mat(), u.to_dense().as_mat()) < 1e-15);
        assert!(averaged_e_deviation(&cp0, &m, s0.rho()).unwrap().op_norm < 1e-14);
    }

    #[test]
    fn overflow_is_reported() {
        let (l, h, _) = chain(3, TFIM);
        let s = thermal_state(&h, 300.0).unwrap();
        let u = local_kick(&l, &PerturbationSpec::default_kick()).unwrap();
        assert!(matches!(conjugated_perturbation(&s, &u), Err(Error::Overflow { .. })));
    }
}
