//! Entropy functionals in nats: von Neumann, Umegaki relative entropy,
//! Belavkin-Staszewski relative entropy.

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::operator::{
    usable_symmetry,
    check_dims, eigenvalue_floor, spectral_decompose, spectral_values, DensityMatrix, HermitianOperator,
};
use crate::scalar::Real;
use crate::thermo::ThermalState;

/// Weight of `sigma` on the kernel of `rho` above which `S(sigma|rho) = +inf`.
pub const SUPPORT_TOL: f64 = 1e-10;

/// An entropy in nats, or `+inf` when the support condition fails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue<T> {
    pub nats: T,
    pub support_violation: bool,
}

impl<T: Real> EntropyValue<T> {
    pub fn finite(nats: T) -> Self {
        Self { nats, support_violation: false }
    }

    pub fn infinite() -> Self {
        Self { nats: T::zero(), support_violation: true }
    }

    pub fn is_finite(&self) -> bool {
        !self.support_violation
    }

    /// `None` for `+inf`.
    pub fn value(&self) -> Option<T> {
        (!self.support_violation).then_some(self.nats)
    }

    /// Value as `f64`, with `+inf` mapped to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        if self.support_violation {
            f64::INFINITY
        } else {
            self.nats.to_f64()
        }
    }
}

impl<T: Real> fmt::Display for EntropyValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support_violation {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.nats)
        }
    }
}

/// `eta(s) = -s ln s`, `eta(0) = 0`.
pub fn eta<T: Real>(s: T) -> T {
    if s <= T::zero() {
        T::zero()
    } else {
        -s * s.ln()
    }
}

/// `-sum p ln p` of a spectrum, entries below the relative floor counted as 0.
pub fn spectrum_entropy<T: Real>(values: &[T]) -> T {
    let floor = eigenvalue_floor(values);
    values.iter().filter(|&&p| p >= floor).fold(T::zero(), |acc, &p| acc + eta(p))
}

pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<EntropyValue<T>> {
    let values = spectral_values(rho.as_operator())?;
    Ok(EntropyValue::finite(spectrum_entropy(&values)))
}

/// `tr[sigma (log sigma - log rho)]`.
pub fn relative_entropy<T: Real>(sigma: &DensityMatrix<T>, rho: &DensityMatrix<T>) -> Result<EntropyValue<T>> {
    check_dims(rho.dim(), sigma.dim())?;
    let d = spectral_decompose(rho.as_operator())?;
    let floor = d.floor();
    let weights = d.diagonal_weights(sigma.as_mat());
    let mut cross = T::zero();
    let mut leak = T::zero();
    for (&r, &w) in d.eigenvalues().iter().zip(&weights) {
        if r < floor {
            leak = leak + w;
        } else {
            cross = cross + w * r.ln();
        }
    }
    if leak > T::from_f64(SUPPORT_TOL) {
        return Ok(EntropyValue::infinite());
    }
    let s = von_neumann_entropy(sigma)?.nats;
    Ok(EntropyValue::finite(-s - cross))
}

/// `S(sigma|rho_beta) = -S(sigma) + beta tr(H sigma) + log Z`.
pub fn relative_entropy_thermal<T: Real>(
    sigma: &DensityMatrix<T>,
    state: &ThermalState<T>,
) -> Result<EntropyValue<T>> {
    check_dims(state.dim(), sigma.dim())?;
    let s = von_neumann_entropy(sigma)?.nats;
    let energy = state.hamiltonian().trace_product(sigma.as_operator())?;
    Ok(EntropyValue::finite(-s + state.beta() * energy + state.log_partition()))
}

/// `tr[rho eta(x)]` for Hermitian `x`.
pub fn trace_rho_eta<T: Real>(rho: &DensityMatrix<T>, x: &HermitianOperator<T>) -> Result<T> {
    check_dims(rho.dim(), x.dim())?;
    let d = spectral_decompose(x)?;
    let weights = d.diagonal_weights(rho.as_mat());
    Ok(d.eigenvalues().iter().zip(&weights).fold(T::zero(), |acc, (&x, &w)| acc + w * eta(x)))
}

/// `-tr[rho eta(rho^{-1/2} sigma rho^{-1/2})]`.
pub fn bs_relative_entropy<T: Real>(sigma: &DensityMatrix<T>, rho: &DensityMatrix<T>) -> Result<EntropyValue<T>> {
    check_dims(rho.dim(), sigma.dim())?;
    let d = spectral_decompose(rho.as_operator())?;
    if d.min_eigenvalue() < d.floor() {
        return Ok(EntropyValue::infinite());
    }
    let inv_sqrt: Vec<T> = d.eigenvalues().iter().map(|&r| T::one() / r.sqrt()).collect();
    let r = d.reconstruct_with(&inv_sqrt);
    let x = sandwich(&r, sigma.as_operator());
    Ok(EntropyValue::finite(-trace_rho_eta(rho, &x)?))
}

/// [`bs_relative_entropy`] against a thermal state, with
/// `rho^{-1/2} sigma rho^{-1/2} = Z exp(beta H / 2) sigma exp(beta H / 2)`.
pub fn bs_relative_entropy_thermal<T: Real>(
    sigma: &DensityMatrix<T>,
    state: &ThermalState<T>,
) -> Result<EntropyValue<T>> {
    check_dims(state.dim(), sigma.dim())?;
    let (half, center) = state.shifted_exponential(T::from_f64(0.5))?;
    let prefactor = (state.log_partition() + state.beta() * center).exp();
    if !Float::is_finite(prefactor) {
        return Err(Error::Overflow { exponent: (state.log_partition() + state.beta() * center).to_f64() });
    }
    let x = sandwich(&half, sigma.as_operator()).scaled(prefactor);
    Ok(EntropyValue::finite(-trace_rho_eta(state.rho(), &x)?))
}

/// `a b a` for Hermitian `a`, keeping the symmetry hint of `b`.
fn sandwich<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    if let (Some(sa), Some(sb)) = (usable_symmetry(a), usable_symmetry(b)) {
        if Arc::ptr_eq(sa, sb) || sa == sb {
            return HermitianOperator::hermitized(sb.sandwich(a.as_mat(), b.as_mat())).with_symmetry(sb.clone());
        }
    }
    let ab: Mat<_> = a.as_mat() * b.as_mat();
    let mut out = HermitianOperator::hermitized(&ab * a.as_mat());
    if let Some(s) = b.symmetry().or(a.symmetry()) {
        out = out.with_symmetry(s.clone());
    }
    out
}

/// `beta W`.
pub fn thermo_entropy_production<T: Real>(beta: T, work: T) -> T {
    beta * work
}
