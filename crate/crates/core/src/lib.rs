//! Frame-averaging irreversibility maps on finite periodic spin chains.
//!
//! The crate builds thermal states of translation-invariant chain Hamiltonians,
//! perturbs them with a local unitary kick, and averages the result over the
//! translation group (uniformly or with exponential weights) or over time.
//! Entropy functionals (von Neumann, Umegaki and Belavkin-Staszewski relative
//! entropies) are provided to compare the entropy gained by the average with
//! the dissipated work.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases at
//! the crate root fix the precision used by the command-line tools.

pub mod averaging;
pub mod energy;
pub mod entropy;
pub mod error;
pub mod lattice;
pub mod operator;
pub mod scalar;
pub mod thermo;

pub use error::{Error, Result};
pub use scalar::Real;

pub use operator::{
    matrix_function, matrix_function_floored, random_density_matrix, random_unitary,
    spectral_decompose, ComplexMatrix, CyclicSectors, DensityMatrix, HermitianOperator,
    SpectralDecomposition, UnitaryOperator,
};

pub use averaging::{
    averaged_e_deviation, conjugated_perturbation, frame_average, temporal_average, weighted_frame_average,
    AveragingKind, ConjugatedPerturbation, EDeviation, FrameMap,
};
pub use energy::{AveragedKick, EnergyFrame, EnergyKick};
pub use entropy::{
    bs_relative_entropy, bs_relative_entropy_thermal, relative_entropy, relative_entropy_thermal,
    thermo_entropy_production, von_neumann_entropy, EntropyValue,
};
pub use lattice::{
    build_hamiltonian, embed_site_operator, translation_operator, HamiltonianSpec, LatticeSpec, Model,
    SiteOperator,
};
pub use thermo::{local_kick, perturb, thermal_state, work, work_report, PerturbationSpec, ThermalState, WorkReport};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type Hermitian64 = HermitianOperator<f64>;
pub type Unitary64 = UnitaryOperator<f64>;
pub type Density64 = DensityMatrix<f64>;
pub type Spectral64 = SpectralDecomposition<f64>;

pub type Hermitian32 = HermitianOperator<f32>;
pub type Density32 = DensityMatrix<f32>;
pub type Thermal64 = ThermalState<f64>;
pub type FrameMap64 = FrameMap<f64>;
pub type Entropy64 = EntropyValue<f64>;
