use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has dimension 0")]
    Empty,

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("operator is not Hermitian: max |A - A^dag| = {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("operator is not unitary: max |U^dag U - 1| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("trace of density matrix is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed to converge (dim {dim}, condition estimate {condition:e})")]
    EigenSolver { dim: usize, condition: f64 },

    #[error("matrix function is not finite at eigenvalue {eigenvalue:e}")]
    Domain { eigenvalue: f64 },

    #[error("site {site} out of range for a chain of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("local operator has dimension {found}, lattice local dimension is {expected}")]
    LocalDimMismatch { expected: usize, found: usize },

    #[error("lattice with N = {sites} sites (d = {local_dim}) has dimension {dim}, above the limit {max}")]
    LatticeTooLarge { sites: usize, local_dim: usize, dim: u128, max: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("unknown Hamiltonian model `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` requires coupling `{coupling}`")]
    MissingCoupling { model: String, coupling: String },

    #[error("model `{model}` has no coupling named `{coupling}`")]
    UnexpectedCoupling { model: String, coupling: String },

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: String, value: f64 },

    #[error("translation is not of order {order}: max |T^N - 1| = {deviation:e}")]
    NotOfOrder { order: usize, deviation: f64 },

    #[error("spatial averages in the energy basis need a Hamiltonian diagonalized by translation sectors of order {order}")]
    MissingSymmetry { order: usize },

    #[error("exp(beta H / 2) overflows: beta * spectral radius = {exponent}; use a smaller beta or N")]
    Overflow { exponent: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
