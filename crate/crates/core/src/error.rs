use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty basis")]
    EmptyBasis,

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unknown link {0} in tunneling map")]
    UnknownLink(usize),

    #[error("infinite energy state in basis; use fermionic statistics or finite U")]
    InfiniteEnergy,

    #[error("sector incompatible with single occupancy: {0}")]
    NoSingleOccupancy(String),

    #[error("spin map requires single-occupancy states: {0}")]
    SpinMap(String),

    #[error("degenerate intermediate state {index} (E = 0 outside the single-occupancy subspace)")]
    DegenerateIntermediate { index: usize },

    #[error("tunneling has nonzero matrix elements inside the single-occupancy subspace (max {0:e})")]
    TunnelingInsideModelSpace(f64),

    #[error("interaction strength must be finite and nonzero: {0}")]
    InvalidInteraction(String),

    #[error("complex-coupling formulas require purely imaginary J")]
    NotPurelyImaginary,

    #[error("formula requires {0}")]
    FormulaPrecondition(String),

    #[error("fast block not invertible; parameters too close to resonance (condition number {0:e})")]
    FastBlockSingular(f64),

    #[error("Neumann series does not converge: |V_FF| = {v_ff:e} >= min |E_F| = {gap:e}")]
    SeriesDiverges { v_ff: f64, gap: f64 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension {0} exceeds the dense diagonalization budget")]
    TooLarge(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("family mismatch: {0}")]
    Family(String),

    #[error("invalid chain parameters: {0}")]
    Chain(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
