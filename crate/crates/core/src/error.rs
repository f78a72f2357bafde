use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Monomer data violates one of its invariants.
    #[error("invalid monomer model: {0}")]
    InvalidModel(String),

    /// Aggregate parameters (N, J, linewidths) are out of range.
    #[error("invalid aggregate config: {0}")]
    InvalidConfig(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    /// A sector index outside `0..=max_sector` was requested.
    #[error("sector k = {k} is outside 0..={max}")]
    SectorOutOfRange { k: usize, max: usize },

    #[error("state {0} is not part of this manifold")]
    StateNotFound(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A shifted block `omega - H_k + i Gamma_k` could not be inverted.
    #[error("singular block in sector {sector} at omega = {omega} eV")]
    SingularBlock { sector: usize, omega: f64 },

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
}
