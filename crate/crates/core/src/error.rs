use thiserror::Error;

use crate::spectral::Rank;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("incompatible lattices: (M = {m_a}, h = {h_a}) vs (M = {m_b}, h = {h_b})")]
    IncompatibleLattice { m_a: usize, h_a: f64, m_b: usize, h_b: f64 },

    #[error("rank mismatch: expected {expected:?}, got {got:?}")]
    RankMismatch { expected: Rank, got: Rank },

    #[error("non-finite amplitude: {0}")]
    NonFinite(String),

    #[error("spectrum overflow: {0}")]
    SpectrumOverflow(String),

    #[error("partition: {0}")]
    Partition(String),

    #[error("empty probe support: {0}")]
    EmptyProbe(String),

    #[error("quadrature needs M <= {max}, got M = {m}")]
    QuadratureTooLarge { m: usize, max: usize },

    #[error("shells not disjoint: {0}")]
    ShellsNotDisjoint(String),

    #[error("translation collision: {0}")]
    TranslationCollision(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
