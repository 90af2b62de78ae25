//! Frequency lattices, spectral fields, multipliers and dealiased products.

pub(crate) mod fft;
mod field;
mod lattice;
mod multiplier;
mod product;
mod snapshot;

pub use field::{Rank, SpectralField};
pub use lattice::FrequencyLattice;
pub use multiplier::{
    apply_symbol, divergence, dyadic_relocate, dyadic_rescale, inverse_laplacian, riesz_velocity,
    Multiplier, ScalingWeight, SymbolValue,
};
pub use product::multiply;
pub use snapshot::{read_snapshot, write_snapshot};
