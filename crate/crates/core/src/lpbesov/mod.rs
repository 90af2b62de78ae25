//! Littlewood-Paley shells, probe bumps, homogeneous Besov norms and the Bony split.

pub(crate) mod besov;
mod bony;
mod partition;
mod probe;
mod profile;

pub use besov::{aggregate, besov_norm, lp_norm, shell_profile, BesovIndex, ShellEntry, ShellProfile};
pub use bony::BonySplit;
pub use partition::DyadicPartition;
pub use probe::{ProbeFunction, DEFAULT_PROBE_DIRECTION, DEFAULT_PROBE_GAP};
pub use profile::{smooth_step, CutProfile};
