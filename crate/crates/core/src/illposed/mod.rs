//! Forcings that drive the solution map out of continuity, and the diagnostics that
//! expose it: second-iterate splits, low-frequency lower bounds and inflation profiles.

mod diagnostics;
mod forcing;
mod spec;

pub use diagnostics::{
    inflation_profile, iterate2_split, lowfreq_lower_bound, modulated_data_norm, modulated_second_iterate,
    InflationEntry, InflationReport, LowFrequencyBound, SplitTriple,
};
pub use forcing::{
    build_forcing, calibrate_r, chi_bump, chi_hat, force_step1, force_step2, force_step3, physical_lp,
    step3_amplitude, step3_envelope, translation_axis, Calibration, ModulatedForce, Step3Force, DEFAULT_SEPARATION,
};
pub use spec::{ExponentMap, ForceSpec, ForceVariant};
