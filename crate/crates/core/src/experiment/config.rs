use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::illposed::ExponentMap;
use crate::lpbesov::{BesovIndex, DEFAULT_PROBE_GAP};
use crate::solver::SolveConfig;
use crate::spectral::FrequencyLattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PartitionCheck,
    VerifyIdentity,
    Constants,
    Solve,
    IllposeStep1,
    IllposeStep2,
    IllposeStep3,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::PartitionCheck,
        ExperimentKind::VerifyIdentity,
        ExperimentKind::Constants,
        ExperimentKind::Solve,
        ExperimentKind::IllposeStep1,
        ExperimentKind::IllposeStep2,
        ExperimentKind::IllposeStep3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PartitionCheck => "partition-check",
            ExperimentKind::VerifyIdentity => "verify-identity",
            ExperimentKind::Constants => "constants",
            ExperimentKind::Solve => "solve",
            ExperimentKind::IllposeStep1 => "illpose-step1",
            ExperimentKind::IllposeStep2 => "illpose-step2",
            ExperimentKind::IllposeStep3 => "illpose-step3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn default_lattice(self) -> LatticeConfig {
        let (m, spacing) = match self {
            ExperimentKind::PartitionCheck => (64, 0.25),
            ExperimentKind::VerifyIdentity => (32, 0.5),
            ExperimentKind::Constants | ExperimentKind::Solve => (64, 0.25),
            ExperimentKind::IllposeStep1 | ExperimentKind::IllposeStep2 | ExperimentKind::IllposeStep3 => {
                (2048, 0.25)
            }
        };
        LatticeConfig { m, spacing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub m: usize,
    pub spacing: f64,
}

impl LatticeConfig {
    pub fn build(&self) -> Result<FrequencyLattice> {
        FrequencyLattice::new(self.m, self.spacing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionCheckParams {
    /// Radial samples per shell for the pointwise checks.
    pub radial_samples: usize,
    pub tol: f64,
}

impl Default for PartitionCheckParams {
    fn default() -> Self {
        Self {
            radial_samples: 4000,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyIdentityParams {
    pub samples: usize,
    pub tol: f64,
    /// Radial band of the random fields; the whole lattice when absent.
    pub band: Option<(f64, f64)>,
    pub closed_form_tol: f64,
}

impl Default for VerifyIdentityParams {
    fn default() -> Self {
        Self {
            samples: 50,
            tol: 1e-10,
            band: None,
            closed_form_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizedParams {
    pub lattice: LatticeConfig,
    pub n: Vec<i64>,
    pub delta: f64,
    pub index: BesovIndex,
    pub min_growth: f64,
}

impl Default for LocalizedParams {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig { m: 512, spacing: 0.25 },
            n: vec![3, 4, 5],
            delta: 0.01,
            index: BesovIndex::solution(8.0, 2.0).expect("valid index"),
            min_growth: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsParams {
    pub samples: usize,
    pub index: BesovIndex,
    pub band: (f64, f64),
    /// Repeat on the lattice with twice the points and half the spacing.
    pub refine: bool,
    pub refine_tol: f64,
    pub localized: Option<LocalizedParams>,
}

impl Default for ConstantsParams {
    fn default() -> Self {
        Self {
            samples: 200,
            index: BesovIndex::solution(4.0, 2.0).expect("valid index"),
            band: (0.5, 4.0),
            refine: true,
            refine_tol: 0.10,
            localized: Some(LocalizedParams::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredConstants {
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    pub solver: SolveConfig,
    /// Data norm of `f` as a fraction of `delta0`.
    pub data_fraction: f64,
    pub band: (f64, f64),
    /// Skip sampling and use these constants.
    pub constants: Option<MeasuredConstants>,
    pub constants_samples: usize,
    /// Norm of the second start as a fraction of `eps0`.
    pub start_fraction: f64,
    /// Weight of the fresh random part in the perturbed data.
    pub perturbation_mix: f64,
    pub ratio_bound: f64,
    pub ratio_from: usize,
    pub residual_tol: f64,
    pub agreement_tol: f64,
    pub lipschitz_slack: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            solver: SolveConfig::default(),
            data_fraction: 0.5,
            band: (0.5, 4.0),
            constants: None,
            constants_samples: 200,
            start_fraction: 0.5,
            perturbation_mix: 0.2,
            ratio_bound: 0.55,
            ratio_from: 2,
            residual_tol: 1e-9,
            agreement_tol: 1e-9,
            lipschitz_slack: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomogeneityParams {
    pub n: i64,
    pub deltas: Vec<f64>,
    pub tol: f64,
}

impl Default for HomogeneityParams {
    fn default() -> Self {
        Self {
            n: 4,
            deltas: vec![0.01, 0.005],
            tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step1Params {
    pub delta: f64,
    pub n: Vec<i64>,
    pub p: f64,
    pub q: f64,
    /// Shells of the low-frequency bound; `[j_min, -1]` when absent.
    pub lowfreq_range: Option<(i32, i32)>,
    pub perturbation: bool,
    pub solver: SolveConfig,
    pub data_ratio_tol: f64,
    pub c_variation: f64,
    pub perturbation_bound: f64,
    pub homogeneity: Option<HomogeneityParams>,
    /// Probe radius of the split; lattice points in the open first quadrant up to it.
    pub split_radius: Option<f64>,
    pub split_tol: f64,
    pub remainder_tol: f64,
}

impl Default for Step1Params {
    fn default() -> Self {
        Self {
            delta: 0.01,
            n: vec![4, 5, 6, 7],
            p: 8.0,
            q: 2.0,
            lowfreq_range: None,
            perturbation: true,
            solver: SolveConfig::default(),
            data_ratio_tol: 0.10,
            c_variation: 0.25,
            perturbation_bound: 0.2,
            homogeneity: Some(HomogeneityParams::default()),
            split_radius: Some(1.0),
            split_tol: 1e-10,
            remainder_tol: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step2Sweep {
    pub n: i64,
    pub range: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step2Params {
    pub delta: f64,
    pub exponent_map: ExponentMap,
    pub sweeps: Vec<Step2Sweep>,
    pub qs: Vec<f64>,
    pub split_radius: f64,
    pub split_tol: f64,
    /// Allowed spread `max / min - 1` of the `q = 2` data norm over the sweep.
    pub q2_spread: f64,
}

impl Default for Step2Params {
    fn default() -> Self {
        Self {
            delta: 0.01,
            exponent_map: ExponentMap::Affine { scale: 2, offset: 1 },
            sweeps: vec![
                Step2Sweep { n: 2, range: (1, 1) },
                Step2Sweep { n: 3, range: (1, 2) },
                Step2Sweep { n: 4, range: (1, 3) },
            ],
            qs: vec![2.0, 4.0, f64::INFINITY],
            split_radius: 1.0,
            split_tol: 1e-10,
            q2_spread: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step3Params {
    pub delta: f64,
    /// Size parameter entering the amplitude.
    pub n: i64,
    pub exponent_map: ExponentMap,
    /// First block index; block counts extend the range upwards.
    pub first_block: i64,
    pub block_counts: Vec<i64>,
    /// Carrier exponent minus the top block shell.
    pub carrier_gap: i64,
    pub translation: [i64; 2],
    pub tolerance: f64,
    pub separation: f64,
    pub probe_gap: u32,
    pub qs: Vec<f64>,
    pub l1l2_tol: f64,
    pub l4_tol: f64,
}

impl Default for Step3Params {
    fn default() -> Self {
        Self {
            delta: 0.01,
            n: 16,
            exponent_map: ExponentMap::Affine { scale: 1, offset: 0 },
            first_block: 0,
            block_counts: vec![2, 4, 8],
            carrier_gap: 3,
            translation: [2, 1],
            tolerance: 0.05,
            separation: 1.0,
            probe_gap: DEFAULT_PROBE_GAP,
            qs: vec![1.0, 2.0, f64::INFINITY],
            l1l2_tol: 0.3,
            l4_tol: 0.1,
        }
    }
}

fn default_memory() -> u64 {
    4096
}

/// One experiment: which pipeline, on which lattice, with which parameters.
///
/// Only the section of the chosen experiment is read; the resolved config echoed into a
/// report carries the lattice and that section with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Abort before computing when the estimated peak memory exceeds this many MiB.
    #[serde(default = "default_memory")]
    pub max_memory_mb: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_check: Option<PartitionCheckParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_identity: Option<VerifyIdentityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step1: Option<Step1Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2: Option<Step2Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step3: Option<Step3Params>,
}

impl ExperimentConfig {
    /// Config with every default for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: kind,
            seed: 0,
            lattice: None,
            output_dir: None,
            max_memory_mb: default_memory(),
            partition_check: None,
            verify_identity: None,
            constants: None,
            solve: None,
            step1: None,
            step2: None,
            step3: None,
        }
        .resolved()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Lattice filled in and only the chosen experiment's section kept, with defaults.
    pub fn resolved(&self) -> Self {
        let kind = self.experiment;
        let mut out = Self {
            experiment: kind,
            seed: self.seed,
            lattice: Some(self.lattice.unwrap_or_else(|| kind.default_lattice())),
            output_dir: self.output_dir.clone(),
            max_memory_mb: self.max_memory_mb,
            partition_check: None,
            verify_identity: None,
            constants: None,
            solve: None,
            step1: None,
            step2: None,
            step3: None,
        };
        match kind {
            ExperimentKind::PartitionCheck => {
                out.partition_check = Some(self.partition_check.clone().unwrap_or_default())
            }
            ExperimentKind::VerifyIdentity => {
                out.verify_identity = Some(self.verify_identity.clone().unwrap_or_default())
            }
            ExperimentKind::Constants => out.constants = Some(self.constants.clone().unwrap_or_default()),
            ExperimentKind::Solve => out.solve = Some(self.solve.clone().unwrap_or_default()),
            ExperimentKind::IllposeStep1 => out.step1 = Some(self.step1.clone().unwrap_or_default()),
            ExperimentKind::IllposeStep2 => out.step2 = Some(self.step2.clone().unwrap_or_default()),
            ExperimentKind::IllposeStep3 => out.step3 = Some(self.step3.clone().unwrap_or_default()),
        }
        out
    }

    pub fn lattice(&self) -> LatticeConfig {
        self.lattice.unwrap_or_else(|| self.experiment.default_lattice())
    }
}
