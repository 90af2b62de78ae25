use serde::{Deserialize, Serialize};

use crate::bilinear::bee_block;
use crate::error::{Error, Result};
use crate::lpbesov::{BesovIndex, DyadicPartition};
use crate::random::{random_field, random_packets, PacketEnsemble, SpectralEnvelope};
use crate::spectral::{inverse_laplacian, FrequencyLattice};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantsConfig {
    pub samples: usize,
    /// Solution-space index; the data index sits two derivatives lower.
    pub index: BesovIndex,
    pub seed: u64,
    /// Radial band of the sampled fields.
    pub band: (f64, f64),
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            index: BesovIndex::solution(4.0, 2.0).expect("valid index"),
            seed: 0,
            band: (0.5, 4.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c0: f64,
    pub c1: f64,
    pub delta0: f64,
    pub eps0: f64,
    pub samples: usize,
    pub index: BesovIndex,
    pub seed: u64,
    pub band: (f64, f64),
    pub lattice: FrequencyLattice,
}

impl ConstantsReport {
    pub fn from_constants(c0: f64, c1: f64, cfg: &ConstantsConfig, lattice: FrequencyLattice) -> Self {
        Self {
            c0,
            c1,
            delta0: 1.0 / (8.0 * c0 * c1),
            eps0: 1.0 / (4.0 * c1),
            samples: cfg.samples,
            index: cfg.index,
            seed: cfg.seed,
            band: cfg.band,
            lattice,
        }
    }
}

/// Sampled lower bounds for the linear and bilinear operator norms.
///
/// `C0` maximizes `||L f|| / ||f||` over single-shell fields cycling through the shells of
/// the band; `C1` maximizes `||B[f, g]|| / (||f|| ||g||)` over pairs of wave-packet fields
/// with carriers in the band, localized in a fixed physical disc so that the sample does not
/// depend on the box size.
pub fn estimate_constants(lattice: FrequencyLattice, cfg: &ConstantsConfig) -> Result<ConstantsReport> {
    if cfg.samples < 50 {
        return Err(Error::InvalidParameter(format!(
            "at least 50 samples are required, got {}",
            cfg.samples
        )));
    }
    cfg.index.validate()?;
    let (lo, hi) = cfg.band;
    if !(lo > 0.0 && hi > lo && hi <= lattice.nyquist()) {
        return Err(Error::InvalidParameter(format!(
            "sampling band [{lo}, {hi}] must be positive and below the Nyquist frequency {}",
            lattice.nyquist()
        )));
    }
    let part = DyadicPartition::for_lattice(lattice);
    let sol = cfg.index;
    let data = sol.data_companion();
    let ens = PacketEnsemble::critical(lo, hi, sol.s);
    ens.check_fits(&lattice)?;

    let j_lo = lo.log2().ceil() as i32;
    let j_hi = (hi.log2().floor() as i32).max(j_lo);
    let shells: Vec<i32> = (j_lo..=j_hi).filter(|j| part.shells().contains(j)).collect();
    if shells.is_empty() {
        return Err(Error::InvalidParameter(format!("band [{lo}, {hi}] meets no shell")));
    }
    let mut c0: f64 = 0.0;
    for i in 0..cfg.samples {
        let j = shells[i % shells.len()];
        let env = SpectralEnvelope::band(2f64.powi(j - 1), 2f64.powi(j + 1));
        let f = part.shell_project(&random_field(lattice, &env, cfg.seed, 2 * i as u64)?, j)?;
        let ratio = part.besov_norm(&inverse_laplacian(&f)?, sol)? / part.besov_norm(&f, data)?;
        c0 = c0.max(ratio);
    }

    let mut c1: f64 = 0.0;
    for i in 0..cfg.samples {
        let f = random_packets(lattice, &ens, cfg.seed, 2 * i as u64 + 1)?;
        let g = random_packets(lattice, &ens, cfg.seed.wrapping_add(0x9e37_79b9), 2 * i as u64 + 1)?;
        let ratio = part.besov_norm(&bee_block(&f, &g)?, sol)?
            / (part.besov_norm(&f, sol)? * part.besov_norm(&g, sol)?);
        c1 = c1.max(ratio);
    }
    Ok(ConstantsReport::from_constants(c0, c1, cfg, lattice))
}

/// `||B[theta, theta]|| / ||theta||^2` at `index` for `theta = L f` with the Step-1 forcing of size `n`.
///
/// Such pairs concentrate on one high shell, so the ratio is unbounded in `n` when the
/// index lies outside the range where the bilinear estimate holds.
pub fn localized_pair_ratio(lattice: FrequencyLattice, n: i64, delta: f64, index: BesovIndex) -> Result<f64> {
    index.validate()?;
    let part = DyadicPartition::for_lattice(lattice);
    let theta = inverse_laplacian(&crate::illposed::force_step1(lattice, n, delta)?)?;
    let size = part.besov_norm(&theta, index)?;
    Ok(part.besov_norm(&bee_block(&theta, &theta)?, index)? / (size * size))
}
