use serde::{Deserialize, Serialize};

use super::besov::field_lp_norm;
use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::spectral::{Rank, SpectralField};

/// Frequency bump around `2^j a` of radius `2^{j-gap}`, reproduced by shell `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeFunction {
    partition: DyadicPartition,
    pub j: i32,
    pub gap: u32,
    pub direction: [f64; 2],
}

pub const DEFAULT_PROBE_GAP: u32 = 3;
pub const DEFAULT_PROBE_DIRECTION: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

impl ProbeFunction {
    pub fn new(partition: DyadicPartition, j: i32, gap: u32, direction: [f64; 2]) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probe direction must be a unit vector, got |a| = {norm}"
            )));
        }
        let prof = partition.profile();
        // Support radius is (upper / 2) 2^{j - gap}; it must sit on the plateau of phi_j.
        let r = prof.upper / 2.0 * 2f64.powi(-(gap as i32));
        if 1.0 - r < prof.upper / 2.0 || 1.0 + r > prof.lower {
            return Err(Error::InvalidParameter(format!(
                "probe gap {gap} leaves the plateau of shell {j}; use a gap of at least 3"
            )));
        }
        let probe = Self {
            partition,
            j,
            gap,
            direction,
        };
        let lat = partition.lattice();
        let any = (0..lat.len()).any(|idx| probe.hat(lat.frequency(idx)) > 0.0);
        if !any {
            return Err(Error::EmptyProbe(format!(
                "probe at shell {j} with gap {gap} has no lattice point (radius {:.3e}, spacing {}); use a smaller gap or finer spacing",
                2f64.powi(j - gap as i32),
                lat.spacing()
            )));
        }
        Ok(probe)
    }

    pub fn with_defaults(partition: DyadicPartition, j: i32) -> Result<Self> {
        Self::new(partition, j, DEFAULT_PROBE_GAP, DEFAULT_PROBE_DIRECTION)
    }

    pub fn center(&self) -> [f64; 2] {
        let c = 2f64.powi(self.j);
        [c * self.direction[0], c * self.direction[1]]
    }

    /// Closed form `sigma(2^{gap+1-j} |xi - 2^j a|)`.
    pub fn hat(&self, xi: [f64; 2]) -> f64 {
        let c = self.center();
        let d = (xi[0] - c[0]).hypot(xi[1] - c[1]);
        self.partition.sigma(2f64.powi(self.gap as i32 + 1 - self.j) * d)
    }

    /// Definitional form `1 - sum_{k >= j - gap} phi_k(xi - 2^j a)`.
    pub fn hat_definitional(&self, xi: [f64; 2]) -> f64 {
        let c = self.center();
        let d = (xi[0] - c[0]).hypot(xi[1] - c[1]);
        if d == 0.0 {
            return 1.0;
        }
        let k_top = d.log2().ceil() as i32 + 2;
        let k_lo = self.j - self.gap as i32;
        let sum: f64 = (k_lo..=k_top.max(k_lo)).map(|k| self.partition.phi_hat(k, d)).sum();
        1.0 - sum
    }

    /// `psi_j * f`; complex valued in physical space.
    pub fn project(&self, f: &SpectralField) -> Result<SpectralField> {
        self.partition.lattice().check_same(f.lattice())?;
        f.expect_rank(Rank::Scalar)?;
        let lat = *f.lattice();
        Ok(f.map_coefficients(|idx, c| c * self.hat(lat.frequency(idx))))
    }

    /// `||psi_j * f||_p` by physical quadrature of the complex projection.
    pub fn projected_lp_norm(&self, f: &SpectralField, p: f64) -> Result<f64> {
        Ok(field_lp_norm(&self.project(f)?, p))
    }
}
