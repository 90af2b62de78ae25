use serde::{Deserialize, Serialize};

use super::profile::CutProfile;
use crate::error::{Error, Result};
use crate::spectral::{FrequencyLattice, SpectralField};

/// Dyadic family `phi_j(xi) = sigma(2^-j |xi|) - sigma(2^{1-j} |xi|)` over a shell window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    lattice: FrequencyLattice,
    profile: CutProfile,
    j_min: i32,
    j_max: i32,
}

impl DyadicPartition {
    /// Window chosen so the shells sum to one at every nonzero lattice frequency.
    pub fn new(lattice: FrequencyLattice, profile: CutProfile) -> Result<Self> {
        let profile = CutProfile::new(profile.lower, profile.upper)?;
        let h = lattice.spacing();
        let j_min = (2.0 * h / profile.upper).log2().floor() as i32;
        let j_max = (lattice.max_modulus() / profile.lower).log2().ceil() as i32;
        Self::with_window(lattice, profile, j_min, j_max)
    }

    pub fn with_window(
        lattice: FrequencyLattice,
        profile: CutProfile,
        j_min: i32,
        j_max: i32,
    ) -> Result<Self> {
        let profile = CutProfile::new(profile.lower, profile.upper)?;
        if j_max < j_min {
            return Err(Error::Partition(format!(
                "lattice registers no shell: j_max = {j_max} < j_min = {j_min}"
            )));
        }
        Ok(Self {
            lattice,
            profile,
            j_min,
            j_max,
        })
    }

    pub fn for_lattice(lattice: FrequencyLattice) -> Self {
        Self::new(lattice, CutProfile::default()).expect("default profile is admissible")
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn profile(&self) -> CutProfile {
        self.profile
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn sigma(&self, r: f64) -> f64 {
        self.profile.sigma(r)
    }

    pub fn phi_hat(&self, j: i32, r: f64) -> f64 {
        self.sigma(r * 2f64.powi(-j)) - self.sigma(r * 2f64.powi(1 - j))
    }

    /// Sum of the window's shells at radius `r`.
    pub fn partition_sum(&self, r: f64) -> f64 {
        self.shells().map(|j| self.phi_hat(j, r)).sum()
    }

    /// Radii on which the window's shells sum to one exactly.
    pub fn covered_annulus(&self) -> (f64, f64) {
        (
            self.profile.upper * 2f64.powi(self.j_min - 1),
            self.profile.lower * 2f64.powi(self.j_max),
        )
    }

    fn check_shell(&self, j: i32) -> Result<()> {
        if self.shells().contains(&j) {
            Ok(())
        } else {
            Err(Error::Partition(format!(
                "shell {j} outside window [{}, {}]",
                self.j_min, self.j_max
            )))
        }
    }

    /// Coefficientwise product with `phi_j`, every component.
    pub fn shell_project(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.lattice.check_same(f.lattice())?;
        self.check_shell(j)?;
        let lat = self.lattice;
        Ok(f.map_coefficients(|idx, c| {
            if c == Default::default() {
                return c;
            }
            let xi = lat.frequency(idx);
            c * self.phi_hat(j, xi[0].hypot(xi[1]))
        }))
    }

    /// True when some active coefficient of `f` meets the support of `phi_j`.
    pub fn shell_is_active(&self, f: &SpectralField, j: i32) -> bool {
        let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j + 1));
        let lat = f.lattice();
        let len = lat.len();
        f.coefficients().iter().enumerate().any(|(i, c)| {
            if *c == Default::default() {
                return false;
            }
            let xi = lat.frequency(i % len);
            let r = xi[0].hypot(xi[1]);
            r > lo && r < hi
        })
    }

    /// Fraction of coefficient energy not reproduced by the window's shells.
    pub fn out_of_window_fraction(&self, f: &SpectralField) -> f64 {
        let lat = f.lattice();
        let len = lat.len();
        let (mut total, mut missing) = (0.0, 0.0);
        for (i, c) in f.coefficients().iter().enumerate() {
            let e = c.norm_sqr();
            if e == 0.0 {
                continue;
            }
            let xi = lat.frequency(i % len);
            let r = xi[0].hypot(xi[1]);
            total += e;
            // The shells telescope to sigma(2^{-j_max} r) - sigma(2^{1 - j_min} r).
            let w = if r == 0.0 {
                0.0
            } else {
                self.sigma(r * 2f64.powi(-self.j_max)) - self.sigma(r * 2f64.powi(1 - self.j_min))
            };
            missing += e * (1.0 - w) * (1.0 - w);
        }
        if total == 0.0 {
            0.0
        } else {
            missing / total
        }
    }

    /// Table of `(r, phi_j(r) for each shell)` on `samples` radii up to the covered edge.
    pub fn profile_table(&self, samples: usize) -> Vec<(f64, Vec<f64>)> {
        let (_, hi) = self.covered_annulus();
        let r_top = hi * 1.1;
        (0..=samples)
            .map(|i| {
                let r = r_top * i as f64 / samples.max(1) as f64;
                (r, self.shells().map(|j| self.phi_hat(j, r)).collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part() -> DyadicPartition {
        DyadicPartition::for_lattice(FrequencyLattice::new(256, 0.125).unwrap())
    }

    #[test]
    fn base_shell_values() {
        let p = part();
        assert_eq!(p.phi_hat(0, 1.0), 1.0);
        assert_eq!(p.phi_hat(0, 0.625), 0.0);
        assert_eq!(p.phi_hat(-1, 0.625), 1.0);
        assert_eq!(p.phi_hat(0, 0.45), 0.0);
        assert_eq!(p.phi_hat(0, 2.1), 0.0);
        assert_eq!(p.phi_hat(0, 0.875), 1.0);
        assert_eq!(p.phi_hat(0, 1.25), 1.0);
    }

    #[test]
    fn window_covers_lattice() {
        let p = part();
        let (lo, hi) = p.covered_annulus();
        assert!(lo <= 0.125);
        assert!(hi >= p.lattice().max_modulus());
        assert!(DyadicPartition::with_window(*p.lattice(), CutProfile::default(), 3, 2).is_err());
    }
}
