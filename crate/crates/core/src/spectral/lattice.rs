use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square frequency grid `h * (k1, k2)`, `k_i in [-M/2, M/2)`, standing in for the plane.
///
/// Storage order is FFT order: flat index `i1 * M + i2` with `k = i` for `i < M/2`
/// and `k = i - M` otherwise. The first index runs along `xi_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    m: usize,
    spacing: f64,
}

impl FrequencyLattice {
    pub fn new(m: usize, spacing: f64) -> Result<Self> {
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidLattice(format!(
                "M must be a power of two >= 8, got {m}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        Ok(Self { m, spacing })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Physical box side `L = 2 pi / h`.
    pub fn box_side(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// Nyquist frequency `h * M / 2`.
    pub fn nyquist(&self) -> f64 {
        self.spacing * (self.m / 2) as f64
    }

    /// Quadrature weight `(L / M)^2` of one physical sample.
    pub fn cell_area(&self) -> f64 {
        let dx = self.box_side() / self.m as f64;
        dx * dx
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed wavenumber of storage index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let half = self.m / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.m as i64
        }
    }

    /// Storage index of a signed wavenumber, if it lies in the box.
    pub fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.m / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.m as i64) as usize)
        }
    }

    /// Flat index of `(k1, k2)`, if inside the box.
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        Some(self.axis_index(k[0])? * self.m + self.axis_index(k[1])?)
    }

    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        [self.wavenumber(idx / self.m), self.wavenumber(idx % self.m)]
    }

    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let k = self.wavevector(idx);
        [self.spacing * k[0] as f64, self.spacing * k[1] as f64]
    }

    /// False on the Nyquist lines `k_i = -M/2`, which carry no content.
    pub fn is_interior(&self, k: [i64; 2]) -> bool {
        let half = (self.m / 2) as i64;
        k[0] > -half && k[0] < half && k[1] > -half && k[1] < half
    }

    /// Integer wavenumber of a frequency that sits on the lattice.
    pub fn wavenumber_of(&self, xi: f64) -> Option<i64> {
        let k = (xi / self.spacing).round();
        if ((k * self.spacing) - xi).abs() <= 1e-9 * self.spacing.max(xi.abs()) {
            Some(k as i64)
        } else {
            None
        }
    }

    /// Largest modulus of an interior lattice frequency.
    pub fn max_modulus(&self) -> f64 {
        self.spacing * ((self.m / 2 - 1) as f64) * 2f64.sqrt()
    }

    pub(crate) fn check_same(&self, other: &FrequencyLattice) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IncompatibleLattice {
                m_a: self.m,
                h_a: self.spacing,
                m_b: other.m,
                h_b: other.spacing,
            })
        }
    }

    /// Same point count, spacing multiplied by `2^m`.
    pub fn dyadic(&self, m: i32) -> FrequencyLattice {
        FrequencyLattice {
            m: self.m,
            spacing: self.spacing * 2f64.powi(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(FrequencyLattice::new(4, 1.0).is_err());
        assert!(FrequencyLattice::new(48, 1.0).is_err());
        assert!(FrequencyLattice::new(64, 0.0).is_err());
        assert!(FrequencyLattice::new(64, f64::NAN).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let lat = FrequencyLattice::new(16, 0.5).unwrap();
        for idx in 0..lat.len() {
            assert_eq!(lat.index_of(lat.wavevector(idx)), Some(idx));
        }
        assert_eq!(lat.index_of([8, 0]), None);
        assert_eq!(lat.index_of([-8, 0]), Some(8 * 16));
        assert!(!lat.is_interior([-8, 0]));
    }

    #[test]
    fn derived_quantities() {
        let lat = FrequencyLattice::new(1024, 0.125).unwrap();
        assert_eq!(lat.nyquist(), 64.0);
        assert!((lat.box_side() - 16.0 * PI).abs() < 1e-12);
        assert_eq!(lat.wavenumber_of(1.0), Some(8));
        assert_eq!(lat.wavenumber_of(0.1), None);
    }
}
