use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::Grid;
use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Scalar,
    Vector,
    Tensor,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 2,
            Rank::Tensor => 4,
        }
    }

    pub fn from_components(n: usize) -> Option<Rank> {
        match n {
            1 => Some(Rank::Scalar),
            2 => Some(Rank::Vector),
            4 => Some(Rank::Tensor),
            _ => None,
        }
    }
}

/// Fourier-series amplitudes `f(x) = sum_k c_k e^{i xi_k . x}` on a lattice.
///
/// Components are stored back to back; tensor component `(a, b)` sits at `2a + b`.
/// The continuum transform at a lattice frequency is `c_k * L^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: FrequencyLattice,
    rank: Rank,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: FrequencyLattice, rank: Rank) -> Self {
        Self {
            lattice,
            rank,
            data: vec![Complex64::default(); lattice.len() * rank.components()],
        }
    }

    pub fn from_coefficients(
        lattice: FrequencyLattice,
        rank: Rank,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        let want = lattice.len() * rank.components();
        if data.len() != want {
            return Err(Error::InvalidParameter(format!(
                "expected {want} coefficients, got {}",
                data.len()
            )));
        }
        Ok(Self { lattice, rank, data })
    }

    /// Scalar field with `c_k = g(xi_k, k)` at interior lattice points.
    pub fn from_fn(
        lattice: FrequencyLattice,
        mut g: impl FnMut([f64; 2], [i64; 2]) -> Complex64,
    ) -> Self {
        let data = (0..lattice.len())
            .map(|idx| {
                let k = lattice.wavevector(idx);
                if lattice.is_interior(k) {
                    g(lattice.frequency(idx), k)
                } else {
                    Complex64::default()
                }
            })
            .collect();
        Self {
            lattice,
            rank: Rank::Scalar,
            data,
        }
    }

    /// `amplitude * cos(xi_k . x)` for the lattice wavevector `k`.
    pub fn cosine(lattice: FrequencyLattice, k: [i64; 2], amplitude: f64) -> Result<Self> {
        Self::mode_pair(lattice, k, Complex64::new(amplitude / 2.0, 0.0))
    }

    /// `amplitude * sin(xi_k . x)` for the lattice wavevector `k`.
    pub fn sine(lattice: FrequencyLattice, k: [i64; 2], amplitude: f64) -> Result<Self> {
        Self::mode_pair(lattice, k, Complex64::new(0.0, -amplitude / 2.0))
    }

    fn mode_pair(lattice: FrequencyLattice, k: [i64; 2], c: Complex64) -> Result<Self> {
        let neg = [-k[0], -k[1]];
        if !lattice.is_interior(k) {
            return Err(Error::SpectrumOverflow(format!(
                "wavevector {k:?} outside the interior of an M = {} box",
                lattice.m()
            )));
        }
        let mut f = Self::zeros(lattice, Rank::Scalar);
        if k == [0, 0] {
            f.data[0] = Complex64::new(2.0 * c.re, 0.0);
            return Ok(f);
        }
        f.data[lattice.index_of(k).unwrap()] += c;
        f.data[lattice.index_of(neg).unwrap()] += c.conj();
        Ok(f)
    }

    /// Scalar field analyzed from `M x M` real samples at `x = (L/M)(m1, m2)`, row-major in `m1`.
    pub fn from_physical(lattice: FrequencyLattice, samples: &[f64]) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                lattice.len(),
                samples.len()
            )));
        }
        let z = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let data = Grid::native(lattice.m()).analyze(z);
        Ok(Self {
            lattice,
            rank: Rank::Scalar,
            data,
        })
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.lattice.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.lattice.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn component_field(&self, c: usize) -> SpectralField {
        SpectralField {
            lattice: self.lattice,
            rank: Rank::Scalar,
            data: self.component(c).to_vec(),
        }
    }

    pub fn from_components(parts: &[SpectralField]) -> Result<Self> {
        let rank = Rank::from_components(parts.len()).ok_or_else(|| {
            Error::InvalidParameter(format!("cannot stack {} components", parts.len()))
        })?;
        let lattice = parts[0].lattice;
        let mut data = Vec::with_capacity(lattice.len() * parts.len());
        for p in parts {
            lattice.check_same(&p.lattice)?;
            p.expect_rank(Rank::Scalar)?;
            data.extend_from_slice(&p.data);
        }
        Ok(Self { lattice, rank, data })
    }

    /// Coefficient of component 0 at wavevector `k` (zero outside the box).
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.coeff_component(0, k)
    }

    pub fn coeff_component(&self, c: usize, k: [i64; 2]) -> Complex64 {
        match self.lattice.index_of(k) {
            Some(idx) => self.data[c * self.lattice.len() + idx],
            None => Complex64::default(),
        }
    }

    /// Continuum transform value `c_k L^2`.
    pub fn continuum_hat(&self, k: [i64; 2]) -> Complex64 {
        let l = self.lattice.box_side();
        self.coeff(k) * (l * l)
    }

    pub fn mean(&self) -> Complex64 {
        self.data[0]
    }

    pub(crate) fn expect_rank(&self, rank: Rank) -> Result<()> {
        if self.rank == rank {
            Ok(())
        } else {
            Err(Error::RankMismatch {
                expected: rank,
                got: self.rank,
            })
        }
    }

    pub(crate) fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        self.lattice.check_same(&other.lattice)?;
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn try_sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x + y * a)
            .collect();
        Ok(SpectralField {
            lattice: self.lattice,
            rank: self.rank,
            data,
        })
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        self.map_coefficients(|_, c| c * a)
    }

    pub fn scale_complex(&self, a: Complex64) -> SpectralField {
        self.map_coefficients(|_, c| c * a)
    }

    /// Applies `g(flat lattice index, coefficient)` to every component.
    pub fn map_coefficients(&self, g: impl Fn(usize, Complex64) -> Complex64) -> SpectralField {
        let len = self.lattice.len();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &c)| g(i % len, c))
            .collect();
        SpectralField {
            lattice: self.lattice,
            rank: self.rank,
            data,
        }
    }

    pub fn with_zero_mean(mut self) -> SpectralField {
        let len = self.lattice.len();
        for c in 0..self.rank.components() {
            self.data[c * len] = Complex64::default();
        }
        self
    }

    /// Root-sum-square of coefficients, equal to the RMS of the physical field.
    pub fn coefficient_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Physical `L^2` norm over the box, `L * coefficient_norm`.
    pub fn l2_norm(&self) -> f64 {
        self.lattice.box_side() * self.coefficient_norm()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|c(-k) - conj c(k)|` over all components.
    pub fn hermitian_defect(&self) -> f64 {
        let lat = &self.lattice;
        let len = lat.len();
        let mut worst: f64 = 0.0;
        for c in 0..self.rank.components() {
            let comp = &self.data[c * len..(c + 1) * len];
            for idx in 0..len {
                let k = lat.wavevector(idx);
                let partner = match lat.index_of([-k[0], -k[1]]) {
                    Some(j) => comp[j],
                    None => Complex64::default(),
                };
                worst = worst.max((partner - comp[idx].conj()).norm());
            }
        }
        worst
    }

    /// Largest difference between two fields, relative to the larger coefficient scale.
    pub fn relative_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_compatible(other)?;
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = self.coefficient_norm().max(other.coefficient_norm());
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }

    /// Complex physical samples of one component on the native `M x M` grid.
    pub fn to_physical_complex(&self, c: usize) -> Vec<Complex64> {
        Grid::native(self.lattice.m()).synthesize(self.component(c), None)
    }

    /// Real physical samples of one component, row-major in `m1`.
    pub fn to_physical(&self, c: usize) -> Vec<f64> {
        self.to_physical_complex(c).into_iter().map(|z| z.re).collect()
    }

    /// True when every active coefficient sits strictly inside the box.
    pub fn fits_interior(&self) -> bool {
        let len = self.lattice.len();
        self.data
            .iter()
            .enumerate()
            .all(|(i, c)| *c == Complex64::default() || self.lattice.is_interior(self.lattice.wavevector(i % len)))
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.try_add(rhs).expect("field addition on incompatible operands")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.try_sub(rhs).expect("field subtraction on incompatible operands")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(16, 1.0).unwrap()
    }

    #[test]
    fn cosine_samples() {
        let f = SpectralField::cosine(lat(), [1, 0], 2.0).unwrap();
        let x = f.to_physical(0);
        let dx = 2.0 * std::f64::consts::PI / 16.0;
        for m1 in 0..16 {
            for m2 in 0..16 {
                let want = 2.0 * (m1 as f64 * dx).cos();
                assert!((x[m1 * 16 + m2] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn physical_roundtrip() {
        let f = SpectralField::cosine(lat(), [2, -3], 1.0)
            .unwrap()
            .try_add(&SpectralField::sine(lat(), [1, 5], 0.5).unwrap())
            .unwrap();
        let g = SpectralField::from_physical(lat(), &f.to_physical(0)).unwrap();
        assert!(f.relative_distance(&g).unwrap() < 1e-14);
        assert!(f.hermitian_defect() < 1e-16);
    }

    #[test]
    fn rank_checks() {
        let a = SpectralField::zeros(lat(), Rank::Scalar);
        let b = SpectralField::zeros(lat(), Rank::Vector);
        assert!(a.try_add(&b).is_err());
        let other = SpectralField::zeros(FrequencyLattice::new(16, 0.5).unwrap(), Rank::Scalar);
        assert!(matches!(a.try_add(&other), Err(Error::IncompatibleLattice { .. })));
    }

    #[test]
    fn continuum_hat_scales_by_area() {
        let f = SpectralField::cosine(lat(), [1, 0], 1.0).unwrap();
        let l = 2.0 * std::f64::consts::PI;
        assert!((f.continuum_hat([1, 0]).re - 0.5 * l * l).abs() < 1e-12);
    }
}
