//! Reproducible random fields with a radial spectral envelope.
//!
//! Each coefficient is drawn from its own keyed stream, so a given `(seed, stream, k)`
//! yields the same value on every lattice that contains `k`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpbesov::{BesovIndex, DyadicPartition};
use crate::spectral::{FrequencyLattice, SpectralField};

/// Amplitude `|xi|^exponent` on the band `lo <= |xi| <= hi`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEnvelope {
    pub lo: f64,
    pub hi: f64,
    pub exponent: f64,
}

impl SpectralEnvelope {
    pub fn band(lo: f64, hi: f64) -> Self {
        Self { lo, hi, exponent: 0.0 }
    }

    /// Equal expected mass per dyadic shell in the critical space of smoothness `s`.
    pub fn critical_white(lo: f64, hi: f64, s: f64) -> Self {
        Self {
            lo,
            hi,
            exponent: -(1.0 + s),
        }
    }

    pub fn amplitude(&self, r: f64) -> f64 {
        if r >= self.lo && r <= self.hi && r > 0.0 {
            r.powf(self.exponent)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo >= 0.0 && self.hi > self.lo && self.exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "envelope band [{}, {}] with exponent {} is invalid",
                self.lo, self.hi, self.exponent
            )));
        }
        Ok(())
    }
}

/// Gaussian wave packets with random centres in a fixed disc and random carriers in a band.
///
/// The packets are drawn in the continuum, so the same `(seed, stream)` describes the same
/// physical field on every lattice whose box holds the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketEnsemble {
    pub count: usize,
    /// Packet centres lie in `|x| <= radius`.
    pub radius: f64,
    /// Frequency width of each packet.
    pub width: f64,
    /// Carrier moduli are log-uniform on `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    /// Packet amplitude scales as `|carrier|^exponent`.
    pub exponent: f64,
}

impl PacketEnsemble {
    /// Packets of equal expected size in the critical space of smoothness `s`.
    pub fn critical(lo: f64, hi: f64, s: f64) -> Self {
        Self {
            count: 4,
            radius: 3.0,
            width: 0.5,
            lo,
            hi,
            exponent: -s,
        }
    }

    /// Checks that the box holds the packets and the Nyquist frequency their tails.
    pub fn check_fits(&self, lattice: &FrequencyLattice) -> Result<()> {
        self.validate()?;
        if self.radius + 4.0 / self.width > lattice.box_side() / 2.0 {
            return Err(Error::InvalidLattice(format!(
                "box of side {} does not hold packets of radius {} and width {}",
                lattice.box_side(),
                self.radius,
                self.width
            )));
        }
        if self.hi + 8.0 * self.width > lattice.nyquist() {
            return Err(Error::SpectrumOverflow(format!(
                "packet band up to {} plus tails exceeds the Nyquist frequency {}",
                self.hi,
                lattice.nyquist()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.count > 0
            && self.radius >= 0.0
            && self.width > 0.0
            && self.lo > 0.0
            && self.hi >= self.lo
            && self.exponent.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid packet ensemble {self:?}")));
        }
        Ok(())
    }
}

/// Real, mean-zero sum of the packets of `ensemble` drawn from `(seed, stream)`.
pub fn random_packets(
    lattice: FrequencyLattice,
    ensemble: &PacketEnsemble,
    seed: u64,
    stream: u64,
) -> Result<SpectralField> {
    ensemble.check_fits(&lattice)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let tau = std::f64::consts::TAU;
    let packets: Vec<(Complex64, [f64; 2], [f64; 2])> = (0..ensemble.count)
        .map(|_| {
            let r = ensemble.lo * (ensemble.hi / ensemble.lo).powf(rng.random::<f64>());
            let a = tau * rng.random::<f64>();
            let rho = ensemble.radius * rng.random::<f64>().sqrt();
            let b = tau * rng.random::<f64>();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let amp = Complex64::new(re, im) * r.powf(ensemble.exponent);
            (amp, [r * a.cos(), r * a.sin()], [rho * b.cos(), rho * b.sin()])
        })
        .collect();
    let l2 = lattice.box_side().powi(2);
    let w2 = 2.0 * ensemble.width * ensemble.width;
    let f = SpectralField::from_fn(lattice, |xi, _| {
        let mut acc = Complex64::default();
        for (amp, c, x) in &packets {
            for (sign, a) in [(1.0, *amp), (-1.0, amp.conj())] {
                let d = [xi[0] - sign * c[0], xi[1] - sign * c[1]];
                let g = (-(d[0] * d[0] + d[1] * d[1]) / w2).exp();
                if g > 1e-300 {
                    acc += a * Complex64::from_polar(0.5 * g, -(d[0] * x[0] + d[1] * x[1]));
                }
            }
        }
        acc / l2
    });
    Ok(f.with_zero_mean())
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

fn keyed_gaussian(seed: u64, stream: u64, k: [i64; 2]) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // The block counter addresses 2^68 words: 24 bits per axis, 64 words per coefficient.
    debug_assert!(zigzag(k[0]) < 1 << 24 && zigzag(k[1]) < 1 << 24);
    let key = ((zigzag(k[0]) as u128) << 24) | zigzag(k[1]) as u128;
    rng.set_word_pos(key << 6);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Hermitian, mean-zero complex Gaussian field shaped by `envelope`.
pub fn random_field(
    lattice: FrequencyLattice,
    envelope: &SpectralEnvelope,
    seed: u64,
    stream: u64,
) -> Result<SpectralField> {
    envelope.validate()?;
    let mut f = SpectralField::zeros(lattice, crate::spectral::Rank::Scalar);
    let data = f.component_mut(0);
    for idx in 0..lattice.len() {
        let k = lattice.wavevector(idx);
        let upper = k[0] > 0 || (k[0] == 0 && k[1] > 0);
        if !upper || !lattice.is_interior(k) {
            continue;
        }
        let xi = lattice.frequency(idx);
        let a = envelope.amplitude(xi[0].hypot(xi[1]));
        if a == 0.0 {
            continue;
        }
        let c = keyed_gaussian(seed, stream, k) * a;
        data[idx] = c;
        data[lattice.index_of([-k[0], -k[1]]).unwrap()] = c.conj();
    }
    if f.max_abs_coeff() == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "envelope band [{}, {}] contains no lattice frequency",
            envelope.lo, envelope.hi
        )));
    }
    Ok(f)
}

/// `random_field` normalized to unit norm at `index`.
pub fn random_unit_field(
    partition: &DyadicPartition,
    envelope: &SpectralEnvelope,
    index: BesovIndex,
    seed: u64,
    stream: u64,
) -> Result<SpectralField> {
    let f = random_field(*partition.lattice(), envelope, seed, stream)?;
    let n = partition.besov_norm(&f, index)?;
    Ok(f.scale(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_across_lattices() {
        let a = FrequencyLattice::new(16, 0.5).unwrap();
        let b = FrequencyLattice::new(32, 0.5).unwrap();
        let env = SpectralEnvelope::band(0.5, 3.0);
        let fa = random_field(a, &env, 7, 1).unwrap();
        let fb = random_field(b, &env, 7, 1).unwrap();
        for k in [[1, 0], [2, -3], [-4, 1]] {
            assert_eq!(fa.coeff(k), fb.coeff(k));
        }
        let fc = random_field(a, &env, 7, 2).unwrap();
        assert_ne!(fa.coeff([1, 0]), fc.coeff([1, 0]));
        assert_eq!(fa.mean(), Complex64::default());
        assert_eq!(fa.hermitian_defect(), 0.0);
    }

    #[test]
    fn empty_band_rejected() {
        let a = FrequencyLattice::new(16, 1.0).unwrap();
        assert!(random_field(a, &SpectralEnvelope::band(0.1, 0.5), 1, 0).is_err());
    }
}
