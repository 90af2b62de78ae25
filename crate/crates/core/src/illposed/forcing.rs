use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::{ExponentMap, ForceSpec, ForceVariant};
use crate::error::{Error, Result};
use crate::lpbesov::{CutProfile, DyadicPartition};
use crate::spectral::{FrequencyLattice, Rank, SpectralField};

const CHI: CutProfile = CutProfile::raw(1.0, 2.0);

/// Radial bump transform: 1 on `|xi| <= 1`, 0 on `|xi| >= 2`.
pub fn chi_hat(r: f64) -> f64 {
    CHI.sigma(r)
}

fn require_fine(lattice: &FrequencyLattice) -> Result<()> {
    if lattice.spacing() > 0.25 {
        return Err(Error::InvalidLattice(format!(
            "spacing {} is too coarse to resolve the unit bump; need <= 1/4",
            lattice.spacing()
        )));
    }
    Ok(())
}

fn area(lattice: &FrequencyLattice) -> f64 {
    let l = lattice.box_side();
    l * l
}

/// The bump `chi` with lattice coefficients `chi_hat / L^2`.
pub fn chi_bump(lattice: FrequencyLattice) -> Result<SpectralField> {
    require_fine(&lattice)?;
    let a = 1.0 / area(&lattice);
    Ok(SpectralField::from_fn(lattice, |xi, _| {
        Complex64::new(chi_hat(xi[0].hypot(xi[1])) * a, 0.0)
    }))
}

/// Lattice wavenumber of `2^e` along an axis, checked against the box.
fn carrier_index(lattice: &FrequencyLattice, e: i64, reach: f64) -> Result<i64> {
    let k = 2f64.powi(e as i32);
    if k + reach > lattice.nyquist() {
        return Err(Error::SpectrumOverflow(format!(
            "frequency 2^{e} + {reach} exceeds the Nyquist frequency {}",
            lattice.nyquist()
        )));
    }
    lattice.wavenumber_of(k).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "2^{e} is not a multiple of the spacing {}",
            lattice.spacing()
        ))
    })
}

/// Adds `amplitude * chi(x) cos(2^e x_1)` to `f`.
fn add_modulated_chi(f: &mut SpectralField, e: i64, amplitude: f64) -> Result<()> {
    let lat = *f.lattice();
    let kk = carrier_index(&lat, e, 2.0)?;
    let h = lat.spacing();
    let a = amplitude / 2.0 / area(&lat);
    let reach = (2.0 / h).ceil() as i64 + 1;
    let data = f.component_mut(0);
    for sign in [1i64, -1] {
        let c1 = sign * kk;
        for d1 in -reach..=reach {
            for d2 in -reach..=reach {
                let r = h * ((d1 * d1 + d2 * d2) as f64).sqrt();
                let v = chi_hat(r);
                if v == 0.0 {
                    continue;
                }
                let k = [c1 + d1, d2];
                if !lat.is_interior(k) {
                    return Err(Error::SpectrumOverflow(format!("wavevector {k:?} outside the box")));
                }
                data[lat.index_of(k).unwrap()] += a * v;
            }
        }
    }
    Ok(())
}

/// `delta 2^{5N/2} chi(x) cos(2^N x_1)`.
pub fn force_step1(lattice: FrequencyLattice, n: i64, delta: f64) -> Result<SpectralField> {
    require_fine(&lattice)?;
    let mut f = SpectralField::zeros(lattice, Rank::Scalar);
    add_modulated_chi(&mut f, n, delta * 2f64.powf(2.5 * n as f64))?;
    Ok(f)
}

/// `(delta / sqrt(log N)) sum_n 2^{5 s(n) / 2} / sqrt(n) chi(x) cos(2^{s(n)} x_1)`.
pub fn force_step2(
    lattice: FrequencyLattice,
    n: i64,
    delta: f64,
    map: ExponentMap,
    range: (i64, i64),
) -> Result<SpectralField> {
    ForceSpec::step2(n, delta, map, range).validate()?;
    require_fine(&lattice)?;
    let shells = map.shells(range, 2)?;
    for w in shells.windows(2) {
        if 2f64.powi(w[0].1 as i32) + 2.0 >= 2f64.powi(w[1].1 as i32) - 2.0 {
            return Err(Error::ShellsNotDisjoint(format!(
                "annuli around 2^{} and 2^{} overlap",
                w[0].1, w[1].1
            )));
        }
    }
    let mut f = SpectralField::zeros(lattice, Rank::Scalar);
    let norm = delta / (n as f64).ln().sqrt();
    for (k, s) in shells {
        add_modulated_chi(&mut f, s, norm * 2f64.powf(2.5 * s as f64) / (k as f64).sqrt())?;
    }
    Ok(f)
}

/// Minimum periodic distance between block centres, in units of the sum of their widths.
pub const DEFAULT_SEPARATION: f64 = 1.0;

/// Unit vector along an integer direction and the length of its closed orbit on the torus.
pub fn translation_axis(lattice: &FrequencyLattice, direction: [i64; 2]) -> Result<([f64; 2], f64)> {
    let [a, b] = direction;
    if gcd(a.unsigned_abs(), b.unsigned_abs()) != 1 {
        return Err(Error::InvalidParameter(format!(
            "translation direction {direction:?} must be a primitive integer vector"
        )));
    }
    let norm = (a as f64).hypot(b as f64);
    Ok(([a as f64 / norm, b as f64 / norm], lattice.box_side() * norm))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Envelope `F = sum_k 2^{-3 s(k)/2} phi_{s(k)}(x - R s(k) d)` with `d` the unit vector along `direction`.
pub fn step3_envelope(
    partition: &DyadicPartition,
    map: ExponentMap,
    range: (i64, i64),
    stride: f64,
    direction: [i64; 2],
    separation: f64,
) -> Result<SpectralField> {
    let lat = *partition.lattice();
    if !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::InvalidParameter(format!("stride must be positive, got {stride}")));
    }
    let shells = map.shells(range, 1)?;
    let top = shells.last().unwrap().1;
    let bottom = shells.first().unwrap().1;
    if 2f64.powi(top as i32 + 1) > lat.nyquist() {
        return Err(Error::SpectrumOverflow(format!(
            "block shell {top} reaches 2^{} beyond the Nyquist frequency {}",
            top + 1,
            lat.nyquist()
        )));
    }
    if 2f64.powi(bottom as i32 - 1) < lat.spacing() {
        return Err(Error::InvalidLattice(format!(
            "block shell {bottom} is not resolved by spacing {}",
            lat.spacing()
        )));
    }
    let (d, _) = translation_axis(&lat, direction)?;
    check_translations(&lat, &shells, stride, d, separation)?;
    let a = 1.0 / area(&lat);
    Ok(SpectralField::from_fn(lat, |xi, _| {
        let r = xi[0].hypot(xi[1]);
        let mut acc = Complex64::default();
        for &(_, s) in &shells {
            let v = partition.phi_hat(s as i32, r);
            if v != 0.0 {
                let weight = 2f64.powf(-1.5 * s as f64) * v * a;
                let shift = stride * s as f64;
                acc += Complex64::from_polar(weight, -(xi[0] * d[0] + xi[1] * d[1]) * shift);
            }
        }
        acc
    }))
}

fn check_translations(
    lat: &FrequencyLattice,
    shells: &[(i64, i64)],
    stride: f64,
    dir: [f64; 2],
    separation: f64,
) -> Result<()> {
    let l = lat.box_side();
    let wrap = |x: f64| {
        let x = x.rem_euclid(l);
        x.min(l - x)
    };
    for (i, &(ki, si)) in shells.iter().enumerate() {
        for &(kj, sj) in &shells[i + 1..] {
            let shift = stride * (sj - si) as f64;
            let d = wrap(shift * dir[0]).hypot(wrap(shift * dir[1]));
            let need = separation * (2f64.powi(-(si as i32)) + 2f64.powi(-(sj as i32)));
            if d < need {
                return Err(Error::TranslationCollision(format!(
                    "blocks {ki} and {kj} sit {d:.4} apart on a box of side {l:.4}; need {need:.4}"
                )));
            }
        }
    }
    Ok(())
}

/// `A F(x) cos(2^c x_1)` kept as envelope, amplitude and carrier exponent.
#[derive(Debug, Clone)]
pub struct ModulatedForce {
    pub envelope: SpectralField,
    pub amplitude: f64,
    pub carrier: i64,
}

impl ModulatedForce {
    pub fn carrier_frequency(&self) -> f64 {
        2f64.powi(self.carrier as i32)
    }

    /// The forcing itself on a lattice that holds carrier plus envelope band.
    pub fn on_lattice(&self, lattice: FrequencyLattice) -> Result<SpectralField> {
        let env = &self.envelope;
        let el = env.lattice();
        if (el.spacing() - lattice.spacing()).abs() > 0.0 {
            return Err(Error::IncompatibleLattice {
                m_a: el.m(),
                h_a: el.spacing(),
                m_b: lattice.m(),
                h_b: lattice.spacing(),
            });
        }
        let reach = env
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(i, _)| {
                let xi = el.frequency(i);
                xi[0].abs().max(xi[1].abs())
            })
            .fold(0.0, f64::max);
        let kk = carrier_index(&lattice, self.carrier, reach)?;
        let mut f = SpectralField::zeros(lattice, Rank::Scalar);
        let data = f.component_mut(0);
        for (i, &c) in env.component(0).iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let k = el.wavevector(i);
            for sign in [1i64, -1] {
                let t = [k[0] + sign * kk, k[1]];
                if !lattice.is_interior(t) {
                    return Err(Error::SpectrumOverflow(format!("wavevector {t:?} outside the box")));
                }
                data[lattice.index_of(t).unwrap()] += c * (self.amplitude / 2.0);
            }
        }
        Ok(f)
    }
}

/// Step-3 forcing: modulated envelope plus the envelope's `L^4` norm.
#[derive(Debug, Clone)]
pub struct Step3Force {
    pub force: ModulatedForce,
    pub envelope_l4: f64,
}

/// Physical `L^p` norm of a real field.
pub fn physical_lp(f: &SpectralField, p: f64) -> f64 {
    crate::lpbesov::besov::field_lp_norm(f, p)
}

/// Amplitude `delta 2^{5c/2} / (N^{1/4} log N)` of the Step-3 forcing.
pub fn step3_amplitude(spec: &ForceSpec) -> f64 {
    let c = spec.carrier.unwrap_or(0) as f64;
    let n = spec.n as f64;
    spec.delta * 2f64.powf(2.5 * c) / (n.powf(0.25) * n.ln())
}

/// Builds envelope and modulated forcing; `envelope` lattice need not hold the carrier.
pub fn force_step3(partition: &DyadicPartition, spec: &ForceSpec, separation: f64) -> Result<Step3Force> {
    if spec.variant != ForceVariant::Step3 {
        return Err(Error::InvalidParameter("force_step3 needs a Step3 spec".into()));
    }
    spec.validate()?;
    let envelope = step3_envelope(
        partition,
        spec.exponent_map,
        spec.range,
        spec.stride.unwrap(),
        spec.translation,
        separation,
    )?;
    let envelope_l4 = physical_lp(&envelope, 4.0);
    Ok(Step3Force {
        force: ModulatedForce {
            envelope,
            amplitude: step3_amplitude(spec),
            carrier: spec.carrier.unwrap(),
        },
        envelope_l4,
    })
}

/// Forcing for a Step-1 or Step-2 spec on `lattice`.
pub fn build_forcing(lattice: FrequencyLattice, spec: &ForceSpec) -> Result<SpectralField> {
    spec.validate()?;
    match spec.variant {
        ForceVariant::Step1 => force_step1(lattice, spec.n, spec.delta),
        ForceVariant::Step2 => force_step2(lattice, spec.n, spec.delta, spec.exponent_map, spec.range),
        ForceVariant::Step3 => {
            let part = DyadicPartition::for_lattice(lattice);
            force_step3(&part, spec, DEFAULT_SEPARATION)?.force.on_lattice(lattice)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub stride: f64,
    /// `||F||_4^4 / sum_k ||block_k||_4^4` at the chosen stride.
    pub additivity: f64,
    pub block_l4: Vec<f64>,
    pub envelope_l4: f64,
    /// Every stride tried with its additivity (`None` on collision).
    pub tried: Vec<(f64, Option<f64>)>,
}

/// Doubling search for the smallest stride with `||F||_4^4` within `tolerance` of `sum ||block||_4^4`.
///
/// Candidates are `R_max 2^{-k}` where `R_max = Lambda / (s(k1) - s(k0) + 1)` spreads the blocks
/// evenly over the closed orbit of length `Lambda` along `direction`.
pub fn calibrate_r(
    partition: &DyadicPartition,
    map: ExponentMap,
    range: (i64, i64),
    direction: [i64; 2],
    tolerance: f64,
    separation: f64,
) -> Result<Calibration> {
    let lat = *partition.lattice();
    let shells = map.shells(range, 1)?;
    let span = (shells.last().unwrap().1 - shells.first().unwrap().1) as f64;
    let (_, orbit) = translation_axis(&lat, direction)?;
    let r_max = orbit / (span + 1.0);
    let blocks: Vec<f64> = shells
        .iter()
        .map(|&(k, _)| {
            step3_envelope(partition, map, (k, k), r_max, direction, separation).map(|b| physical_lp(&b, 4.0))
        })
        .collect::<Result<_>>()?;
    let mass: f64 = blocks.iter().map(|b| b.powi(4)).sum();
    let mut tried = Vec::new();
    let depth = 12;
    for k in (0..=depth).rev() {
        let stride = r_max * 2f64.powi(-k);
        let f = match step3_envelope(partition, map, range, stride, direction, separation) {
            Ok(f) => f,
            Err(Error::TranslationCollision(_)) => {
                tried.push((stride, None));
                continue;
            }
            Err(e) => return Err(e),
        };
        let l4 = physical_lp(&f, 4.0);
        let additivity = l4.powi(4) / mass;
        tried.push((stride, Some(additivity)));
        if shells.len() == 1 || (additivity - 1.0).abs() <= tolerance {
            return Ok(Calibration {
                stride,
                additivity,
                block_l4: blocks,
                envelope_l4: l4,
                tried,
            });
        }
    }
    Err(Error::TranslationCollision(format!(
        "no stride up to {r_max:.4} fits {} blocks along {direction:?} in a box of side {:.4} with additivity tolerance {tolerance}",
        shells.len(),
        lat.box_side()
    )))
}
