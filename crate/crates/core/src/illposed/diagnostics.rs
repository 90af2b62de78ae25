use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::forcing::ModulatedForce;
use super::spec::ForceSpec;
use crate::error::{Error, Result};
use crate::lpbesov::{aggregate, BesovIndex, DyadicPartition, ProbeFunction};
use crate::solver::SignConvention;
use crate::spectral::fft::Grid;
use crate::spectral::{FrequencyLattice, Rank, SpectralField};

/// `sigma B[theta1, theta1]` evaluated on the envelope lattice, low band only.
///
/// With `theta1 = E e^{iK x_1} + c.c.` and `u = U e^{iK x_1} + c.c.`, the product
/// `theta1 u` splits into a band near `2K` and the low band `2 Re(E conj U)`, which is
/// exact on the envelope lattice as long as `K` exceeds the envelope band by a margin.
pub fn modulated_second_iterate(force: &ModulatedForce, sign: SignConvention) -> Result<SpectralField> {
    let env = &force.envelope;
    let lat = *env.lattice();
    let kf = force.carrier_frequency();
    let len = lat.len();
    let mut e = vec![Complex64::default(); len];
    let mut u0 = vec![Complex64::default(); len];
    let mut u1 = vec![Complex64::default(); len];
    for (idx, &c) in env.component(0).iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let eta = lat.frequency(idx);
        let xi = [eta[0] + kf, eta[1]];
        let r = xi[0].hypot(xi[1]);
        let ev = c * (force.amplitude / 2.0) / (r * r);
        e[idx] = ev;
        u0[idx] = Complex64::new(0.0, -xi[1] / r) * ev;
        u1[idx] = Complex64::new(0.0, xi[0] / r) * ev;
    }
    let grid = Grid::padded(lat.m());
    let ze = grid.synthesize(&e, None);
    drop(e);
    let mut q = vec![Complex64::default(); ze.len()];
    for (k, u) in [u0, u1].into_iter().enumerate() {
        let zu = grid.synthesize(&u, None);
        for ((qv, a), b) in q.iter_mut().zip(&ze).zip(&zu) {
            let prod = 2.0 * (a * b.conj()).re;
            if k == 0 {
                qv.re = prod;
            } else {
                qv.im = prod;
            }
        }
    }
    drop(ze);
    let (q0, q1) = grid.analyze_pair(q);
    let sigma = sign.sigma();
    let data = (0..len)
        .map(|idx| {
            let xi = lat.frequency(idx);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if r2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::i() * (q0[idx] * xi[0] + q1[idx] * xi[1]) * (sigma / r2)
            }
        })
        .collect();
    SpectralField::from_coefficients(lat, Rank::Scalar, data)
}

/// Critical data norm of `A F cos(K x_1)` from its envelope, for even integer `p`.
///
/// Uses `||Re(e^{iKx_1} G)||_p^p = binom(p, p/2) 2^{-p} ||G||_p^p` for `G` band-limited well below `K`.
pub fn modulated_data_norm(force: &ModulatedForce, index: BesovIndex) -> Result<f64> {
    let p = index.p;
    if !(p.fract() == 0.0 && (p as i64) % 2 == 0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "modulated data norm needs an even integer p, got {p}"
        )));
    }
    let env = &force.envelope;
    let lat = *env.lattice();
    let part = DyadicPartition::for_lattice(lat);
    let kf = force.carrier_frequency();
    let pi = p as u64;
    let binom = (1..=pi / 2).fold(1.0, |acc, i| acc * (pi / 2 + i) as f64 / i as f64);
    let factor = (binom / 2f64.powf(p)).powf(1.0 / p);
    let grid = Grid::native(lat.m());
    let c = force.carrier;
    let mut values = Vec::new();
    for j in (c - 2)..=(c + 2) {
        let j = j as i32;
        let g: Vec<Complex64> = env
            .component(0)
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                if v == Complex64::default() {
                    return v;
                }
                let eta = lat.frequency(idx);
                v * force.amplitude * part.phi_hat(j, (eta[0] + kf).hypot(eta[1]))
            })
            .collect();
        if g.iter().all(|v| *v == Complex64::default()) {
            continue;
        }
        let z = grid.synthesize(&g, None);
        let norm = factor * crate::lpbesov::besov::lp_of(&z, |v| v.norm(), p, lat.cell_area());
        values.push(2f64.powf(index.s * j as f64) * norm);
    }
    Ok(aggregate(&values, index.q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowFrequencyBound {
    pub value: f64,
    /// `(j, 2^{-j} ||phi_j * theta2||_inf)` for each shell of the range.
    pub profile: Vec<(i32, f64)>,
}

/// `sup_j 2^{-j} ||phi_j * theta2||_inf` over `j_range`.
pub fn lowfreq_lower_bound(
    partition: &DyadicPartition,
    theta2: &SpectralField,
    j_range: (i32, i32),
) -> Result<LowFrequencyBound> {
    let (lo, hi) = j_range;
    if lo > hi || lo < partition.j_min() || hi > partition.j_max() {
        return Err(Error::InvalidParameter(format!(
            "shell range [{lo}, {hi}] outside the partition window [{}, {}]",
            partition.j_min(),
            partition.j_max()
        )));
    }
    let norms = partition.shell_lp_norms(theta2, f64::INFINITY)?;
    let profile: Vec<(i32, f64)> = norms
        .into_iter()
        .filter(|(j, _)| (lo..=hi).contains(j))
        .map(|(j, v)| (j, 2f64.powi(-j) * v))
        .collect();
    let value = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(LowFrequencyBound { value, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationEntry {
    pub n: i64,
    pub shell: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub entries: Vec<InflationEntry>,
    /// `(q, l^q aggregate)`; infinity is written as `"inf"` in JSON.
    pub aggregates: Vec<(f64, f64)>,
    pub data_norm: Option<f64>,
    pub lowfreq_bound: Option<f64>,
    pub spec: Option<ForceSpec>,
}

impl InflationReport {
    pub fn aggregate(&self, q: f64) -> Option<f64> {
        self.aggregates.iter().find(|(k, _)| *k == q || (k.is_infinite() && q.is_infinite())).map(|a| a.1)
    }
}

/// Per-shell `2^{-s/2} ||psi_s * theta2||_4` and their `l^q` aggregates.
pub fn inflation_profile(
    partition: &DyadicPartition,
    theta2: &SpectralField,
    shells: &[(i64, i64)],
    qs: &[f64],
    gap: u32,
    direction: [f64; 2],
) -> Result<InflationReport> {
    let mut entries = Vec::with_capacity(shells.len());
    for &(n, s) in shells {
        let probe = ProbeFunction::new(*partition, s as i32, gap, direction)?;
        let v = probe.projected_lp_norm(theta2, 4.0)?;
        entries.push(InflationEntry {
            n,
            shell: s,
            value: 2f64.powf(-0.5 * s as f64) * v,
        });
    }
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let aggregates = qs.iter().map(|&q| (q, aggregate(&values, q))).collect();
    Ok(InflationReport {
        entries,
        aggregates,
        data_norm: None,
        lowfreq_bound: None,
        spec: None,
    })
}

/// The three pieces of `B[theta1, theta1]` at a probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitTriple {
    pub xi: [f64; 2],
    pub main: Complex64,
    pub cross: Complex64,
    pub perp: Complex64,
    /// The coefficient of `B[theta1, theta1]` at `xi` from the fast route.
    pub direct: Complex64,
}

impl SplitTriple {
    pub fn total(&self) -> Complex64 {
        self.main + self.cross + self.perp
    }

    pub fn remainder(&self) -> f64 {
        self.cross.norm() + self.perp.norm()
    }
}

/// Lattice quadrature of the main, mixed and perpendicular parts of `B[theta1, theta1](xi)`.
///
/// Common weight `w = theta1(xi - eta) theta1(eta) / ((|eta| + |xi - eta|) |xi - eta| |eta|)`;
/// the pieces are `xi_1 xi_2 eta_1^2 / |xi|^2`, `((xi_2^2 - xi_1^2) eta_1 eta_2 - xi_1 xi_2 eta_2^2) / |xi|^2`
/// and `-xi . eta_perp / 2`, each times `w`.
///
/// The sum runs over one pairing: `eta_1 > xi_1 / 2` counted twice and `eta_1 = xi_1 / 2` once.
/// The full kernel is symmetric under `eta -> xi - eta`, so the three pieces still add up to
/// `B[theta1, theta1](xi)`. The pieces separately are not symmetric; summed over both pairings
/// the leading parts of the mixed and perpendicular pieces would cancel. For a field
/// concentrated near `+-2^N e_1` the half-space is the pairing of `eta` near `+2^N e_1` with
/// `xi - eta` near `-2^N e_1`.
pub fn iterate2_split(
    theta1: &SpectralField,
    direct: &SpectralField,
    probes: &[[f64; 2]],
) -> Result<Vec<SplitTriple>> {
    theta1.expect_rank(Rank::Scalar)?;
    theta1.lattice().check_same(direct.lattice())?;
    let lat: FrequencyLattice = *theta1.lattice();
    let h = lat.spacing();
    let th = theta1.component(0);
    let support: Vec<([i64; 2], Complex64)> = (0..lat.len())
        .filter(|&i| th[i] != Complex64::default())
        .map(|i| (lat.wavevector(i), th[i]))
        .filter(|(k, _)| *k != [0, 0])
        .collect();
    probes
        .iter()
        .map(|&xi| {
            let kx = match (lat.wavenumber_of(xi[0]), lat.wavenumber_of(xi[1])) {
                (Some(a), Some(b)) if lat.is_interior([a, b]) && [a, b] != [0, 0] => [a, b],
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "probe ({}, {}) is not a nonzero interior lattice frequency",
                        xi[0], xi[1]
                    )))
                }
            };
            let x = [h * kx[0] as f64, h * kx[1] as f64];
            let r2 = x[0] * x[0] + x[1] * x[1];
            let (mut main, mut cross, mut perp) = (Complex64::default(), Complex64::default(), Complex64::default());
            for &(ke, ce) in &support {
                let kd = [kx[0] - ke[0], kx[1] - ke[1]];
                if kd == [0, 0] {
                    continue;
                }
                let mult = match (2 * ke[0]).cmp(&kx[0]) {
                    std::cmp::Ordering::Greater => 2.0,
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Less => continue,
                };
                let cd = match lat.index_of(kd) {
                    Some(i) => th[i],
                    None => continue,
                };
                if cd == Complex64::default() {
                    continue;
                }
                let eta = [h * ke[0] as f64, h * ke[1] as f64];
                let d = [x[0] - eta[0], x[1] - eta[1]];
                let (ne, nd) = (eta[0].hypot(eta[1]), d[0].hypot(d[1]));
                let w = cd * ce * (mult / ((ne + nd) * nd * ne));
                main += w * (x[0] * x[1] * eta[0] * eta[0] / r2);
                cross += w * (((x[1] * x[1] - x[0] * x[0]) * eta[0] * eta[1] - x[0] * x[1] * eta[1] * eta[1]) / r2);
                perp += w * (-0.5 * (-x[0] * eta[1] + x[1] * eta[0]));
            }
            Ok(SplitTriple {
                xi: x,
                main,
                cross,
                perp,
                direct: direct.coeff(kx),
            })
        })
        .collect()
}
