use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::spectral::fft::Grid;
use crate::spectral::{Rank, SpectralField};

/// Exponents in `[1, inf]`; infinity is written `"inf"` in text formats.
pub(crate) mod exponent {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

/// Homogeneous Besov index `(s, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [1, inf], got {v}")))
    }
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("smoothness must be finite, got {s}")));
        }
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        Ok(Self { s, p, q })
    }

    /// Critical data index `s = 2/p - 3`.
    pub fn data(p: f64, q: f64) -> Result<Self> {
        Self::new(2.0 / p - 3.0, p, q)
    }

    /// Critical solution index `s = 2/p - 1`.
    pub fn solution(p: f64, q: f64) -> Result<Self> {
        Self::new(2.0 / p - 1.0, p, q)
    }

    pub fn is_critical_data(&self) -> bool {
        (self.s - (2.0 / self.p - 3.0)).abs() < 1e-14
    }

    pub fn is_critical_solution(&self) -> bool {
        (self.s - (2.0 / self.p - 1.0)).abs() < 1e-14
    }

    /// Index two derivatives lower, where the forcing of a solution at `self` lives.
    pub fn data_companion(&self) -> Self {
        Self { s: self.s - 2.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.s, self.p, self.q).map(|_| ())
    }
}

/// `L^p` norm of samples with quadrature weight `cell_area`.
pub fn lp_norm(values: &[f64], p: f64, cell_area: f64) -> f64 {
    lp_of(values, |v| v.abs(), p, cell_area)
}

/// `L^p` norm of `get(sample)` over a slice, without copying.
pub(crate) fn lp_of<T>(z: &[T], get: impl Fn(&T) -> f64, p: f64, cell_area: f64) -> f64 {
    let top = z.iter().map(&get).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let inv = 1.0 / top;
    let sum = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        compensated_sum(z.iter().map(|v| (get(v) * inv).powi(k)))
    } else {
        compensated_sum(z.iter().map(|v| (get(v) * inv).powf(p)))
    };
    top * (sum * cell_area).powf(1.0 / p)
}

/// Quadrature grid side for `L^p` of a field whose largest active axis frequency is `reach`.
///
/// For even integer `p` the grid rule is exact once `n h > p * reach` (discrete Parseval
/// applied to `g^{p/2}`), so the smallest such power of two is used, possibly below `M`,
/// capped at `4 M`, which covers every even `p <= 8`. Other exponents keep at least the
/// native grid; for `p = inf` the reach is resolved 16 times over to bound the sampling error
/// of the maximum.
pub(crate) fn quadrature_side(m: usize, h: f64, p: f64, reach: f64) -> usize {
    let even = p.is_finite() && p.fract() == 0.0 && (p as u64) % 2 == 0;
    let need = if p.is_infinite() { 16.0 * reach } else { p.max(2.0) * reach };
    let mut n = if even { 8.min(m) } else { m };
    while (n as f64) * h <= need && n < 4 * m {
        n *= 2;
    }
    n
}

/// Largest `max(|xi_1|, |xi_2|)` over nonzero coefficients.
pub(crate) fn axis_reach(f: &SpectralField) -> f64 {
    let lat = f.lattice();
    let len = lat.len();
    f.coefficients()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::default())
        .map(|(i, _)| {
            let xi = lat.frequency(i % len);
            xi[0].abs().max(xi[1].abs())
        })
        .fold(0.0, f64::max)
}

/// `L^p` norm of a (possibly complex) scalar field on an adequate quadrature grid.
pub(crate) fn field_lp_norm(f: &SpectralField, p: f64) -> f64 {
    let lat = f.lattice();
    let n = quadrature_side(lat.m(), lat.spacing(), p, axis_reach(f));
    let grid = Grid { m: lat.m(), n };
    let list: Vec<(usize, Complex64)> = f
        .component(0)
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::default())
        .map(|(i, c)| (i, *c))
        .collect();
    let z = grid.scatter(&list, &[]);
    let dx = lat.box_side() / n as f64;
    lp_of(&z, |c| c.norm(), p, dx * dx)
}

/// Neumaier summation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `l^q` norm of nonnegative entries: ascending order, max-scaled, compensated.
pub fn aggregate(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    let top = v.last().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return top;
    }
    top * compensated_sum(v.iter().map(|x| (x / top).powf(q))).powf(1.0 / q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellEntry {
    pub j: i32,
    pub value: f64,
}

/// The sequence `2^{sj} ||phi_j * f||_p` over the partition window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    pub entries: Vec<ShellEntry>,
    pub out_of_window_fraction: f64,
}

impl ShellProfile {
    pub fn aggregate(&self, q: f64) -> f64 {
        let values: Vec<f64> = self.entries.iter().map(|e| e.value).collect();
        aggregate(&values, q)
    }

    pub fn value(&self, j: i32) -> f64 {
        self.entries.iter().find(|e| e.j == j).map_or(0.0, |e| e.value)
    }
}

impl DyadicPartition {
    /// `||phi_j * f||_p` for each shell of the window (0 for inactive shells).
    pub fn shell_lp_norms(&self, f: &SpectralField, p: f64) -> Result<Vec<(i32, f64)>> {
        check_exponent("p", p)?;
        self.lattice().check_same(f.lattice())?;
        f.expect_rank(Rank::Scalar)?;
        let lat = *self.lattice();
        let real = f.hermitian_defect() <= 1e-12 * f.max_abs_coeff().max(f64::MIN_POSITIVE);
        // One pass buckets each coefficient into the (at most two) shells whose support holds it.
        let mut buckets: BTreeMap<i32, Vec<(usize, Complex64)>> = BTreeMap::new();
        let profile = self.profile();
        for (idx, &c) in f.component(0).iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let xi = lat.frequency(idx);
            let r = xi[0].hypot(xi[1]);
            if r == 0.0 {
                continue;
            }
            let j0 = (r / profile.upper).log2().floor() as i32;
            for j in j0..=j0 + 2 {
                if !self.shells().contains(&j) {
                    continue;
                }
                let w = self.phi_hat(j, r);
                if w != 0.0 {
                    buckets.entry(j).or_default().push((idx, c * w));
                }
            }
        }
        let mut active: Vec<(usize, i32, Vec<(usize, Complex64)>)> = Vec::new();
        for (j, list) in buckets {
            let reach = list
                .iter()
                .map(|&(idx, _)| {
                    let xi = lat.frequency(idx);
                    xi[0].abs().max(xi[1].abs())
                })
                .fold(0.0, f64::max);
            active.push((quadrature_side(lat.m(), lat.spacing(), p, reach), j, list));
        }
        // Real shells sharing a grid are packed two per transform.
        let mut groups: Vec<Vec<(usize, i32, Vec<(usize, Complex64)>)>> = Vec::new();
        for item in active {
            match groups.last_mut() {
                Some(g) if real && g.len() == 1 && g[0].0 == item.0 => g.push(item),
                _ => groups.push(vec![item]),
            }
        }
        let big = groups.iter().any(|g| g[0].0 > 2 * lat.m());
        let measure = |g: &Vec<(usize, i32, Vec<(usize, Complex64)>)>| -> Vec<(i32, f64)> {
            let n = g[0].0;
            let grid = Grid { m: lat.m(), n };
            let dx = lat.box_side() / n as f64;
            let area = dx * dx;
            if real {
                let z = grid.scatter(&g[0].2, g.get(1).map_or(&[][..], |s| &s.2[..]));
                let mut out = vec![(g[0].1, lp_of(&z, |c| c.re.abs(), p, area))];
                if let Some(second) = g.get(1) {
                    out.push((second.1, lp_of(&z, |c| c.im.abs(), p, area)));
                }
                out
            } else {
                let z = grid.scatter(&g[0].2, &[]);
                vec![(g[0].1, lp_of(&z, |c| c.norm(), p, area))]
            }
        };
        // Oversampled grids are measured one at a time to bound memory.
        let measured: Vec<(i32, f64)> = if big {
            groups.iter().flat_map(measure).collect()
        } else {
            groups.par_iter().flat_map_iter(measure).collect()
        };
        Ok(self
            .shells()
            .map(|j| {
                let v = measured.iter().find(|(k, _)| *k == j).map_or(0.0, |(_, v)| *v);
                (j, v)
            })
            .collect())
    }

    pub fn shell_profile(&self, f: &SpectralField, s: f64, p: f64) -> Result<ShellProfile> {
        let out_of_window_fraction = self.out_of_window_fraction(f);
        if out_of_window_fraction > 1e-12 {
            log::warn!(
                "{:.3e} of the field's energy lies outside shells [{}, {}]; Besov norm is truncated",
                out_of_window_fraction,
                self.j_min(),
                self.j_max()
            );
        }
        let entries = self
            .shell_lp_norms(f, p)?
            .into_iter()
            .map(|(j, v)| ShellEntry {
                j,
                value: 2f64.powf(s * j as f64) * v,
            })
            .collect();
        Ok(ShellProfile {
            s,
            p,
            entries,
            out_of_window_fraction,
        })
    }

    pub fn besov_norm(&self, f: &SpectralField, idx: BesovIndex) -> Result<f64> {
        idx.validate()?;
        Ok(self.shell_profile(f, idx.s, idx.p)?.aggregate(idx.q))
    }
}

/// Besov norm with the default partition of the field's lattice.
pub fn besov_norm(f: &SpectralField, idx: BesovIndex) -> Result<f64> {
    DyadicPartition::for_lattice(*f.lattice()).besov_norm(f, idx)
}

/// Shell profile with the default partition of the field's lattice.
pub fn shell_profile(f: &SpectralField, s: f64, p: f64) -> Result<ShellProfile> {
    DyadicPartition::for_lattice(*f.lattice()).shell_profile(f, s, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyLattice;

    #[test]
    fn index_constructors() {
        let d = BesovIndex::data(4.0, 2.0).unwrap();
        assert_eq!(d.s, -2.5);
        assert!(d.is_critical_data());
        let s = BesovIndex::solution(f64::INFINITY, 2.0).unwrap();
        assert_eq!(s.s, -1.0);
        assert!(BesovIndex::new(0.0, 0.5, 2.0).is_err());
        let js = serde_json::to_string(&s).unwrap();
        assert!(js.contains("\"inf\""));
        let back: BesovIndex = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn aggregation() {
        assert_eq!(aggregate(&[1.0, 1.0], 1.0), 2.0);
        assert!((aggregate(&[1.0, 1.0], 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(aggregate(&[3.0, 1.0], f64::INFINITY), 3.0);
        assert_eq!(aggregate(&[], 2.0), 0.0);
        let graded: Vec<f64> = (0..60).map(|k| 2f64.powi(-k)).collect();
        assert!((aggregate(&graded, 1.0) - (2.0 - 2f64.powi(-59))).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_examples() {
        let lat = FrequencyLattice::new(64, 0.25).unwrap();
        let f = SpectralField::cosine(lat, [4, 0], 2.0).unwrap();
        for &s in &[-1.0, 0.0, 0.7] {
            let n = besov_norm(&f, BesovIndex::new(s, f64::INFINITY, 2.0).unwrap()).unwrap();
            assert!((n - 2.0).abs() < 1e-12);
        }
        let f = SpectralField::cosine(lat, [16, 0], 2.0).unwrap();
        let n = besov_norm(&f, BesovIndex::new(0.5, f64::INFINITY, 1.0).unwrap()).unwrap();
        assert!((n - 2f64.powf(0.5 * 2.0 + 1.0)).abs() < 1e-12);
        let f = SpectralField::cosine(lat, [4, 0], 1.0)
            .unwrap()
            .try_add(&SpectralField::cosine(lat, [8, 0], 1.0).unwrap())
            .unwrap();
        let one = besov_norm(&f, BesovIndex::new(0.0, f64::INFINITY, 1.0).unwrap()).unwrap();
        let two = besov_norm(&f, BesovIndex::new(0.0, f64::INFINITY, 2.0).unwrap()).unwrap();
        assert!((one - 2.0).abs() < 1e-12);
        assert!((two - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_shell_lp_exact() {
        let lat = FrequencyLattice::new(64, 0.25).unwrap();
        let f = SpectralField::cosine(lat, [4, 0], 1.0).unwrap();
        let l = lat.box_side();
        // ||cos||_2 over the box is L / sqrt 2.
        let n = besov_norm(&f, BesovIndex::new(0.0, 2.0, 2.0).unwrap()).unwrap();
        assert!((n - l / 2f64.sqrt()).abs() < 1e-12 * l);
    }
}
