//! The quadratic nonlinearity in three forms: direct frequency quadrature, the
//! symmetric double-product form and the single-divergence form `(-Delta)^{-1} div(theta u)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::fft::Grid;
use crate::spectral::{apply_symbol, riesz_velocity, FrequencyLattice, Multiplier, Rank, SpectralField};

/// Largest `M` accepted by the `O(M^4)` quadrature.
pub const QUADRATURE_MAX_M: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BilinearVariant {
    Quadrature,
    BlockFast,
    DiagonalFast,
}

/// A choice of evaluation route for `B[f, g]` on a fixed lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearForm {
    variant: BilinearVariant,
    lattice: FrequencyLattice,
}

impl BilinearForm {
    pub fn new(variant: BilinearVariant, lattice: FrequencyLattice) -> Result<Self> {
        if variant == BilinearVariant::Quadrature {
            check_quadrature(&lattice)?;
        }
        Ok(Self { variant, lattice })
    }

    pub fn variant(&self) -> BilinearVariant {
        self.variant
    }

    pub fn apply(&self, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
        self.lattice.check_same(f.lattice())?;
        match self.variant {
            BilinearVariant::Quadrature => bee(f, g),
            BilinearVariant::BlockFast => bee_block(f, g),
            BilinearVariant::DiagonalFast => {
                // Polarization: B[f, g] = (D(f + g) - D(f - g)) / 4.
                let plus = bee_diag_fast(&f.try_add(g)?)?;
                let minus = bee_diag_fast(&f.try_sub(g)?)?;
                Ok(plus.axpy(-1.0, &minus)?.scale(0.25))
            }
        }
    }
}

fn check_quadrature(lat: &FrequencyLattice) -> Result<()> {
    if lat.m() > QUADRATURE_MAX_M {
        Err(Error::QuadratureTooLarge {
            m: lat.m(),
            max: QUADRATURE_MAX_M,
        })
    } else {
        Ok(())
    }
}

fn norm2(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

/// `T[theta, v](xi) = sum_eta (xi - 2 eta) / (2 (|eta| + |xi - eta|)) (x) theta(xi - eta) v(eta)`.
///
/// Terms with `eta = 0` or `xi = eta` are omitted. Output component `(a, b)` pairs the
/// symbol's `a` entry with `v_b`.
pub fn tee(theta: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    theta.expect_rank(Rank::Scalar)?;
    v.expect_rank(Rank::Vector)?;
    theta.lattice().check_same(v.lattice())?;
    let lat = *theta.lattice();
    check_quadrature(&lat)?;
    let h = lat.spacing();
    let len = lat.len();
    let zero = Complex64::default();
    let (v0, v1) = (v.component(0), v.component(1));
    let sources: Vec<([i64; 2], Complex64, Complex64)> = (0..len)
        .filter_map(|idx| {
            let k = lat.wavevector(idx);
            let active = (v0[idx] != zero || v1[idx] != zero) && k != [0, 0] && lat.is_interior(k);
            active.then_some((k, v0[idx], v1[idx]))
        })
        .collect();
    let th = theta.component(0);
    let rows: Vec<[Complex64; 4]> = (0..len)
        .into_par_iter()
        .map(|idx| {
            let k = lat.wavevector(idx);
            let mut t = [zero; 4];
            if !lat.is_interior(k) {
                return t;
            }
            let xi = [h * k[0] as f64, h * k[1] as f64];
            for &(ke, a, b) in &sources {
                let kd = [k[0] - ke[0], k[1] - ke[1]];
                if kd == [0, 0] || !lat.is_interior(kd) {
                    continue;
                }
                let c = th[lat.index_of(kd).unwrap()];
                if c == zero {
                    continue;
                }
                let eta = [h * ke[0] as f64, h * ke[1] as f64];
                let d = [xi[0] - eta[0], xi[1] - eta[1]];
                let w = 0.5 / (norm2(eta) + norm2(d));
                let s = [(xi[0] - 2.0 * eta[0]) * w, (xi[1] - 2.0 * eta[1]) * w];
                t[0] += c * a * s[0];
                t[1] += c * b * s[0];
                t[2] += c * a * s[1];
                t[3] += c * b * s[1];
            }
            t
        })
        .collect();
    let mut data = vec![zero; 4 * len];
    for (idx, t) in rows.into_iter().enumerate() {
        for (c, val) in t.into_iter().enumerate() {
            data[c * len + idx] = val;
        }
    }
    SpectralField::from_coefficients(lat, Rank::Tensor, data)
}

/// `B[theta1, theta2]` by direct quadrature: `i xi_a xi_b T_ab / |xi|^2` with
/// `T = T[(-Delta)^{-1/2} theta1, grad_perp (-Delta)^{-1/2} theta2]`.
pub fn bee(theta1: &SpectralField, theta2: &SpectralField) -> Result<SpectralField> {
    theta1.expect_rank(Rank::Scalar)?;
    theta2.expect_rank(Rank::Scalar)?;
    check_quadrature(theta1.lattice())?;
    let a = apply_symbol(theta1, &Multiplier::power(-1.0))?;
    let v = riesz_velocity(theta2)?;
    let t = tee(&a, &v)?;
    let lat = *theta1.lattice();
    let len = lat.len();
    let data = (0..len)
        .map(|idx| {
            let xi = lat.frequency(idx);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if r2 == 0.0 {
                return Complex64::default();
            }
            let c = |k: usize| t.component(k)[idx];
            let contracted = c(0) * (xi[0] * xi[0]) + (c(1) + c(2)) * (xi[0] * xi[1]) + c(3) * (xi[1] * xi[1]);
            Complex64::i() * contracted / r2
        })
        .collect();
    SpectralField::from_coefficients(lat, Rank::Scalar, data)
}

/// `factor * (-Delta)^{-1} div q` for a vector given by its two coefficient arrays.
fn inverse_laplacian_divergence(
    lat: FrequencyLattice,
    q0: &[Complex64],
    q1: &[Complex64],
    factor: f64,
) -> Result<SpectralField> {
    let data = (0..lat.len())
        .map(|idx| {
            let xi = lat.frequency(idx);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if r2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::i() * (q0[idx] * xi[0] + q1[idx] * xi[1]) * (factor / r2)
            }
        })
        .collect();
    SpectralField::from_coefficients(lat, Rank::Scalar, data)
}

/// `1/2 (-Delta)^{-1} div { f R g + (R f) g }` with `R = grad_perp (-Delta)^{-1/2}`.
pub fn bee_block(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.expect_rank(Rank::Scalar)?;
    g.expect_rank(Rank::Scalar)?;
    f.lattice().check_same(g.lattice())?;
    let lat = *f.lattice();
    let grid = Grid::padded(lat.m());
    let fg = grid.synthesize(f.component(0), Some(g.component(0)));
    let rg = riesz_velocity(g)?;
    let mut q = grid.synthesize(rg.component(0), Some(rg.component(1)));
    drop(rg);
    // f real, so f (Rg_0 + i Rg_1) packs both products.
    q.par_iter_mut().zip(&fg).for_each(|(qv, z)| *qv *= z.re);
    let rf = riesz_velocity(f)?;
    let w = grid.synthesize(rf.component(0), Some(rf.component(1)));
    drop(rf);
    q.par_iter_mut()
        .zip(&fg)
        .zip(&w)
        .for_each(|((qv, z), wv)| *qv += wv * z.im);
    drop(fg);
    drop(w);
    let (q0, q1) = grid.analyze_pair(q);
    inverse_laplacian_divergence(lat, &q0, &q1, 0.5)
}

/// `(-Delta)^{-1} div(theta u)` with `u = riesz_velocity(theta)`, via a dealiased product.
pub fn bee_diag_fast(theta: &SpectralField) -> Result<SpectralField> {
    theta.expect_rank(Rank::Scalar)?;
    let lat = *theta.lattice();
    let grid = Grid::padded(lat.m());
    let u = riesz_velocity(theta)?;
    let mut q = grid.synthesize(u.component(0), Some(u.component(1)));
    drop(u);
    let th = grid.synthesize(theta.component(0), None);
    q.par_iter_mut().zip(&th).for_each(|(qv, t)| *qv *= t.re);
    drop(th);
    let (q0, q1) = grid.analyze_pair(q);
    inverse_laplacian_divergence(lat, &q0, &q1, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(16, 1.0).unwrap()
    }

    fn closed_form_pair() -> (SpectralField, SpectralField) {
        let theta = SpectralField::cosine(lat(), [1, 0], 1.0)
            .unwrap()
            .try_add(&SpectralField::cosine(lat(), [0, 2], 1.0).unwrap())
            .unwrap();
        let want = SpectralField::cosine(lat(), [1, -2], 0.1)
            .unwrap()
            .try_sub(&SpectralField::cosine(lat(), [1, 2], 0.1).unwrap())
            .unwrap();
        (theta, want)
    }

    #[test]
    fn closed_form_all_routes() {
        let (theta, want) = closed_form_pair();
        for got in [
            bee(&theta, &theta).unwrap(),
            bee_block(&theta, &theta).unwrap(),
            bee_diag_fast(&theta).unwrap(),
        ] {
            assert!(got.try_sub(&want).unwrap().max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn parallel_flow_vanishes() {
        let theta = SpectralField::cosine(lat(), [1, 0], 1.0)
            .unwrap()
            .try_add(&SpectralField::cosine(lat(), [3, 0], 0.7).unwrap())
            .unwrap();
        assert!(bee(&theta, &theta).unwrap().max_abs_coeff() < 1e-15);
        assert!(bee_diag_fast(&theta).unwrap().max_abs_coeff() < 1e-15);
    }

    #[test]
    fn quadrature_guard() {
        let big = FrequencyLattice::new(128, 1.0).unwrap();
        let f = SpectralField::cosine(big, [1, 0], 1.0).unwrap();
        assert!(matches!(bee(&f, &f), Err(Error::QuadratureTooLarge { .. })));
        assert!(BilinearForm::new(BilinearVariant::Quadrature, big).is_err());
    }

    #[test]
    fn polarized_diagonal_matches_block() {
        let (theta, _) = closed_form_pair();
        let g = SpectralField::sine(lat(), [2, 1], 0.3).unwrap();
        let form = BilinearForm::new(BilinearVariant::DiagonalFast, lat()).unwrap();
        let a = form.apply(&theta, &g).unwrap();
        let b = bee_block(&theta, &g).unwrap();
        assert!(a.relative_distance(&b).unwrap() < 1e-13);
    }
}
