use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Rank, SpectralField};
use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};

/// Homogeneous Fourier multipliers; every kind evaluates to 0 at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Multiplier {
    /// `|xi|^alpha`.
    Power { alpha: f64 },
    /// `i xi_k` for axis `k` in `{0, 1}`.
    Derivative { axis: usize },
    /// `i xi_perp = i (-xi_2, xi_1)`, vector valued.
    PerpGradient,
    /// Product of factors; at most one may be vector valued.
    Product { factors: Vec<Multiplier> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolValue {
    Scalar(Complex64),
    Vector([Complex64; 2]),
}

impl Multiplier {
    pub fn power(alpha: f64) -> Self {
        Multiplier::Power { alpha }
    }

    /// `(-Delta)^{-1}`.
    pub fn inverse_laplacian() -> Self {
        Multiplier::power(-2.0)
    }

    /// `grad_perp (-Delta)^{-1/2}`.
    pub fn riesz_perp() -> Self {
        Multiplier::Product {
            factors: vec![Multiplier::PerpGradient, Multiplier::power(-1.0)],
        }
    }

    pub fn is_vector(&self) -> bool {
        self.vector_factors() > 0
    }

    fn vector_factors(&self) -> usize {
        match self {
            Multiplier::PerpGradient => 1,
            Multiplier::Product { factors } => factors.iter().map(|f| f.vector_factors()).sum(),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Multiplier::Power { alpha } if !alpha.is_finite() => Err(Error::InvalidParameter(
                format!("power multiplier exponent must be finite, got {alpha}"),
            )),
            Multiplier::Derivative { axis } if *axis > 1 => Err(Error::InvalidParameter(format!(
                "derivative axis must be 0 or 1, got {axis}"
            ))),
            Multiplier::Product { factors } => {
                for f in factors {
                    f.validate()?;
                }
                if self.vector_factors() > 1 {
                    return Err(Error::InvalidParameter(
                        "product multiplier with more than one vector factor".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, xi: [f64; 2]) -> SymbolValue {
        let zero = Complex64::default();
        if xi == [0.0, 0.0] {
            return if self.is_vector() {
                SymbolValue::Vector([zero, zero])
            } else {
                SymbolValue::Scalar(zero)
            };
        }
        match self {
            Multiplier::Power { alpha } => {
                let r = xi[0].hypot(xi[1]);
                SymbolValue::Scalar(Complex64::new(r.powf(*alpha), 0.0))
            }
            Multiplier::Derivative { axis } => SymbolValue::Scalar(Complex64::new(0.0, xi[*axis])),
            Multiplier::PerpGradient => {
                SymbolValue::Vector([Complex64::new(0.0, -xi[1]), Complex64::new(0.0, xi[0])])
            }
            Multiplier::Product { factors } => {
                let mut scalar = Complex64::new(1.0, 0.0);
                let mut vector: Option<[Complex64; 2]> = None;
                for f in factors {
                    match f.eval(xi) {
                        SymbolValue::Scalar(s) => scalar *= s,
                        SymbolValue::Vector(v) => vector = Some(v),
                    }
                }
                match vector {
                    Some(v) => SymbolValue::Vector([v[0] * scalar, v[1] * scalar]),
                    None => SymbolValue::Scalar(scalar),
                }
            }
        }
    }

    fn smallest_negative_power(&self) -> Option<f64> {
        match self {
            Multiplier::Power { alpha } if *alpha < 0.0 => Some(*alpha),
            Multiplier::Product { factors } => {
                let total: f64 = factors
                    .iter()
                    .filter_map(|f| match f {
                        Multiplier::Power { alpha } => Some(*alpha),
                        _ => None,
                    })
                    .sum();
                (total < 0.0).then_some(total)
            }
            _ => None,
        }
    }
}

/// Coefficientwise `m(xi) * f(xi)`. Vector symbols map scalars to 2-vectors.
pub fn apply_symbol(f: &SpectralField, m: &Multiplier) -> Result<SpectralField> {
    m.validate()?;
    let lat = *f.lattice();
    let len = lat.len();
    let out = if m.is_vector() {
        f.expect_rank(Rank::Scalar)?;
        let mut data = vec![Complex64::default(); 2 * len];
        for (idx, &c) in f.component(0).iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            if let SymbolValue::Vector(v) = m.eval(lat.frequency(idx)) {
                data[idx] = v[0] * c;
                data[len + idx] = v[1] * c;
            }
        }
        SpectralField::from_coefficients(lat, Rank::Vector, data)?
    } else {
        f.map_coefficients(|idx, c| {
            if c == Complex64::default() {
                return c;
            }
            match m.eval(lat.frequency(idx)) {
                SymbolValue::Scalar(s) => s * c,
                SymbolValue::Vector(_) => unreachable!(),
            }
        })
    };
    if let Some(bad) = out.coefficients().iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        let xi = lat.frequency(bad % len);
        let detail = match m.smallest_negative_power() {
            Some(alpha) => format!(
                "symbol |xi|^{alpha} overflows at xi = ({}, {}); smallest active |xi| is too small for this exponent",
                xi[0], xi[1]
            ),
            None => format!("non-finite coefficient at xi = ({}, {})", xi[0], xi[1]),
        };
        return Err(Error::NonFinite(detail));
    }
    Ok(out)
}

/// `(-Delta)^{-1} f`.
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    f.expect_rank(Rank::Scalar)?;
    apply_symbol(f, &Multiplier::inverse_laplacian())
}

/// `u = grad_perp (-Delta)^{-1/2} theta`, i.e. `u_hat = i xi_perp / |xi| theta_hat`.
pub fn riesz_velocity(theta: &SpectralField) -> Result<SpectralField> {
    apply_symbol(theta, &Multiplier::riesz_perp())
}

/// `div v = sum_k i xi_k v_k`.
pub fn divergence(v: &SpectralField) -> Result<SpectralField> {
    v.expect_rank(Rank::Vector)?;
    let lat = *v.lattice();
    let (a, b) = (v.component(0), v.component(1));
    let data = (0..lat.len())
        .map(|idx| {
            let xi = lat.frequency(idx);
            Complex64::new(0.0, 1.0) * (a[idx] * xi[0] + b[idx] * xi[1])
        })
        .collect();
    SpectralField::from_coefficients(lat, Rank::Scalar, data)
}

/// Amplitude weight applied by a dyadic rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingWeight {
    /// `lambda * theta(lambda x)`, the solution scaling.
    Solution,
    /// `lambda^3 * f(lambda x)`, the forcing scaling.
    Forcing,
}

impl ScalingWeight {
    fn factor(self, lambda: f64) -> f64 {
        match self {
            ScalingWeight::Solution => lambda,
            ScalingWeight::Forcing => lambda * lambda * lambda,
        }
    }
}

/// `lambda theta(lambda x)` with `lambda = 2^m` as an exact plane rescaling.
///
/// The lattice spacing is multiplied by `lambda` and the coefficient array by the
/// weight, so the box shrinks by `lambda` together with the field. This is the
/// discrete form that leaves critical norms invariant.
pub fn dyadic_rescale(f: &SpectralField, m: i32, weight: ScalingWeight) -> Result<SpectralField> {
    let lambda = 2f64.powi(m);
    let lat = f.lattice().dyadic(m);
    let a = weight.factor(lambda);
    let data = f.coefficients().iter().map(|c| c * a).collect();
    SpectralField::from_coefficients(lat, f.rank(), data)
}

/// `lambda theta(lambda x)` on the same periodic box: coefficient at `k` moves to `lambda k`.
///
/// For `m < 0` the box-periodic field must only contain wavevectors divisible by `2^{-m}`.
/// Critical norms of the periodic image pick up a factor `lambda^{2/p}` here, since
/// `lambda^2` periods fit in the box.
pub fn dyadic_relocate(f: &SpectralField, m: i32, weight: ScalingWeight) -> Result<SpectralField> {
    let lat: FrequencyLattice = *f.lattice();
    let len = lat.len();
    let a = weight.factor(2f64.powi(m));
    let mut out = SpectralField::zeros(lat, f.rank());
    for c in 0..f.rank().components() {
        let src = f.component(c);
        let dst = out.component_mut(c);
        for (idx, &v) in src.iter().enumerate() {
            if v == Complex64::default() {
                continue;
            }
            let k = lat.wavevector(idx);
            let target = if m >= 0 {
                [k[0] << m, k[1] << m]
            } else {
                let d = 1i64 << (-m);
                if k[0] % d != 0 || k[1] % d != 0 {
                    return Err(Error::SpectrumOverflow(format!(
                        "wavevector {k:?} is not divisible by {d}; relocation by 2^{m} leaves the lattice"
                    )));
                }
                [k[0] / d, k[1] / d]
            };
            if !lat.is_interior(target) {
                return Err(Error::SpectrumOverflow(format!(
                    "wavevector {k:?} relocates to {target:?} beyond the Nyquist frequency"
                )));
            }
            dst[lat.index_of(target).unwrap()] = v * a;
        }
        debug_assert_eq!(dst.len(), len);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(32, 1.0).unwrap()
    }

    #[test]
    fn power_examples() {
        let f = SpectralField::cosine(lat(), [1, 0], 1.0).unwrap();
        let g = apply_symbol(&f, &Multiplier::power(-2.0)).unwrap();
        assert!(f.relative_distance(&g).unwrap() < 1e-15);
        let f = SpectralField::cosine(lat(), [3, 4], 1.0).unwrap();
        let g = apply_symbol(&f, &Multiplier::power(-1.0)).unwrap();
        assert!((g.coeff([3, 4]).re - 0.1).abs() < 1e-15);
        let f = SpectralField::cosine(lat(), [2, 2], 1.0).unwrap();
        let g = inverse_laplacian(&f).unwrap();
        assert!((g.coeff([2, 2]).re - 0.5 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_is_zeroed() {
        let f = SpectralField::from_fn(lat(), |_, _| Complex64::new(1.0, 0.0));
        let g = apply_symbol(&f, &Multiplier::power(0.5)).unwrap();
        assert_eq!(g.mean(), Complex64::default());
    }

    #[test]
    fn riesz_of_cosines() {
        let f = SpectralField::cosine(lat(), [1, 0], 1.0).unwrap();
        let u = riesz_velocity(&f).unwrap();
        let s = SpectralField::sine(lat(), [1, 0], -1.0).unwrap();
        assert!(u.component_field(0).coefficient_norm() < 1e-15);
        assert!(u.component_field(1).relative_distance(&s).unwrap() < 1e-15);

        let f = SpectralField::cosine(lat(), [0, 1], 1.0).unwrap();
        let u = riesz_velocity(&f).unwrap();
        let s = SpectralField::sine(lat(), [0, 1], 1.0).unwrap();
        assert!(u.component_field(0).relative_distance(&s).unwrap() < 1e-15);
        assert!(u.component_field(1).coefficient_norm() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        let tiny = FrequencyLattice::new(8, 1e-200).unwrap();
        let f = SpectralField::cosine(tiny, [1, 0], 1.0).unwrap();
        let err = apply_symbol(&f, &Multiplier::power(-3.0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn rescale_cosine() {
        let f = SpectralField::cosine(lat(), [1, 0], 1.0).unwrap();
        let g = dyadic_rescale(&f, 1, ScalingWeight::Solution).unwrap();
        assert_eq!(g.lattice().spacing(), 2.0);
        assert!((g.coeff([1, 0]).re - 1.0).abs() < 1e-15);
        let g = dyadic_relocate(&f, 1, ScalingWeight::Solution).unwrap();
        assert!((g.coeff([2, 0]).re - 1.0).abs() < 1e-15);
        assert!(dyadic_relocate(&f, -1, ScalingWeight::Solution).is_err());
        let big = SpectralField::cosine(lat(), [10, 0], 1.0).unwrap();
        assert!(matches!(
            dyadic_relocate(&big, 1, ScalingWeight::Solution),
            Err(Error::SpectrumOverflow(_))
        ));
    }

    #[test]
    fn bad_products_rejected() {
        let m = Multiplier::Product {
            factors: vec![Multiplier::PerpGradient, Multiplier::PerpGradient],
        };
        let f = SpectralField::cosine(lat(), [1, 0], 1.0).unwrap();
        assert!(apply_symbol(&f, &m).is_err());
        let v = riesz_velocity(&f).unwrap();
        assert!(riesz_velocity(&v).is_err());
    }
}
