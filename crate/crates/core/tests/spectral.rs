use num_complex::Complex64;
use proptest::prelude::*;
use sqglab::random::{random_field, SpectralEnvelope};
use sqglab::spectral::*;

fn lat(m: usize, h: f64) -> FrequencyLattice {
    FrequencyLattice::new(m, h).unwrap()
}

/// Convolution by a double loop over wavevectors, restricted to the interior of the box.
fn brute_product(f: &SpectralField, g: &SpectralField) -> Vec<Complex64> {
    let l = *f.lattice();
    let mut out = vec![Complex64::default(); l.len()];
    for a in 0..l.len() {
        let ka = l.wavevector(a);
        let ca = f.coefficients()[a];
        if ca == Complex64::default() {
            continue;
        }
        for b in 0..l.len() {
            let kb = l.wavevector(b);
            let k = [ka[0] + kb[0], ka[1] + kb[1]];
            if l.is_interior(k) {
                out[l.index_of(k).unwrap()] += ca * g.coefficients()[b];
            }
        }
    }
    out
}

#[test]
fn product_matches_brute_force_convolution() {
    let l = lat(16, 0.5);
    let f = random_field(l, &SpectralEnvelope::band(0.4, 3.5), 1, 0).unwrap();
    let g = random_field(l, &SpectralEnvelope::band(0.4, 3.5), 1, 1).unwrap();
    let fast = multiply(&f, &g).unwrap();
    let slow = brute_product(&f, &g);
    let err = fast
        .coefficients()
        .iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-13 * scale, "err {err:e} scale {scale:e}");
}

#[test]
fn product_of_sampled_fields_is_pointwise_when_band_limited() {
    // Both factors live below M/4, so the product is resolved on the native grid.
    let l = lat(32, 1.0);
    let f = random_field(l, &SpectralEnvelope::band(1.0, 6.0), 2, 0).unwrap();
    let g = random_field(l, &SpectralEnvelope::band(1.0, 6.0), 2, 1).unwrap();
    let (pf, pg) = (f.to_physical(0), g.to_physical(0));
    let samples: Vec<f64> = pf.iter().zip(&pg).map(|(a, b)| a * b).collect();
    let direct = SpectralField::from_physical(l, &samples).unwrap();
    let fast = multiply(&f, &g).unwrap();
    assert!(fast.relative_distance(&direct).unwrap() < 1e-13);
}

#[test]
fn cosine_samples_and_coefficients() {
    let l = lat(16, 0.5);
    let f = SpectralField::cosine(l, [2, -3], 1.5).unwrap();
    let x = f.to_physical(0);
    let side = l.box_side();
    for (i, v) in x.iter().enumerate() {
        let (m1, m2) = ((i / 16) as f64, (i % 16) as f64);
        let want = 1.5 * (0.5 * (2.0 * m1 - 3.0 * m2) * side / 16.0).cos();
        assert!((v - want).abs() < 1e-13);
    }
    assert_eq!(f.coeff([2, -3]), Complex64::new(0.75, 0.0));
    assert_eq!(f.coeff([-2, 3]), Complex64::new(0.75, 0.0));
}

#[test]
fn parseval() {
    let l = lat(32, 0.25);
    let f = random_field(l, &SpectralEnvelope::band(0.25, 3.0), 5, 0).unwrap();
    let x = f.to_physical(0);
    let area = l.box_side().powi(2);
    let physical = (x.iter().map(|v| v * v).sum::<f64>() * area / x.len() as f64).sqrt();
    assert!((physical / f.l2_norm() - 1.0).abs() < 1e-12);
}

#[test]
fn riesz_velocity_is_divergence_free_and_norm_preserving() {
    let l = lat(32, 0.5);
    let theta = random_field(l, &SpectralEnvelope::band(0.5, 7.0), 9, 0).unwrap();
    let u = riesz_velocity(&theta).unwrap();
    let div = divergence(&u).unwrap();
    assert!(div.max_abs_coeff() < 1e-14 * theta.max_abs_coeff());
    let norm2 = |c: usize| u.component(c).iter().map(|z| z.norm_sqr()).sum::<f64>();
    let theta2 = theta.coefficients().iter().map(|z| z.norm_sqr()).sum::<f64>();
    assert!(((norm2(0) + norm2(1)) / theta2 - 1.0).abs() < 1e-12);
}

#[test]
fn inverse_laplacian_inverts_the_symbol() {
    let l = lat(16, 0.5);
    let f = SpectralField::sine(l, [3, 1], 2.0).unwrap();
    let g = inverse_laplacian(&f).unwrap();
    let r2 = 0.25 * 10.0;
    assert!((g.coeff([3, 1]) - f.coeff([3, 1]) / r2).norm() < 1e-15);
}

#[test]
fn snapshot_roundtrip_through_bytes() {
    let l = lat(16, 0.5);
    let f = random_field(l, &SpectralEnvelope::band(0.5, 3.0), 3, 0).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&f, &mut buf).unwrap();
    let g = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(f, g);
}

#[test]
fn mismatched_lattices_are_rejected() {
    let f = SpectralField::cosine(lat(16, 0.5), [1, 0], 1.0).unwrap();
    let g = SpectralField::cosine(lat(16, 0.25), [1, 0], 1.0).unwrap();
    assert!(multiply(&f, &g).is_err());
    assert!(f.try_add(&g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_fields_are_hermitian_and_mean_zero(seed in 0u64..1000, lo in 0.3f64..1.0, width in 0.5f64..2.5) {
        let l = lat(16, 0.5);
        let f = random_field(l, &SpectralEnvelope::band(lo, lo + width), seed, 0).unwrap();
        prop_assert!(f.hermitian_defect() == 0.0);
        prop_assert!(f.mean().norm() == 0.0);
        prop_assert!(f.to_physical_complex(0).iter().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn physical_roundtrip(seed in 0u64..1000) {
        let l = lat(16, 1.0);
        let f = random_field(l, &SpectralEnvelope::band(1.0, 7.0), seed, 0).unwrap();
        let g = SpectralField::from_physical(l, &f.to_physical(0)).unwrap();
        prop_assert!(g.relative_distance(&f).unwrap() < 1e-14);
    }

    #[test]
    fn product_is_symmetric_and_real(seed in 0u64..1000) {
        let l = lat(16, 0.5);
        let env = SpectralEnvelope::band(0.5, 3.0);
        let f = random_field(l, &env, seed, 0).unwrap();
        let g = random_field(l, &env, seed, 1).unwrap();
        let fg = multiply(&f, &g).unwrap();
        let gf = multiply(&g, &f).unwrap();
        prop_assert!(fg.relative_distance(&gf).unwrap() < 1e-14);
        prop_assert!(fg.hermitian_defect() < 1e-15 * fg.max_abs_coeff().max(1.0));
    }

    #[test]
    fn dyadic_rescale_keeps_coefficients_and_moves_spacing(m in -2i32..=2, seed in 0u64..100) {
        let l = lat(16, 0.5);
        let f = random_field(l, &SpectralEnvelope::band(0.5, 3.0), seed, 0).unwrap();
        let g = dyadic_rescale(&f, m, ScalingWeight::Solution).unwrap();
        prop_assert_eq!(g.lattice().spacing(), 0.5 * 2f64.powi(m));
        let lambda = 2f64.powi(m);
        for (a, b) in f.coefficients().iter().zip(g.coefficients()) {
            prop_assert!((a * lambda - b).norm() == 0.0);
        }
    }
}
