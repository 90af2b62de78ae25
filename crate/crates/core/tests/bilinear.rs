use num_complex::Complex64;
use proptest::prelude::*;
use sqglab::bilinear::*;
use sqglab::random::{random_field, SpectralEnvelope};
use sqglab::spectral::*;

fn lat(m: usize, h: f64) -> FrequencyLattice {
    FrequencyLattice::new(m, h).unwrap()
}

fn pair(l: FrequencyLattice, seed: u64, hi: f64) -> (SpectralField, SpectralField) {
    let env = SpectralEnvelope::band(l.spacing(), hi);
    (random_field(l, &env, seed, 0).unwrap(), random_field(l, &env, seed, 1).unwrap())
}

/// `sum conj(a_k) |xi|^2 b_k`, the `H^1` pairing `<-Delta a, b>` up to the box area.
fn h1_pairing(a: &SpectralField, b: &SpectralField) -> Complex64 {
    let l = a.lattice();
    (0..l.len())
        .map(|i| {
            let xi = l.frequency(i);
            a.coefficients()[i].conj() * b.coefficients()[i] * (xi[0] * xi[0] + xi[1] * xi[1])
        })
        .sum()
}

#[test]
fn closed_form_product() {
    let l = lat(16, 1.0);
    let theta = SpectralField::cosine(l, [1, 0], 1.0).unwrap().try_add(&SpectralField::cosine(l, [0, 2], 1.0).unwrap()).unwrap();
    let want = SpectralField::cosine(l, [1, -2], 0.1).unwrap().try_sub(&SpectralField::cosine(l, [1, 2], 0.1).unwrap()).unwrap();
    for v in [BilinearVariant::Quadrature, BilinearVariant::BlockFast, BilinearVariant::DiagonalFast] {
        let b = BilinearForm::new(v, l).unwrap().apply(&theta, &theta).unwrap();
        assert!(b.try_sub(&want).unwrap().max_abs_coeff() < 1e-14, "{v:?}");
    }
}

#[test]
fn quadrature_size_is_capped() {
    assert!(BilinearForm::new(BilinearVariant::Quadrature, lat(128, 0.25)).is_err());
    assert!(BilinearForm::new(BilinearVariant::BlockFast, lat(128, 0.25)).is_ok());
}

#[test]
fn diagonal_is_orthogonal_to_theta_in_h1() {
    // <-Delta B[theta, theta], theta> = <div(theta u), theta> = 0 for divergence-free u.
    let l = lat(64, 0.5);
    let theta = random_field(l, &SpectralEnvelope::band(0.5, 7.5), 7, 0).unwrap();
    let b = bee_diag_fast(&theta).unwrap();
    let scale = h1_pairing(&b, &b).norm().sqrt() * h1_pairing(&theta, &theta).norm().sqrt();
    assert!(h1_pairing(&b, &theta).norm() < 1e-13 * scale);
}

#[test]
fn single_divergence_form_matches_definition() {
    // (-Delta)^{-1} div(theta u) assembled from spectral primitives.
    let l = lat(32, 0.5);
    let theta = random_field(l, &SpectralEnvelope::band(0.5, 3.5), 2, 0).unwrap();
    let u = riesz_velocity(&theta).unwrap();
    let flux = SpectralField::from_coefficients(
        l,
        Rank::Vector,
        [multiply(&theta, &u.component_field(0)).unwrap(), multiply(&theta, &u.component_field(1)).unwrap()]
            .iter()
            .flat_map(|c| c.coefficients().to_vec())
            .collect(),
    )
    .unwrap();
    let want = inverse_laplacian(&divergence(&flux).unwrap()).unwrap();
    assert!(bee_diag_fast(&theta).unwrap().relative_distance(&want).unwrap() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn three_routes_agree(seed in 0u64..1000) {
        let l = lat(16, 0.5);
        let (f, g) = pair(l, seed, 3.5);
        let q = bee(&f, &g).unwrap();
        let b = bee_block(&f, &g).unwrap();
        let d = BilinearForm::new(BilinearVariant::DiagonalFast, l).unwrap().apply(&f, &g).unwrap();
        prop_assert!(b.relative_distance(&q).unwrap() < 1e-12);
        prop_assert!(d.relative_distance(&q).unwrap() < 1e-12);
        prop_assert!(bee_diag_fast(&f).unwrap().relative_distance(&bee(&f, &f).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn block_form_is_symmetric_bilinear_real_and_mean_zero(seed in 0u64..1000, a in -5.0f64..5.0) {
        let l = lat(32, 0.25);
        let (f, g) = pair(l, seed, 3.5);
        let fg = bee_block(&f, &g).unwrap();
        prop_assert!(fg.relative_distance(&bee_block(&g, &f).unwrap()).unwrap() < 1e-13);
        let scaled = bee_block(&f.scale(a), &g).unwrap();
        prop_assert!(scaled.try_sub(&fg.scale(a)).unwrap().max_abs_coeff() <= 1e-13 * fg.max_abs_coeff() * a.abs().max(1.0));
        prop_assert!(fg.mean().norm() == 0.0);
        prop_assert!(fg.hermitian_defect() < 1e-14 * fg.max_abs_coeff());
    }
}
