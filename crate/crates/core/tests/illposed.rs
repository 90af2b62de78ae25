use num_complex::Complex64;
use sqglab::bilinear::bee_diag_fast;
use sqglab::error::Error;
use sqglab::illposed::*;
use sqglab::lpbesov::{besov_norm, BesovIndex, DyadicPartition};
use sqglab::random::{random_field, SpectralEnvelope};
use sqglab::solver::SignConvention;
use sqglab::spectral::*;

fn lat(m: usize, h: f64) -> FrequencyLattice {
    FrequencyLattice::new(m, h).unwrap()
}

#[test]
fn step1_forcing_is_a_modulated_bump() {
    let l = lat(256, 0.25);
    let (n, delta) = (3, 0.1);
    let f = force_step1(l, n, delta).unwrap().to_physical(0);
    let chi = chi_bump(l).unwrap().to_physical(0);
    let amp = delta * 2f64.powf(2.5 * n as f64);
    let dx = l.box_side() / 256.0;
    let mut worst: f64 = 0.0;
    for (i, (&fv, &c)) in f.iter().zip(&chi).enumerate() {
        let x1 = (i / 256) as f64 * dx;
        worst = worst.max((fv - amp * c * (8.0 * x1).cos()).abs());
    }
    assert!(worst < 1e-12 * amp, "{worst:e}");
}

#[test]
fn step1_support_sits_around_the_carrier() {
    let l = lat(256, 0.25);
    let f = force_step1(l, 4, 1.0).unwrap();
    for (i, c) in f.coefficients().iter().enumerate() {
        if *c != Complex64::default() {
            let xi = l.frequency(i);
            let d = (xi[0].abs() - 16.0).hypot(xi[1]);
            assert!(d < 2.0, "{xi:?}");
        }
    }
}

#[test]
fn forcing_rejects_unfit_lattices() {
    assert!(matches!(force_step1(lat(256, 0.5), 3, 1.0), Err(Error::InvalidLattice(_))));
    assert!(matches!(force_step1(lat(256, 0.25), 5, 1.0), Err(Error::SpectrumOverflow(_))));
}

#[test]
fn step2_requires_disjoint_annuli() {
    let l = lat(512, 0.25);
    let tight = ExponentMap::Affine { scale: 1, offset: 1 };
    assert!(matches!(force_step2(l, 3, 1.0, tight, (1, 3)), Err(Error::ShellsNotDisjoint(_))));
    let ok = ExponentMap::Affine { scale: 2, offset: 1 };
    let f = force_step2(l, 2, 1.0, ok, (1, 2)).unwrap();
    // Blocks at 2^3 and 2^5 with bump radius 2 around each.
    for (i, c) in f.coefficients().iter().enumerate() {
        if *c != Complex64::default() {
            let xi = l.frequency(i);
            let d = [8.0, 32.0].map(|k: f64| (xi[0].abs() - k).hypot(xi[1]));
            assert!(d[0] < 2.0 || d[1] < 2.0);
        }
    }
}

#[test]
fn translation_axis_and_orbit() {
    let l = lat(64, 0.25);
    let (d, orbit) = translation_axis(&l, [2, 1]).unwrap();
    assert!((d[0] - 2.0 / 5f64.sqrt()).abs() < 1e-15 && (d[1] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    assert!((orbit - l.box_side() * 5f64.sqrt()).abs() < 1e-12);
    assert!(translation_axis(&l, [2, 2]).is_err());
}

#[test]
fn calibration_meets_its_tolerance() {
    let part = DyadicPartition::for_lattice(lat(256, 0.25));
    let map = ExponentMap::Affine { scale: 1, offset: 0 };
    let cal = calibrate_r(&part, map, (0, 1), [2, 1], 0.05, DEFAULT_SEPARATION).unwrap();
    assert!((cal.additivity - 1.0).abs() <= 0.05);
    assert_eq!(cal.block_l4.len(), 2);
    let env = step3_envelope(&part, map, (0, 1), cal.stride, [2, 1], DEFAULT_SEPARATION).unwrap();
    assert!((physical_lp(&env, 4.0) / cal.envelope_l4 - 1.0).abs() < 1e-14);
}

fn small_step3() -> (FrequencyLattice, Step3Force) {
    let l = lat(256, 0.25);
    let part = DyadicPartition::for_lattice(l);
    let map = ExponentMap::Affine { scale: 1, offset: 0 };
    let cal = calibrate_r(&part, map, (0, 1), [2, 1], 0.05, DEFAULT_SEPARATION).unwrap();
    let spec = ForceSpec::step3(2, 0.1, map, (0, 1), cal.stride, 4).with_translation([2, 1]);
    (l, force_step3(&part, &spec, DEFAULT_SEPARATION).unwrap())
}

#[test]
fn modulated_second_iterate_matches_the_full_product() {
    let (l, s3) = small_step3();
    let f = s3.force.on_lattice(l).unwrap();
    let full = bee_diag_fast(&inverse_laplacian(&f).unwrap()).unwrap().scale(-1.0);
    let low = modulated_second_iterate(&s3.force, SignConvention::Pde).unwrap();
    // The low band ends at |xi| = 8, the band around 2^5 starts at 24.
    let full_low = full.map_coefficients(|i, c| {
        let xi = l.frequency(i);
        if xi[0].hypot(xi[1]) < 16.0 { c } else { Complex64::default() }
    });
    assert!(low.relative_distance(&full_low).unwrap() < 1e-12);
}

#[test]
fn modulated_data_norm_matches_the_full_forcing() {
    let (l, s3) = small_step3();
    let f = s3.force.on_lattice(l).unwrap();
    let idx = BesovIndex::data(4.0, 2.0).unwrap();
    let want = besov_norm(&f, idx).unwrap();
    let got = modulated_data_norm(&s3.force, idx).unwrap();
    assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    assert!(modulated_data_norm(&s3.force, BesovIndex::data(3.0, 2.0).unwrap()).is_err());
}

#[test]
fn split_adds_up_on_random_fields() {
    let l = lat(32, 0.5);
    let theta = random_field(l, &SpectralEnvelope::band(0.5, 4.0), 3, 0).unwrap();
    let direct = bee_diag_fast(&theta).unwrap();
    let probes = [[0.5, 0.0], [1.0, 1.5], [-2.0, 0.5], [0.0, 3.0]];
    let scale = direct.max_abs_coeff();
    for t in iterate2_split(&theta, &direct, &probes).unwrap() {
        assert!((t.total() - t.direct).norm() < 1e-12 * scale, "{t:?}");
    }
    assert!(iterate2_split(&theta, &direct, &[[0.3, 0.0]]).is_err());
}

#[test]
fn split_remainder_decays_with_the_carrier() {
    let l = lat(512, 0.25);
    let probes = [[0.25, 0.25], [0.5, 0.25], [0.25, 0.75]];
    let remainders: Vec<f64> = (3..=5)
        .map(|n| {
            let theta = inverse_laplacian(&force_step1(l, n, 1.0).unwrap()).unwrap();
            let direct = bee_diag_fast(&theta).unwrap();
            let split = iterate2_split(&theta, &direct, &probes).unwrap();
            let main = split.iter().map(|t| t.main.norm()).fold(0.0, f64::max);
            split.iter().map(|t| t.remainder()).fold(0.0, f64::max) / main
        })
        .collect();
    for w in remainders.windows(2) {
        assert!(w[1] / w[0] < 0.7, "{remainders:?}");
    }
}

#[test]
fn lowfreq_bound_checks_its_range() {
    let l = lat(256, 0.25);
    let part = DyadicPartition::for_lattice(l);
    let theta = inverse_laplacian(&force_step1(l, 3, 0.1).unwrap()).unwrap();
    let theta2 = bee_diag_fast(&theta).unwrap();
    let b = lowfreq_lower_bound(&part, &theta2, (part.j_min(), -1)).unwrap();
    assert!(b.value > 0.0);
    assert_eq!(b.value, b.profile.iter().map(|p| p.1).fold(0.0, f64::max));
    assert!(lowfreq_lower_bound(&part, &theta2, (part.j_min() - 1, 0)).is_err());
}
