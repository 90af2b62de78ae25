use proptest::prelude::*;
use sqglab::lpbesov::{BesovIndex, DyadicPartition};
use sqglab::random::*;
use sqglab::spectral::FrequencyLattice;

fn lat(m: usize, h: f64) -> FrequencyLattice {
    FrequencyLattice::new(m, h).unwrap()
}

#[test]
fn gaussian_coefficients_are_keyed_by_wavevector() {
    let env = SpectralEnvelope::band(0.5, 7.0);
    let small = random_field(lat(32, 0.5), &env, 9, 2).unwrap();
    let big = random_field(lat(64, 0.5), &env, 9, 2).unwrap();
    let sl = *small.lattice();
    for i in 0..sl.len() {
        let k = sl.wavevector(i);
        if sl.is_interior(k) {
            assert_eq!(small.coeff(k), big.coeff(k), "{k:?}");
        }
    }
    let other = random_field(sl, &env, 9, 3).unwrap();
    assert!(other.relative_distance(&small).unwrap() > 0.5);
}

#[test]
fn packets_describe_one_physical_field_on_any_box() {
    let ens = PacketEnsemble::critical(0.5, 3.0, -0.5);
    let a = random_packets(lat(64, 0.25), &ens, 4, 1).unwrap().to_physical(0);
    let b = random_packets(lat(128, 0.125), &ens, 4, 1).unwrap().to_physical(0);
    // Same grid spacing on both boxes; compare near the origin, where the packets live. The
    // mean-zero projection subtracts a box-dependent constant, so compare differences.
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let wrap = |i: i64, m: i64| i.rem_euclid(m) as usize;
    let diff: Vec<f64> = (-20i64..=20)
        .flat_map(|i| (-20i64..=20).map(move |j| (i, j)))
        .map(|(i, j)| a[wrap(i, 64) * 64 + wrap(j, 64)] - b[wrap(i, 128) * 128 + wrap(j, 128)])
        .collect();
    let offset = diff.iter().sum::<f64>() / diff.len() as f64;
    let worst = diff.iter().fold(0.0f64, |m, d| m.max((d - offset).abs()));
    assert!(worst < 1e-6 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn packets_must_fit_the_lattice() {
    let ens = PacketEnsemble::critical(0.5, 3.0, -0.5);
    assert!(random_packets(lat(16, 0.25), &ens, 0, 0).is_err());
    assert!(random_packets(lat(64, 0.5), &ens, 0, 0).is_err());
    assert!(random_field(lat(16, 0.5), &SpectralEnvelope::band(0.1, 0.2), 0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn unit_fields_have_unit_norm(seed in 0u64..1000) {
        let part = DyadicPartition::for_lattice(lat(32, 0.25));
        let idx = BesovIndex::solution(4.0, 2.0).unwrap();
        let f = random_unit_field(&part, &SpectralEnvelope::band(0.25, 3.5), idx, seed, 0).unwrap();
        prop_assert!((part.besov_norm(&f, idx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packet_fields_are_real_and_mean_zero(seed in 0u64..1000) {
        let f = random_packets(lat(64, 0.25), &PacketEnsemble::critical(0.5, 3.0, -0.5), seed, 0).unwrap();
        prop_assert!(f.hermitian_defect() < 1e-15 * f.max_abs_coeff());
        prop_assert_eq!(f.mean().norm(), 0.0);
    }
}
