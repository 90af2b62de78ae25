use proptest::prelude::*;
use sqglab::bilinear::bee_block;
use sqglab::illposed::physical_lp;
use sqglab::lpbesov::*;
use sqglab::random::{random_field, SpectralEnvelope};
use sqglab::spectral::*;

fn lat(m: usize, h: f64) -> FrequencyLattice {
    FrequencyLattice::new(m, h).unwrap()
}

/// `(1/|box|) int |cos|^p` for even integer p: `binom(p, p/2) / 2^p`.
fn cos_moment(p: u32) -> f64 {
    let half = p / 2;
    let binom = (1..=half).fold(1.0, |acc, i| acc * (half + i) as f64 / i as f64);
    binom / 2f64.powi(p as i32)
}

#[test]
fn lp_norm_of_a_cosine_is_exact() {
    let l = lat(64, 0.25);
    let area = l.box_side().powi(2);
    let f = SpectralField::cosine(l, [5, 3], 2.0).unwrap();
    for p in [2u32, 4, 6, 8, 12] {
        let want = 2.0 * (cos_moment(p) * area).powf(1.0 / p as f64);
        let got = physical_lp(&f, p as f64);
        assert!((got / want - 1.0).abs() < 1e-12, "p = {p}: {got} vs {want}");
    }
    assert!((physical_lp(&f, f64::INFINITY) - 2.0).abs() < 1e-12);
}

#[test]
fn l4_of_two_nonresonant_modes() {
    // int (cos A + cos B)^4 = |box| (3/8 + 3/8 + 6/4) when no combination of A, B resonates.
    let l = lat(32, 1.0);
    let f = SpectralField::cosine(l, [1, 0], 1.0).unwrap().try_add(&SpectralField::cosine(l, [0, 3], 1.0).unwrap()).unwrap();
    let want = (2.25 * l.box_side().powi(2)).powf(0.25);
    assert!((physical_lp(&f, 4.0) / want - 1.0).abs() < 1e-12);
}

#[test]
fn lp_quadrature_is_independent_of_lattice_size() {
    // Same continuum field on a box twice as wide: coefficients carried over, norm scales by area^{1/p}.
    let small = lat(32, 0.5);
    let big = lat(64, 0.25);
    let f = random_field(small, &SpectralEnvelope::band(0.5, 3.0), 4, 0).unwrap();
    let g = SpectralField::from_fn(big, |_, k| {
        if k[0] % 2 == 0 && k[1] % 2 == 0 && small.is_interior([k[0] / 2, k[1] / 2]) {
            f.coeff([k[0] / 2, k[1] / 2])
        } else {
            num_complex::Complex64::default()
        }
    });
    for p in [4.0, 8.0] {
        let ratio = physical_lp(&g, p) / physical_lp(&f, p);
        assert!((ratio - 4f64.powf(1.0 / p)).abs() < 1e-12, "p = {p}: {ratio}");
    }
}

#[test]
fn partition_of_unity_on_lattice_points() {
    let l = lat(128, 0.125);
    let part = DyadicPartition::for_lattice(l);
    for idx in 1..l.len() {
        let k = l.wavevector(idx);
        if !l.is_interior(k) || k == [0, 0] {
            continue;
        }
        let xi = l.frequency(idx);
        let r = xi[0].hypot(xi[1]);
        let s: f64 = part.shells().map(|j| part.phi_hat(j, r)).sum();
        assert!((s - 1.0).abs() < 1e-14, "r = {r}: {s}");
    }
}

#[test]
fn shells_reconstruct_band_limited_fields() {
    let l = lat(64, 0.25);
    let part = DyadicPartition::for_lattice(l);
    let f = random_field(l, &SpectralEnvelope::band(0.25, 7.5), 8, 0).unwrap();
    let mut sum = SpectralField::zeros(l, Rank::Scalar);
    for j in part.shells() {
        sum = sum.try_add(&part.shell_project(&f, j).unwrap()).unwrap();
    }
    assert!(sum.relative_distance(&f).unwrap() < 1e-14);
    assert_eq!(part.out_of_window_fraction(&f), 0.0);
}

#[test]
fn probe_is_reproduced_by_its_shell() {
    let l = lat(256, 0.0625);
    let part = DyadicPartition::for_lattice(l);
    for j in -1..=2 {
        let probe = ProbeFunction::with_defaults(part, j).unwrap();
        for idx in 0..l.len() {
            let xi = l.frequency(idx);
            let h = probe.hat(xi);
            assert!((h - probe.hat_definitional(xi)).abs() < 1e-14);
            if h > 0.0 {
                assert!((part.phi_hat(j, xi[0].hypot(xi[1])) - 1.0).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn narrow_probe_gap_is_rejected() {
    let part = DyadicPartition::for_lattice(lat(64, 0.25));
    assert!(ProbeFunction::new(part, 0, 1, DEFAULT_PROBE_DIRECTION).is_err());
    assert!(ProbeFunction::new(part, 0, 3, [1.0, 1.0]).is_err());
}

#[test]
fn bony_split_adds_up_to_the_block_form() {
    let l = lat(64, 0.25);
    let part = DyadicPartition::for_lattice(l);
    let f = random_field(l, &SpectralEnvelope::band(0.25, 3.0), 11, 0).unwrap();
    let g = random_field(l, &SpectralEnvelope::band(0.25, 3.0), 11, 1).unwrap();
    let split = part.bony_split(&f, &g).unwrap();
    let direct = bee_block(&f, &g).unwrap();
    assert!(split.total().relative_distance(&direct).unwrap() < 1e-12);
}

#[test]
fn besov_index_helpers() {
    let sol = BesovIndex::solution(4.0, 2.0).unwrap();
    assert_eq!(sol.s, -0.5);
    assert_eq!(sol.data_companion(), BesovIndex::data(4.0, 2.0).unwrap());
    assert!(BesovIndex::new(0.0, 0.5, 2.0).is_err());
    assert!(BesovIndex::new(f64::NAN, 2.0, 2.0).is_err());
}

#[test]
fn single_shell_besov_norm_equals_weighted_lp() {
    let l = lat(64, 0.25);
    let part = DyadicPartition::for_lattice(l);
    // |xi| = 1 sits on the plateau of shell 0 and outside every other shell.
    let f = SpectralField::cosine(l, [4, 0], 1.0).unwrap();
    let idx = BesovIndex::new(0.7, 4.0, 2.0).unwrap();
    let want = physical_lp(&f, 4.0);
    assert!((part.besov_norm(&f, idx).unwrap() / want - 1.0).abs() < 1e-12);
    let twice = SpectralField::cosine(l, [8, 0], 1.0).unwrap();
    let want = 2f64.powf(0.7) * physical_lp(&twice, 4.0);
    assert!((part.besov_norm(&twice, idx).unwrap() / want - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_pointwise(r in 0.01f64..50.0) {
        let part = DyadicPartition::for_lattice(lat(1024, 0.125));
        let prof = part.profile();
        let (lo, hi) = part.covered_annulus();
        if r >= lo && r <= hi {
            prop_assert!((part.partition_sum(r) - 1.0).abs() < 1e-14);
        }
        for j in part.shells() {
            let v = part.phi_hat(j, r);
            prop_assert!((0.0..=1.0).contains(&v));
            let t = r / 2f64.powi(j);
            if t <= prof.lower / 2.0 || t >= prof.upper {
                prop_assert_eq!(v, 0.0);
            }
            if t >= prof.upper / 2.0 && t <= prof.lower {
                prop_assert_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn besov_norm_is_homogeneous_and_subadditive(seed in 0u64..500, a in 0.1f64..10.0) {
        let l = lat(32, 0.25);
        let part = DyadicPartition::for_lattice(l);
        let env = SpectralEnvelope::band(0.25, 3.5);
        let f = random_field(l, &env, seed, 0).unwrap();
        let g = random_field(l, &env, seed, 1).unwrap();
        let idx = BesovIndex::solution(4.0, 2.0).unwrap();
        let nf = part.besov_norm(&f, idx).unwrap();
        let ng = part.besov_norm(&g, idx).unwrap();
        prop_assert!((part.besov_norm(&f.scale(a), idx).unwrap() / (a * nf) - 1.0).abs() < 1e-12);
        prop_assert!(part.besov_norm(&f.try_add(&g).unwrap(), idx).unwrap() <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn critical_norms_are_scale_invariant(m in -2i32..=2, p in prop::sample::select(vec![2.0, 4.0]), seed in 0u64..100) {
        // Shell-supported field on a lattice wide enough for every rescaled window.
        let l = lat(64, 0.25);
        let f = SpectralField::from_fn(l, |xi, _| {
            let r = xi[0].hypot(xi[1]);
            if (0.9..=1.2).contains(&r) { num_complex::Complex64::new(1.0, 0.0) } else { num_complex::Complex64::default() }
        });
        let f = f.try_add(&random_field(l, &SpectralEnvelope::band(0.9, 1.2), seed, 0).unwrap()).unwrap();
        let f = f.map_coefficients(|_, c| c).with_zero_mean();
        let f = SpectralField::from_physical(l, &f.to_physical(0)).unwrap();
        let sol = BesovIndex::solution(p, 2.0).unwrap();
        let dat = BesovIndex::data(p, 2.0).unwrap();
        let before = (besov_norm(&f, sol).unwrap(), besov_norm(&f, dat).unwrap());
        let s = dyadic_rescale(&f, m, ScalingWeight::Solution).unwrap();
        let d = dyadic_rescale(&f, m, ScalingWeight::Forcing).unwrap();
        prop_assert!((besov_norm(&s, sol).unwrap() / before.0 - 1.0).abs() < 1e-8);
        prop_assert!((besov_norm(&d, dat).unwrap() / before.1 - 1.0).abs() < 1e-8);
    }
}
