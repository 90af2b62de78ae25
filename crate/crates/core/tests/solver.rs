use sqglab::bilinear::bee_block;
use sqglab::lpbesov::{besov_norm, BesovIndex};
use sqglab::random::{random_field, SpectralEnvelope};
use sqglab::solver::*;
use sqglab::spectral::*;

fn lat() -> FrequencyLattice {
    FrequencyLattice::new(32, 0.5).unwrap()
}

fn data(amplitude: f64, seed: u64) -> SpectralField {
    let f = random_field(lat(), &SpectralEnvelope::band(0.5, 5.0), seed, 0).unwrap();
    let n = besov_norm(&f, BesovIndex::data(4.0, 2.0).unwrap()).unwrap();
    f.scale(amplitude / n)
}

fn cfg() -> SolveConfig {
    SolveConfig {
        tol: 1e-12,
        ..SolveConfig::default()
    }
}

#[test]
fn small_data_converges_to_a_fixed_point() {
    let f = data(0.05, 1);
    let out = picard_solve(&f, &cfg()).unwrap();
    assert_eq!(out.verdict, Verdict::Converged);
    assert!(out.fixed_point_residual < 1e-11);
    assert!(out.trace.ratios_from(2).iter().all(|&r| r < 0.5));
    // Independent check with the symmetric block form.
    let lf = inverse_laplacian(&f).unwrap();
    let rhs = lf.axpy(-1.0, &bee_block(&out.theta, &out.theta).unwrap()).unwrap();
    assert!(rhs.relative_distance(&out.theta).unwrap() < 1e-11);
    let pde = out.trace.last().unwrap().pde_residual.unwrap();
    assert!(pde < 1e-10, "pde residual {pde:e}");
}

#[test]
fn limit_does_not_depend_on_the_start() {
    let f = data(0.05, 2);
    let a = picard_solve(&f, &cfg()).unwrap();
    let start = data(0.05, 3).scale(0.1);
    let start = inverse_laplacian(&start).unwrap();
    let b = picard_solve_from(&f, &start, &cfg()).unwrap();
    assert_eq!(b.verdict, Verdict::Converged);
    assert!(a.theta.relative_distance(&b.theta).unwrap() < 1e-10);
}

#[test]
fn sign_conventions_are_related_by_reflection() {
    // -theta_pde(-f) solves theta = L f + B[theta, theta].
    let f = data(0.05, 4);
    let pde = picard_solve(&f.scale(-1.0), &cfg()).unwrap();
    let written = picard_solve(
        &f,
        &SolveConfig {
            sign: SignConvention::AsWritten,
            ..cfg()
        },
    )
    .unwrap();
    assert!(written.theta.relative_distance(&pde.theta.scale(-1.0)).unwrap() < 1e-10);
}

#[test]
fn large_data_does_not_converge() {
    let f = data(500.0, 5);
    let out = picard_solve(&f, &SolveConfig { max_iter: 40, ..cfg() }).unwrap();
    assert_ne!(out.verdict, Verdict::Converged);
}

#[test]
fn perturbation_reassembles_the_full_solution() {
    let f = data(0.05, 6);
    let full = picard_solve(&f, &cfg()).unwrap();
    let theta1 = inverse_laplacian(&f).unwrap();
    let theta2 = sqglab::bilinear::bee_diag_fast(&theta1).unwrap().scale(-1.0);
    let pert = perturbation_solve(&theta1, &theta2, &cfg()).unwrap();
    assert_eq!(pert.verdict, Verdict::Converged);
    let total = theta1.try_add(&theta2).unwrap().try_add(&pert.theta_tilde).unwrap();
    assert!(total.relative_distance(&full.theta).unwrap() < 1e-10);
    assert!(pert.full_residual < 1e-10);
}

#[test]
fn invalid_configs_are_rejected() {
    let f = data(0.05, 7);
    for bad in [
        SolveConfig { tol: 0.0, ..cfg() },
        SolveConfig { max_iter: 0, ..cfg() },
        SolveConfig { divergence_factor: 1.0, ..cfg() },
    ] {
        assert!(picard_solve(&f, &bad).is_err());
    }
    let other = FrequencyLattice::new(32, 0.25).unwrap();
    assert!(picard_solve_from(&f, &SpectralField::zeros(other, Rank::Scalar), &cfg()).is_err());
}

#[test]
fn constants_are_deterministic_and_define_the_thresholds() {
    let c = ConstantsConfig { samples: 50, ..ConstantsConfig::default() };
    let l = FrequencyLattice::new(64, 0.25).unwrap();
    let a = estimate_constants(l, &c).unwrap();
    let b = estimate_constants(l, &c).unwrap();
    assert_eq!(a, b);
    assert!(a.c0 > 0.0 && a.c1 > 0.0);
    assert!((a.delta0 * 8.0 * a.c0 * a.c1 - 1.0).abs() < 1e-15);
    assert!((a.eps0 * 4.0 * a.c1 - 1.0).abs() < 1e-15);
    assert!(estimate_constants(l, &ConstantsConfig { samples: 10, ..c }).is_err());
}
