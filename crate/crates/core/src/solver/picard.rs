use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bilinear::{bee_block, bee_diag_fast};
use crate::error::{Error, Result};
use crate::lpbesov::{BesovIndex, DyadicPartition};
use crate::spectral::{inverse_laplacian, Rank, SpectralField};

/// Sign in front of the nonlinearity.
///
/// `Pde` solves `theta = L f - B[theta, theta]`, which is `-Delta theta + u . grad theta = f`
/// rearranged. `AsWritten` solves `theta = L f + B[theta, theta]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    #[default]
    Pde,
    AsWritten,
}

impl SignConvention {
    pub fn sigma(self) -> f64 {
        match self {
            SignConvention::Pde => -1.0,
            SignConvention::AsWritten => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Solution-space index used for norms and residuals.
    pub index: BesovIndex,
    /// Stop when `||theta_{n+1} - theta_n|| <= tol ||theta_{n+1}||`.
    pub tol: f64,
    pub max_iter: usize,
    pub sign: SignConvention,
    /// Divergence is declared once an iterate exceeds this multiple of the first one.
    pub divergence_factor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            index: BesovIndex::solution(4.0, 2.0).expect("valid index"),
            tol: 1e-10,
            max_iter: 64,
            sign: SignConvention::Pde,
            divergence_factor: 1e6,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.index.validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "divergence_factor must exceed 1, got {}",
                self.divergence_factor
            )));
        }
        Ok(())
    }
}

/// One Picard step.
///
/// `residual` is the relative increment `||theta_n - theta_{n-1}|| / ||theta_n||`;
/// `ratio` is the quotient of successive absolute increments; `pde_residual` is
/// `||-Delta theta_n + u . grad theta_n - f||` in the data norm, relative to `||f||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub norm: f64,
    pub increment: f64,
    pub residual: f64,
    pub ratio: Option<f64>,
    pub pde_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Ratios from iteration `from` on (1-based).
    pub fn ratios_from(&self, from: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.iteration >= from)
            .filter_map(|r| r.ratio)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,norm,residual,ratio,pde_residual\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.iteration,
                num(r.norm),
                num(r.residual),
                r.ratio.map(num).unwrap_or_default(),
                r.pde_residual.map(num).unwrap_or_default()
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub theta: SpectralField,
    pub trace: IterationTrace,
    pub verdict: Verdict,
    /// `||theta - L f - sigma B[theta, theta]|| / ||theta||` at the returned iterate.
    pub fixed_point_residual: f64,
}

struct StepOutput {
    next: SpectralField,
    pde_residual: Option<f64>,
}

struct LoopResult {
    theta: SpectralField,
    trace: IterationTrace,
    verdict: Verdict,
    fixed_point_residual: f64,
}

fn all_finite(f: &SpectralField) -> bool {
    f.coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn fixed_point_loop(
    partition: &DyadicPartition,
    cfg: &SolveConfig,
    init: SpectralField,
    mut step: impl FnMut(&SpectralField) -> Result<StepOutput>,
) -> Result<LoopResult> {
    cfg.validate()?;
    let norm = |f: &SpectralField| partition.besov_norm(f, cfg.index);
    let mut theta = init;
    let mut trace = IterationTrace::default();
    let mut prev_increment: Option<f64> = None;
    let mut reference: Option<f64> = None;
    let mut verdict = Verdict::MaxIterations;
    for n in 1..=cfg.max_iter {
        let out = step(&theta)?;
        if let Some(last) = trace.records.last_mut() {
            last.pde_residual = out.pde_residual;
        }
        let next = out.next;
        if !all_finite(&next) {
            verdict = Verdict::Diverged;
            break;
        }
        let size = norm(&next)?;
        let increment = norm(&next.try_sub(&theta)?)?;
        let residual = if size > 0.0 { increment / size } else { increment };
        let ratio = prev_increment.map(|p| if p > 0.0 { increment / p } else { 0.0 });
        trace.records.push(IterationRecord {
            iteration: n,
            norm: size,
            increment,
            residual,
            ratio,
            pde_residual: None,
        });
        theta = next;
        prev_increment = Some(increment);
        let reference = *reference.get_or_insert(size);
        if !size.is_finite() || (reference > 0.0 && size > cfg.divergence_factor * reference) {
            verdict = Verdict::Diverged;
            break;
        }
        if residual <= cfg.tol {
            verdict = Verdict::Converged;
            break;
        }
    }
    let mut fixed_point_residual = f64::NAN;
    if verdict != Verdict::Diverged {
        let out = step(&theta)?;
        if let Some(last) = trace.records.last_mut() {
            last.pde_residual = out.pde_residual;
        }
        let size = norm(&theta)?;
        let gap = norm(&out.next.try_sub(&theta)?)?;
        fixed_point_residual = if size > 0.0 { gap / size } else { gap };
    }
    Ok(LoopResult {
        theta,
        trace,
        verdict,
        fixed_point_residual,
    })
}

/// `|xi|^2 (theta + B[theta, theta]) - f` in the data norm, relative to `||f||`.
fn pde_residual(
    partition: &DyadicPartition,
    cfg: &SolveConfig,
    theta: &SpectralField,
    b_theta: &SpectralField,
    f: &SpectralField,
    f_norm: f64,
) -> Result<f64> {
    let lat = *theta.lattice();
    let sum = theta.try_add(b_theta)?;
    let lap = sum.map_coefficients(|idx, c| {
        let xi = lat.frequency(idx);
        c * (xi[0] * xi[0] + xi[1] * xi[1])
    });
    let r = partition.besov_norm(&lap.try_sub(f)?.with_zero_mean(), cfg.index.data_companion())?;
    Ok(if f_norm > 0.0 { r / f_norm } else { r })
}

/// Picard iteration from `theta_0 = 0`.
pub fn picard_solve(f: &SpectralField, cfg: &SolveConfig) -> Result<SolveOutcome> {
    picard_solve_from(f, &SpectralField::zeros(*f.lattice(), Rank::Scalar), cfg)
}

/// Picard iteration from a given start.
pub fn picard_solve_from(
    f: &SpectralField,
    init: &SpectralField,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    f.expect_rank(Rank::Scalar)?;
    init.expect_rank(Rank::Scalar)?;
    f.lattice().check_same(init.lattice())?;
    cfg.validate()?;
    let partition = DyadicPartition::for_lattice(*f.lattice());
    let f = f.clone().with_zero_mean();
    let lf = inverse_laplacian(&f)?;
    let f_norm = partition.besov_norm(&f, cfg.index.data_companion())?;
    let sigma = cfg.sign.sigma();
    let result = fixed_point_loop(&partition, cfg, init.clone(), |theta| {
        let b = bee_diag_fast(theta)?;
        let pde = pde_residual(&partition, cfg, theta, &b, &f, f_norm)?;
        Ok(StepOutput {
            next: lf.axpy(sigma, &b)?,
            pde_residual: Some(pde),
        })
    })?;
    if result.verdict == Verdict::Diverged {
        log::warn!("Picard iteration diverged after {} steps", result.trace.len());
    }
    Ok(SolveOutcome {
        theta: result.theta,
        trace: result.trace,
        verdict: result.verdict,
        fixed_point_residual: result.fixed_point_residual,
    })
}

#[derive(Debug, Clone)]
pub struct PerturbationOutcome {
    pub theta_tilde: SpectralField,
    pub trace: IterationTrace,
    pub verdict: Verdict,
    /// PDE residual of `theta1 + theta2 + theta_tilde` with forcing `-Delta theta1`.
    pub full_residual: f64,
}

/// Solves for `theta~` with `theta = theta1 + theta2 + theta~` and `theta1 = L f`:
///
/// `theta~ = sigma (2B[theta1, theta2] + B[theta2, theta2] + 2B[theta1 + theta2, theta~] + B[theta~, theta~])
///          + (sigma B[theta1, theta1] - theta2)`.
///
/// The last bracket vanishes when `theta2` is the second iterate.
pub fn perturbation_solve(
    theta1: &SpectralField,
    theta2: &SpectralField,
    cfg: &SolveConfig,
) -> Result<PerturbationOutcome> {
    theta1.expect_rank(Rank::Scalar)?;
    theta2.expect_rank(Rank::Scalar)?;
    theta1.lattice().check_same(theta2.lattice())?;
    cfg.validate()?;
    let lat = *theta1.lattice();
    let partition = DyadicPartition::for_lattice(lat);
    let sigma = cfg.sign.sigma();
    let p = theta1.try_add(theta2)?;
    let b11 = bee_diag_fast(theta1)?;
    let b12 = bee_block(theta1, theta2)?;
    let b22 = bee_diag_fast(theta2)?;
    let constant = b12
        .scale(2.0 * sigma)
        .axpy(sigma, &b22)?
        .axpy(sigma, &b11)?
        .axpy(-1.0, theta2)?;
    drop((b11, b12, b22));
    let result = fixed_point_loop(
        &partition,
        cfg,
        SpectralField::zeros(lat, Rank::Scalar),
        |tt| {
            let cross = bee_block(&p, tt)?;
            let quad = bee_diag_fast(tt)?;
            Ok(StepOutput {
                next: constant.axpy(2.0 * sigma, &cross)?.axpy(sigma, &quad)?,
                pde_residual: None,
            })
        },
    )?;
    let full_residual = if result.verdict == Verdict::Diverged {
        f64::NAN
    } else {
        let theta = p.try_add(&result.theta)?;
        let f = theta1.map_coefficients(|idx, c| {
            let xi = lat.frequency(idx);
            c * (xi[0] * xi[0] + xi[1] * xi[1])
        });
        let f_norm = partition.besov_norm(&f, cfg.index.data_companion())?;
        let b = bee_diag_fast(&theta)?;
        pde_residual(&partition, cfg, &theta, &b, &f, f_norm)?
    };
    Ok(PerturbationOutcome {
        theta_tilde: result.theta,
        trace: result.trace,
        verdict: result.verdict,
        full_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FrequencyLattice;

    fn lat() -> FrequencyLattice {
        FrequencyLattice::new(32, 0.25).unwrap()
    }

    #[test]
    fn zero_forcing() {
        let f = SpectralField::zeros(lat(), Rank::Scalar);
        let out = picard_solve(&f, &SolveConfig::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Converged);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.theta.max_abs_coeff(), 0.0);
    }

    #[test]
    fn zero_perturbation() {
        let z = SpectralField::zeros(lat(), Rank::Scalar);
        let out = perturbation_solve(&z, &z, &SolveConfig::default()).unwrap();
        assert_eq!(out.theta_tilde.max_abs_coeff(), 0.0);
        assert_eq!(out.verdict, Verdict::Converged);
    }

    #[test]
    fn config_validation() {
        let mut c = SolveConfig::default();
        c.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = SolveConfig::default();
        c.max_iter = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn trace_csv_header_only() {
        let t = IterationTrace::default();
        assert_eq!(t.to_csv(), "iteration,norm,residual,ratio,pde_residual\n");
    }
}
