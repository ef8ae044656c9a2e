//! Finite-basis estimates of the kernel, the extremal derivative `M` and the
//! metric from a [`GramSystem`].
//!
//! With `L` the retained Cholesky factor, `y = L⁻¹ b(z)` and `v = L⁻¹ u(z;X)`:
//! `K_N = |y|²`, and `M_N` is the norm of `v` after projecting out `y`.

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{Domain, Membership};
use crate::error::{BergmanError, Result};
use crate::linalg::PivotedCholesky;
use crate::point::{ComplexPoint, ComplexVector};
use crate::quadrature::{GramSystem, RuleKind, RuleTarget};

/// Spread-based standard error of a qmc estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QmcError {
    pub k: f64,
    pub m: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmanEstimate {
    pub k: f64,
    pub m: f64,
    pub b: f64,
    pub degree: usize,
    pub rank: usize,
    pub dropped: usize,
    pub condition: f64,
    pub rule: RuleKind,
    pub qmc_error: Option<QmcError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSweep {
    pub estimates: Vec<BergmanEstimate>,
    pub converged: bool,
}

impl ConvergenceSweep {
    pub fn last(&self) -> &BergmanEstimate {
        self.estimates.last().expect("sweep has at least one degree")
    }
}

/// Tolerances deciding whether the last two sweep entries agree.
pub const SWEEP_K_TOL: f64 = 1e-4;
pub const SWEEP_B_TOL: f64 = 1e-3;

fn check_point(domain: &Domain, z: &ComplexPoint) -> Result<()> {
    if z.dim() != domain.dim() {
        return Err(BergmanError::DimensionMismatch {
            expected: domain.dim(),
            found: z.dim(),
        });
    }
    if domain.classify(z) != Membership::Interior {
        return Err(BergmanError::NotInterior);
    }
    Ok(())
}

fn check_direction(domain: &Domain, x: &ComplexVector) -> Result<()> {
    if x.dim() != domain.dim() {
        return Err(BergmanError::DimensionMismatch {
            expected: domain.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(K, M)` from one factor and the two evaluation vectors.
fn solve(factor: &PivotedCholesky, b: &[Complex64], u: &[Complex64]) -> Result<(f64, f64)> {
    let y = factor.forward_solve(b);
    let k = norm_sqr(&y);
    if !(k > 0.0) || !k.is_finite() {
        return Err(BergmanError::Numerical("kernel solve collapsed".into()));
    }
    let v = factor.forward_solve(u);
    let c = dot(&y, &v) / k;
    let m2: f64 = v.iter().zip(&y).map(|(vi, yi)| (vi - c * yi).norm_sqr()).sum();
    if !m2.is_finite() {
        return Err(BergmanError::NonFinite);
    }
    Ok((k, m2.sqrt()))
}

/// `K_N(z) = b^H G⁻¹ b`.
pub fn kernel_estimate(gs: &GramSystem, z: &ComplexPoint) -> Result<f64> {
    check_point(gs.domain(), z)?;
    let y = gs.factor().forward_solve(&gs.eval(z.coords()));
    let k = norm_sqr(&y);
    if !(k > 0.0) || !k.is_finite() {
        return Err(BergmanError::Numerical("kernel solve collapsed".into()));
    }
    Ok(k)
}

/// `M_N(z;X)`, the largest `|f'(z)X|` over unit-norm `f` in the span with `f(z) = 0`.
pub fn m_estimate(gs: &GramSystem, z: &ComplexPoint, x: &ComplexVector) -> Result<f64> {
    check_point(gs.domain(), z)?;
    check_direction(gs.domain(), x)?;
    if x.is_zero() {
        return Ok(0.0);
    }
    Ok(solve(
        gs.factor(),
        &gs.eval(z.coords()),
        &gs.eval_derivative(z.coords(), x.coords()),
    )?
    .1)
}

/// `∂_X K_N(z) = 2 Re(b^H G⁻¹ u)`, the real derivative along `X`.
pub fn kernel_derivative(gs: &GramSystem, z: &ComplexPoint, x: &ComplexVector) -> Result<f64> {
    check_point(gs.domain(), z)?;
    check_direction(gs.domain(), x)?;
    let y = gs.factor().forward_solve(&gs.eval(z.coords()));
    let v = gs.factor().forward_solve(&gs.eval_derivative(z.coords(), x.coords()));
    Ok(2.0 * dot(&y, &v).re)
}

fn spread(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

pub fn metric_estimate(gs: &GramSystem, z: &ComplexPoint, x: &ComplexVector) -> Result<BergmanEstimate> {
    check_point(gs.domain(), z)?;
    check_direction(gs.domain(), x)?;
    let b = gs.eval(z.coords());
    let u = gs.eval_derivative(z.coords(), x.coords());
    let (k, m) = solve(gs.factor(), &b, &u)?;
    let qmc_error = if gs.stream_factors().len() > 1 {
        let mut ks = Vec::new();
        let mut ms = Vec::new();
        let mut bs = Vec::new();
        for f in gs.stream_factors() {
            let (ks_, ms_) = solve(f, &b, &u)?;
            ks.push(ks_);
            ms.push(ms_);
            bs.push(ms_ / ks_.sqrt());
        }
        Some(QmcError {
            k: spread(&ks),
            m: spread(&ms),
            b: spread(&bs),
        })
    } else {
        None
    };
    Ok(BergmanEstimate {
        k,
        m,
        b: m / k.sqrt(),
        degree: gs.degree(),
        rank: gs.rank(),
        dropped: gs.dropped().len(),
        condition: gs.condition(),
        rule: gs.kind(),
        qmc_error,
    })
}

/// Agreement test on the last two entries of a sweep.
pub fn sweep_converged(estimates: &[BergmanEstimate]) -> bool {
    match estimates {
        [.., a, b] => {
            let k_ok = (a.k - b.k).abs() <= SWEEP_K_TOL * b.k;
            let b_ok = (a.b - b.b).abs() <= SWEEP_B_TOL * b.b.abs();
            k_ok && b_ok
        }
        _ => false,
    }
}

/// Estimates at each degree in `degrees` from one rule sized for the largest.
pub fn convergence_sweep(
    domain: &Domain,
    z: &ComplexPoint,
    x: &ComplexVector,
    degrees: &[usize],
    target: &RuleTarget,
) -> Result<ConvergenceSweep> {
    if degrees.is_empty() || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BergmanError::InvalidArgument(
            "degree list must be nonempty and increasing".into(),
        ));
    }
    check_point(domain, z)?;
    check_direction(domain, x)?;
    let top = *degrees.last().expect("nonempty");
    let full = GramSystem::build(domain, &RuleTarget { degree: top, ..*target })?;
    sweep_with(&full, z, x, degrees)
}

/// Sweep over leading blocks of an existing system.
pub fn sweep_with(
    full: &GramSystem,
    z: &ComplexPoint,
    x: &ComplexVector,
    degrees: &[usize],
) -> Result<ConvergenceSweep> {
    let estimates = degrees
        .iter()
        .map(|&d| {
            if d == full.degree() {
                metric_estimate(full, z, x)
            } else {
                metric_estimate(&full.truncated(d)?, z, x)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceSweep {
        converged: sweep_converged(&estimates),
        estimates,
    })
}
