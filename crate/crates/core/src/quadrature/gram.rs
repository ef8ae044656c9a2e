use num_complex::Complex64;
use rayon::prelude::*;

use super::{build_rule, BasisIndexSet, QuadratureRule, RuleKind, RuleTarget, QMC_STREAMS};
use crate::domain::Domain;
use crate::error::{BergmanError, Result};
use crate::linalg::{HermitianMatrix, PivotedCholesky};

/// Relative pivot threshold below which basis functions are dropped.
pub const DROP_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gram matrix of the scaled monomials `prod ((z_i - c_i) / s_i)^{j_i}` with
/// its pivoted Cholesky factor. Qmc systems also keep one Gram estimate per
/// Halton stream so that derived quantities get a spread-based error bar.
#[derive(Debug, Clone)]
pub struct GramSystem {
    domain: Domain,
    basis: BasisIndexSet,
    center: Vec<Complex64>,
    scale: Vec<f64>,
    gram: HermitianMatrix,
    factor: PivotedCholesky,
    stream_grams: Vec<HermitianMatrix>,
    stream_factors: Vec<PivotedCholesky>,
    kind: RuleKind,
    nodes: usize,
}

impl GramSystem {
    /// Builds a rule for `target` and assembles the Gram matrix of degree `target.degree`.
    pub fn build(domain: &Domain, target: &RuleTarget) -> Result<GramSystem> {
        let basis = BasisIndexSet::new(domain.dim(), target.degree)?;
        let rule = build_rule(domain, target)?;
        GramSystem::from_rule(domain, basis, &rule)
    }

    pub fn from_rule(domain: &Domain, basis: BasisIndexSet, rule: &QuadratureRule) -> Result<GramSystem> {
        if rule.dim != domain.dim() || basis.dim() != domain.dim() {
            return Err(BergmanError::DimensionMismatch {
                expected: domain.dim(),
                found: rule.dim,
            });
        }
        if let Some(exact) = rule.exact_degree {
            if exact < 2 * basis.degree() {
                return Err(BergmanError::InvalidArgument(format!(
                    "rule is exact to degree {exact}, need {}",
                    2 * basis.degree()
                )));
            }
        }
        if rule.is_empty() {
            return Err(BergmanError::Numerical("empty quadrature rule".into()));
        }
        let (center, scale) = frame(rule);
        let n = basis.len();
        let streams = if rule.kind == RuleKind::QmcRejection {
            QMC_STREAMS
        } else {
            1
        };
        let acc = (0..rule.len())
            .into_par_iter()
            .fold(
                || vec![ZERO; streams * n * n],
                |mut acc, q| {
                    let phi = monomials(&basis, &center, &scale, rule.node(q));
                    let s = if streams > 1 { rule.streams[q] as usize } else { 0 };
                    let w = rule.weights[q];
                    let block = &mut acc[s * n * n..(s + 1) * n * n];
                    for i in 0..n {
                        let wi = phi[i] * w;
                        let row = &mut block[i * n..i * n + i + 1];
                        for (k, slot) in row.iter_mut().enumerate() {
                            *slot += wi * phi[k].conj();
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![ZERO; streams * n * n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let fill = |block: &[Complex64], factor: f64| {
            let mut g = HermitianMatrix::zeros(n);
            for i in 0..n {
                for k in 0..=i {
                    let v = block[i * n + k] * factor;
                    g.set(i, k, v);
                    g.set(k, i, v.conj());
                }
                g.set(i, i, Complex64::new(g.get(i, i).re, 0.0));
            }
            g
        };
        let mut total = vec![ZERO; n * n];
        for s in 0..streams {
            for (t, v) in total.iter_mut().zip(&acc[s * n * n..(s + 1) * n * n]) {
                *t += v;
            }
        }
        let gram = fill(&total, 1.0);
        let stream_grams: Vec<HermitianMatrix> = if streams > 1 {
            (0..streams)
                .map(|s| fill(&acc[s * n * n..(s + 1) * n * n], streams as f64))
                .collect()
        } else {
            Vec::new()
        };
        GramSystem::assemble(
            domain.clone(),
            basis,
            center,
            scale,
            gram,
            stream_grams,
            rule.kind,
            rule.len(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        domain: Domain,
        basis: BasisIndexSet,
        center: Vec<Complex64>,
        scale: Vec<f64>,
        gram: HermitianMatrix,
        stream_grams: Vec<HermitianMatrix>,
        kind: RuleKind,
        nodes: usize,
    ) -> Result<GramSystem> {
        if gram.as_slice().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(BergmanError::NonFinite);
        }
        let factor = PivotedCholesky::factor(&gram, DROP_TOLERANCE);
        if factor.rank() == 0 {
            return Err(BergmanError::Numerical("Gram matrix has no positive pivot".into()));
        }
        let stream_factors = stream_grams
            .iter()
            .map(|g| PivotedCholesky::factor(g, DROP_TOLERANCE))
            .collect();
        Ok(GramSystem {
            domain,
            basis,
            center,
            scale,
            gram,
            factor,
            stream_grams,
            stream_factors,
            kind,
            nodes,
        })
    }

    /// The same system restricted to total degree `<= degree` (a leading block).
    pub fn truncated(&self, degree: usize) -> Result<GramSystem> {
        if degree > self.basis.degree() {
            return Err(BergmanError::InvalidArgument(format!(
                "cannot raise degree {} to {degree} without a new rule",
                self.basis.degree()
            )));
        }
        let basis = BasisIndexSet::new(self.domain.dim(), degree)?;
        let m = basis.len();
        GramSystem::assemble(
            self.domain.clone(),
            basis,
            self.center.clone(),
            self.scale.clone(),
            self.gram.leading(m),
            self.stream_grams.iter().map(|g| g.leading(m)).collect(),
            self.kind,
            self.nodes,
        )
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn basis(&self) -> &BasisIndexSet {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn factor(&self) -> &PivotedCholesky {
        &self.factor
    }

    pub fn stream_factors(&self) -> &[PivotedCholesky] {
        &self.stream_factors
    }

    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    pub fn dropped(&self) -> Vec<usize> {
        self.factor.dropped()
    }

    pub fn condition(&self) -> f64 {
        self.factor.condition_estimate()
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Basis values at `z`.
    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        monomials(&self.basis, &self.center, &self.scale, z)
    }

    /// Holomorphic directional derivatives `sum_i x_i d_i phi_j(z)`.
    pub fn eval_derivative(&self, z: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = self.basis.dim();
        let d = self.basis.degree();
        let w: Vec<Complex64> = (0..n).map(|i| (z[i] - self.center[i]) / self.scale[i]).collect();
        let pw = powers(&w, d);
        self.basis
            .indices()
            .iter()
            .map(|j| {
                let mut s = ZERO;
                for i in 0..n {
                    if j[i] == 0 || x[i] == ZERO {
                        continue;
                    }
                    let mut term = x[i] / self.scale[i] * j[i] as f64 * pw[i][j[i] - 1];
                    for k in 0..n {
                        if k != i {
                            term *= pw[k][j[k]];
                        }
                    }
                    s += term;
                }
                s
            })
            .collect()
    }
}

fn powers(w: &[Complex64], d: usize) -> Vec<Vec<Complex64>> {
    w.iter()
        .map(|&wi| {
            let mut p = Vec::with_capacity(d + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=d {
                p.push(acc);
                acc *= wi;
            }
            p
        })
        .collect()
}

fn monomials(basis: &BasisIndexSet, center: &[Complex64], scale: &[f64], z: &[Complex64]) -> Vec<Complex64> {
    let w: Vec<Complex64> = (0..basis.dim()).map(|i| (z[i] - center[i]) / scale[i]).collect();
    let pw = powers(&w, basis.degree());
    basis
        .indices()
        .iter()
        .map(|j| {
            j.iter()
                .enumerate()
                .fold(Complex64::new(1.0, 0.0), |acc, (i, &e)| acc * pw[i][e])
        })
        .collect()
}

/// Weighted centroid of the nodes and the per-coordinate node spread around it.
fn frame(rule: &QuadratureRule) -> (Vec<Complex64>, Vec<f64>) {
    let n = rule.dim;
    let mut center = vec![ZERO; n];
    let vol = rule.volume();
    for q in 0..rule.len() {
        for (c, z) in center.iter_mut().zip(rule.node(q)) {
            *c += z * rule.weights[q];
        }
    }
    center.iter_mut().for_each(|c| *c /= vol);
    let mut scale = vec![0.0f64; n];
    for q in 0..rule.len() {
        for i in 0..n {
            scale[i] = scale[i].max((rule.node(q)[i] - center[i]).norm());
        }
    }
    for (i, s) in scale.iter_mut().enumerate() {
        if !(*s > 0.0) {
            *s = 1.0;
        }
        // snap tiny centroid noise so symmetric domains get symmetric bases
        if center[i].norm() < 1e-13 * *s {
            center[i] = ZERO;
        }
    }
    (center, scale)
}
