//! Integration rules over supported domains and monomial Gram matrices for
//! the inner product `<f, g> = ∫_D f conj(g) dV`.
//!
//! Discs and balls get exact polar rules (Gauss-Legendre in squared radius,
//! uniform in angle); polydiscs and products are tensors of factor rules;
//! polytopes and clipped domains use a randomized Halton sequence over the
//! bounding box with rejection.

mod gram;

pub use gram::{GramSystem, DROP_TOLERANCE};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Domain, Membership, Shape};
use crate::error::{BergmanError, Result};
use crate::point::ComplexPoint;

/// Number of independently shifted Halton streams interleaved in a qmc rule.
pub const QMC_STREAMS: usize = 8;

/// Default number of qmc candidate points.
pub const DEFAULT_QMC_CANDIDATES: usize = 1 << 20;

/// Default seed for every randomized rule.
pub const DEFAULT_SEED: u64 = 42;

/// Largest supported total degree for each dimension `n = 1, 2, 3`.
pub fn degree_cap(n: usize) -> usize {
    match n {
        1 => 30,
        2 => 14,
        _ => 8,
    }
}

/// Multi-indices of total degree `<= d_max` in graded order: by total degree,
/// then lexicographically descending (`(2,0), (1,1), (0,2)`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisIndexSet {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
}

impl BasisIndexSet {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(BergmanError::UnsupportedDimension(dim));
        }
        if degree > degree_cap(dim) {
            return Err(BergmanError::InvalidArgument(format!(
                "degree {degree} exceeds the cap {} for n = {dim}",
                degree_cap(dim)
            )));
        }
        let mut indices = Vec::new();
        for total in 0..=degree {
            let mut level = Vec::new();
            compositions(dim, total, &mut Vec::new(), &mut level);
            indices.extend(level);
        }
        Ok(BasisIndexSet { dim, degree, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// Number of indices of total degree `<= d`; the lower-degree set is a prefix.
    pub fn prefix_len(&self, d: usize) -> usize {
        self.indices.iter().take_while(|j| j.iter().sum::<usize>() <= d).count()
    }

    /// Every componentwise-smaller index is present.
    pub fn is_downward_closed(&self) -> bool {
        self.indices.iter().all(|j| {
            (0..self.dim).all(|i| {
                j[i] == 0 || {
                    let mut k = j.clone();
                    k[i] -= 1;
                    self.indices.contains(&k)
                }
            })
        })
    }
}

fn compositions(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        let mut v = prefix.clone();
        v.push(total);
        out.push(v);
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(parts - 1, total - first, prefix, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    ExactPolar,
    Tensor,
    QmcRejection,
}

/// How large a rule to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleTarget {
    /// Exact rules integrate monomial products of total degree `<= 2 * degree + 2`.
    pub degree: usize,
    pub qmc_candidates: usize,
    pub seed: u64,
}

impl RuleTarget {
    pub fn new(degree: usize) -> Self {
        RuleTarget {
            degree,
            qmc_candidates: DEFAULT_QMC_CANDIDATES,
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_candidates(mut self, n: usize) -> Self {
        self.qmc_candidates = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Nodes stored flat (`dim` complex coordinates per node).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// Stream label per node (always 0 for exact rules).
    pub streams: Vec<u8>,
    pub kind: RuleKind,
    /// Exactness degree for monomial products; `None` for qmc.
    pub exact_degree: Option<usize>,
    /// Candidate count before rejection (qmc only).
    pub candidates: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, q: usize) -> &[Complex64] {
        &self.nodes[q * self.dim..(q + 1) * self.dim]
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∑ w f(node)`.
    pub fn integrate(&self, f: impl Fn(&[Complex64]) -> Complex64 + Sync) -> Complex64 {
        (0..self.len())
            .into_par_iter()
            .map(|q| f(self.node(q)) * self.weights[q])
            .sum()
    }

    fn tensor(a: &QuadratureRule, b: &QuadratureRule) -> QuadratureRule {
        let dim = a.dim + b.dim;
        let mut nodes = Vec::with_capacity(a.len() * b.len() * dim);
        let mut weights = Vec::with_capacity(a.len() * b.len());
        let mut streams = Vec::with_capacity(a.len() * b.len());
        for p in 0..a.len() {
            for q in 0..b.len() {
                nodes.extend_from_slice(a.node(p));
                nodes.extend_from_slice(b.node(q));
                weights.push(a.weights[p] * b.weights[q]);
                streams.push(a.streams[p].max(b.streams[q]));
            }
        }
        let qmc = a.kind == RuleKind::QmcRejection || b.kind == RuleKind::QmcRejection;
        QuadratureRule {
            dim,
            nodes,
            weights,
            streams,
            kind: if qmc { RuleKind::QmcRejection } else { RuleKind::Tensor },
            exact_degree: match (a.exact_degree, b.exact_degree) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            },
            candidates: a.candidates.max(b.candidates),
        }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = 0.5 * (1.0 - t);
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn exact_disc(center: Complex64, radius: f64, degree: usize) -> QuadratureRule {
    let top = 2 * degree + 2;
    // radial integrand is a polynomial of degree <= top/2 in s = |w|^2
    let (s, ws) = gauss_legendre(top / 4 + 2);
    let m = top + 1;
    let mut nodes = Vec::with_capacity(s.len() * m);
    let mut weights = Vec::with_capacity(s.len() * m);
    let area = 0.5 * radius * radius * std::f64::consts::TAU / m as f64;
    for (si, wi) in s.iter().zip(&ws) {
        for k in 0..m {
            let th = std::f64::consts::TAU * k as f64 / m as f64;
            nodes.push(center + Complex64::from_polar(radius * si.sqrt(), th));
            weights.push(wi * area);
        }
    }
    let len = weights.len();
    QuadratureRule {
        dim: 1,
        nodes,
        weights,
        streams: vec![0; len],
        kind: RuleKind::ExactPolar,
        exact_degree: Some(top),
        candidates: 0,
    }
}

/// Ball rule: `z_i = c_i + R sqrt(s_i) e^{i theta_i}` with `s` on the simplex,
/// collapsed onto the unit cube (`s_1 = u_1`, `s_2 = (1-u_1) u_2`, ...).
fn exact_ball(center: &[Complex64], radius: f64, degree: usize) -> QuadratureRule {
    let n = center.len();
    let top = 2 * degree + 2;
    let (u, wu) = gauss_legendre((top / 2 + n) / 2 + 2);
    let m = top + 1;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..n {
        let mut next = Vec::new();
        for (s, w) in &simplex {
            let rest = 1.0 - s.iter().sum::<f64>();
            for (ui, wi) in u.iter().zip(&wu) {
                let mut s2 = s.clone();
                s2.push(rest * ui);
                next.push((s2, w * wi * rest));
            }
        }
        simplex = next;
    }
    let angle_w = (0.5 * radius * radius * std::f64::consts::TAU / m as f64).powi(n as i32);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let total = m.pow(n as u32);
    for (s, w) in &simplex {
        for mut code in 0..total {
            for i in 0..n {
                let k = code % m;
                code /= m;
                let th = std::f64::consts::TAU * k as f64 / m as f64;
                nodes.push(center[i] + Complex64::from_polar(radius * s[i].sqrt(), th));
            }
            weights.push(w * angle_w);
        }
    }
    let len = weights.len();
    QuadratureRule {
        dim: n,
        nodes,
        weights,
        streams: vec![0; len],
        kind: RuleKind::ExactPolar,
        exact_degree: Some(top),
        candidates: 0,
    }
}

const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(base: u32, mut k: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base as u64) as f64 * f;
        k /= base as u64;
        f *= inv;
    }
    out
}

/// Randomized Halton rejection rule over the bounding box. Candidate `i`
/// belongs to stream `i mod QMC_STREAMS`, which carries its own random shift.
fn qmc_rejection(domain: &Domain, candidates: usize, seed: u64) -> Result<QuadratureRule> {
    let (lo, hi) = domain.bounding_box().cloned().ok_or(BergmanError::Unbounded)?;
    let dim = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..QMC_STREAMS)
        .map(|_| (0..2 * dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let weight = box_volume / candidates as f64;
    let accepted: Vec<(u8, Vec<Complex64>)> = (0..candidates)
        .into_par_iter()
        .filter_map(|i| {
            let stream = i % QMC_STREAMS;
            let k = (i / QMC_STREAMS + 1) as u64;
            let coords: Vec<f64> = (0..2 * dim)
                .map(|d| {
                    let u = (radical_inverse(PRIMES[d], k) + shifts[stream][d]).fract();
                    lo[d] + u * (hi[d] - lo[d])
                })
                .collect();
            let z: Vec<Complex64> = (0..dim)
                .map(|j| Complex64::new(coords[2 * j], coords[2 * j + 1]))
                .collect();
            (domain.classify(&ComplexPoint::from(z.clone())) == Membership::Interior).then_some((stream as u8, z))
        })
        .collect();
    if accepted.is_empty() {
        return Err(BergmanError::Numerical(
            "no qmc candidate fell inside the domain".into(),
        ));
    }
    let mut nodes = Vec::with_capacity(accepted.len() * dim);
    let mut streams = Vec::with_capacity(accepted.len());
    for (s, z) in accepted {
        streams.push(s);
        nodes.extend(z);
    }
    let len = streams.len();
    Ok(QuadratureRule {
        dim,
        nodes,
        weights: vec![weight; len],
        streams,
        kind: RuleKind::QmcRejection,
        exact_degree: None,
        candidates,
    })
}

/// Builds the integration rule for `domain`.
pub fn build_rule(domain: &Domain, target: &RuleTarget) -> Result<QuadratureRule> {
    if !domain.is_bounded() {
        return Err(BergmanError::Unbounded);
    }
    let d = target.degree;
    Ok(match &domain.shape {
        Shape::Disc { center, radius } => exact_disc(*center, *radius, d),
        Shape::Polydisc { centers, radii } => {
            let mut rule = exact_disc(centers[0], radii[0], d);
            for i in 1..centers.len() {
                rule = QuadratureRule::tensor(&rule, &exact_disc(centers[i], radii[i], d));
            }
            rule.kind = RuleKind::Tensor;
            rule
        }
        Shape::Ball { center, radius } => exact_ball(center, *radius, d),
        Shape::Product(l, r) => QuadratureRule::tensor(&build_rule(l, target)?, &build_rule(r, target)?),
        Shape::Affine { base, map } => {
            let mut rule = build_rule(base, target)?;
            if rule.kind == RuleKind::QmcRejection {
                return qmc_rejection(domain, target.qmc_candidates, target.seed);
            }
            let scale = map.det.norm_sqr();
            rule.nodes = rule.nodes.chunks(rule.dim).flat_map(|z| map.apply(z)).collect();
            rule.weights.iter_mut().for_each(|w| *w *= scale);
            rule
        }
        Shape::HalfPlane(_) => return Err(BergmanError::Unbounded),
        Shape::Polytope(_) | Shape::Clipped { .. } => qmc_rejection(domain, target.qmc_candidates, target.seed)?,
    })
}
