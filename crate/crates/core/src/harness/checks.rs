use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::estimator::{Estimator, EstimatorConfig, Sample};
use super::path::PathExperiment;
use crate::domain::{approach_path, cone_samples, ConstraintSpec, Domain, DomainSpec};
use crate::error::{BergmanError, Result};
use crate::model;
use crate::point::{ComplexPoint, ComplexVector};

/// Slack on the Carathéodory floor beyond the quadrature error.
pub const CARATHEODORY_TOL: f64 = 1e-6;
pub const LOCALIZATION_TOL: f64 = 1e-3;
pub const CONE_RATIO: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaratheodoryMargin {
    pub z: ComplexPoint,
    pub x: ComplexVector,
    pub b: f64,
    pub d_zx: f64,
    /// `B - 1 / (2 d(z;X))`.
    pub margin: f64,
    pub tol: f64,
    pub pass: bool,
}

fn margin(z: &ComplexPoint, x: &ComplexVector, b: f64, b_error: f64, d_zx: f64) -> CaratheodoryMargin {
    let m = b - 0.5 / d_zx;
    let tol = CARATHEODORY_TOL + 3.0 * b_error;
    CaratheodoryMargin {
        z: z.clone(),
        x: x.clone(),
        b,
        d_zx,
        margin: m,
        tol,
        pass: m >= -tol,
    }
}

/// Margins of `B >= 1/(2 d(z;X))` for explicit `(z, X, estimate)` triples.
pub fn caratheodory_check(
    domain: &Domain,
    items: &[(ComplexPoint, ComplexVector, Sample)],
) -> Result<Vec<CaratheodoryMargin>> {
    items
        .iter()
        .map(|(z, x, s)| Ok(margin(z, x, s.b, s.b_error, domain.directional_radius(z, x)?)))
        .collect()
}

/// Margins at every converged sample of a path experiment.
pub fn caratheodory_path(exp: &PathExperiment) -> Vec<CaratheodoryMargin> {
    exp.samples
        .iter()
        .filter(|s| s.converged)
        .map(|s| margin(&s.z, &s.x, s.b, s.b_error, s.d_zx))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeSeries {
    pub generator: usize,
    pub probe: usize,
    pub t: Vec<f64>,
    pub b: Vec<f64>,
    pub max_min_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeReport {
    /// `max B / |X|` over the cone grid.
    pub c_emp: f64,
    pub series: Vec<ConeSeries>,
    pub max_ratio: f64,
    pub pass: bool,
}

/// `B` along `z0 + t (k - z0)` for generators `k` in `E(z0)` and probes in `L(z0)`.
pub fn cone_bound_check(
    est: &Estimator,
    z0: &ComplexPoint,
    generators: &[ComplexPoint],
    t_grid: &[f64],
    probes: &[ComplexVector],
) -> Result<ConeReport> {
    let domain = est.domain();
    let flat = domain.flat_space(z0)?;
    for x in probes {
        if x.is_zero() {
            return Err(BergmanError::ZeroDirection);
        }
        if !flat.contains_direction(x, 1e-9) {
            return Err(BergmanError::InvalidArgument("cone probe is not in L(z0)".into()));
        }
    }
    let slice = domain.normal_slice(z0)?;
    let points = cone_samples(domain, &slice, generators, t_grid)?;
    let nt = t_grid.len();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..probes.len()).map(move |p| (i, p)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(i, p)| Ok(est.estimate(&points[i], &probes[p])?.b / probes[p].norm()))
        .collect::<Result<Vec<f64>>>()?;
    let mut series = Vec::new();
    for g in 0..generators.len() {
        for p in 0..probes.len() {
            let b: Vec<f64> = (0..nt).map(|j| values[(g * nt + j) * probes.len() + p]).collect();
            let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
            series.push(ConeSeries {
                generator: g,
                probe: p,
                t: t_grid.to_vec(),
                b,
                max_min_ratio: hi / lo,
            });
        }
    }
    let c_emp = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_ratio = series.iter().map(|s| s.max_min_ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConeReport {
        c_emp,
        series,
        max_ratio,
        pass: max_ratio < CONE_RATIO,
    })
}

/// `D ∩ U` as a domain spec when `U` is a half-plane (in C) or a polytope.
pub fn intersect(d: &DomainSpec, u: &DomainSpec) -> Result<DomainSpec> {
    match u {
        DomainSpec::HalfPlane { normal, offset } => Ok(DomainSpec::clipped(d.clone(), vec![*normal], -offset)),
        DomainSpec::Polytope { constraints } => match d {
            DomainSpec::Polytope { constraints: base } => Ok(DomainSpec::Polytope {
                constraints: base.iter().chain(constraints).cloned().collect(),
            }),
            _ => Ok(constraints
                .iter()
                .fold(d.clone(), |acc, ConstraintSpec { normal, offset }| {
                    DomainSpec::clipped(acc, normal.clone(), *offset)
                })),
        },
        _ => Err(BergmanError::Unsupported(
            "neighborhood must be a half-plane or a polytope".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub intersection: DomainSpec,
    pub t: Vec<f64>,
    pub k_d: Vec<f64>,
    pub k_du: Vec<f64>,
    pub ratio: Vec<f64>,
    pub max_ratio: f64,
    /// `K_D <= K_{D∩U} (1 + tol)` at every sample.
    pub upper_ok: bool,
    /// Ratio never decreases by more than the tolerance as `t` shrinks.
    pub monotone: bool,
    pub final_ratio: f64,
}

/// `K_D(z) / K_{D∩U}(z)` along `z0 + t w`.
pub fn localization_ratio(
    d: &Domain,
    u: &DomainSpec,
    z0: &ComplexPoint,
    w: &ComplexVector,
    t_grid: &[f64],
    config: &EstimatorConfig,
) -> Result<LocalizationReport> {
    let spec = intersect(d.spec(), u)?;
    let du = Domain::new(spec.clone())?;
    let path = approach_path(&du, z0, w, t_grid)?;
    let est_d = Estimator::new(d, config)?;
    let est_du = Estimator::new(&du, config)?;
    let pairs = path
        .par_iter()
        .map(|z| Ok((est_d.kernel(z)?, est_du.kernel(z)?)))
        .collect::<Result<Vec<(Sample, Sample)>>>()?;
    let k_d: Vec<f64> = pairs.iter().map(|p| p.0.k).collect();
    let k_du: Vec<f64> = pairs.iter().map(|p| p.1.k).collect();
    let ratio: Vec<f64> = k_d.iter().zip(&k_du).map(|(a, b)| a / b).collect();
    let slack: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| LOCALIZATION_TOL + 3.0 * (a.k_error / a.k + b.k_error / b.k))
        .collect();
    let upper_ok = ratio.iter().zip(&slack).all(|(r, s)| *r <= 1.0 + s);
    let monotone = ratio.windows(2).zip(&slack[1..]).all(|(w, s)| w[1] >= w[0] - s);
    Ok(LocalizationReport {
        intersection: spec,
        t: t_grid.to_vec(),
        max_ratio: ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        final_ratio: *ratio.last().unwrap_or(&f64::NAN),
        k_d,
        k_du,
        ratio,
        upper_ok,
        monotone,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

fn identity(name: String, left: f64, right: f64, tol: f64) -> IdentityCheck {
    let rel_err = (left - right).abs() / right.abs().max(f64::MIN_POSITIVE);
    IdentityCheck {
        name,
        left,
        right,
        rel_err,
        tol,
        pass: rel_err <= tol,
    }
}

/// Scaling, product and half-plane identities around `spec` at `points`.
///
/// Closed-form sides must agree to `1e-12`; numeric sides to three times
/// their combined quadrature error.
pub fn identity_suite(
    spec: &DomainSpec,
    alpha: f64,
    points: &[ComplexPoint],
    config: &EstimatorConfig,
) -> Result<Vec<IdentityCheck>> {
    let base = Domain::new(spec.clone())?;
    let n = base.dim();
    let mut out = Vec::new();

    if !(alpha >= 1.0) {
        return Err(BergmanError::InvalidArgument("alpha must be >= 1".into()));
    }
    if base.is_bounded() || model::has_closed_form(&base) {
        let left = Estimator::new(&Domain::new(model::scaled_domain(spec, n, 1.0 / alpha))?, config)?;
        let right = Estimator::new(&Domain::new(model::scaled_domain(spec, n, alpha))?, config)?;
        let factor = alpha.powi(-4 * n as i32);
        for (i, z) in points.iter().enumerate() {
            let l = left.kernel(z)?;
            let r = right.kernel(&z.scale(Complex64::new(alpha.powi(-2), 0.0)))?;
            let err = 3.0 * (l.k_error / l.k + r.k_error / r.k);
            out.push(identity(format!("scaling[{i}]"), l.k, factor * r.k, 1e-12 + err));
        }
    }

    if model::has_closed_form(&base) && n < 3 {
        let prod = Domain::new(DomainSpec::product(spec.clone(), DomainSpec::unit_disc()))?;
        let w = Complex64::new(0.0, 0.3);
        for (i, z) in points.iter().enumerate() {
            let zz = z.concat(&ComplexPoint::from(vec![w]));
            let k = model::kernel_closed(&prod, &zz)?.k;
            let kd = model::kernel_closed(&base, z)?.k
                * model::kernel_closed(&Domain::new(DomainSpec::unit_disc())?, &ComplexPoint::from(vec![w]))?.k;
            out.push(identity(format!("product[{i}]"), k, kd, 1e-12));
        }
    }

    let hp = Domain::new(DomainSpec::HalfPlane {
        normal: Complex64::new(1.0, 0.0),
        offset: 0.0,
    })?;
    for d in [1.0, 0.25] {
        let k = model::kernel_closed(&hp, &ComplexPoint::real(&[-d]))?.k;
        out.push(identity(
            format!("halfplane[dist={d}]"),
            k,
            1.0 / (4.0 * std::f64::consts::PI * d * d),
            1e-14,
        ));
    }
    Ok(out)
}
