use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::estimator::Estimator;
use crate::domain::{approach_path, FlatSpace};
use crate::error::{BergmanError, Result};
use crate::model::KernelSource;
use crate::point::{ComplexPoint, ComplexVector};

/// Slope at or below which a probe counts as blowing up.
pub const BLOWUP_SLOPE: f64 = -0.45;
pub const BOUNDED_SLOPE: f64 = 0.1;
pub const FIT_RESIDUAL: f64 = 0.1;
pub const BOUNDED_RATIO: f64 = 1.5;
/// Number of trailing samples in the slope fit.
pub const FIT_WINDOW: usize = 8;
pub const KERNEL_GROWTH_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    BlowUp,
    Bounded,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::BlowUp => "blow-up",
            Classification::Bounded => "bounded",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub probe: usize,
    pub z: ComplexPoint,
    /// Unit probe direction.
    pub x: ComplexVector,
    pub dist: f64,
    pub k: f64,
    pub m: f64,
    pub b: f64,
    pub k_dist2: f64,
    /// Directional radius `d(z;X)`.
    pub d_zx: f64,
    pub converged: bool,
    pub condition: f64,
    pub b_error: f64,
    pub source: KernelSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log B`.
    pub residual: f64,
    pub points: usize,
}

/// Least squares line through `(ln t, ln B)`.
pub fn fit_log_log(t: &[f64], b: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(b)
        .filter(|(t, b)| **t > 0.0 && **b > 0.0)
        .map(|(t, b)| (t.ln(), b.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some(SlopeFit {
        slope,
        intercept,
        residual,
        points: pts.len(),
    })
}

/// Largest over smallest value of `b` on samples with `t <= 10 t_min`.
pub fn last_decade_ratio(t: &[f64], b: &[f64]) -> f64 {
    let t_min = t.iter().copied().fold(f64::INFINITY, f64::min);
    let sel: Vec<f64> = t
        .iter()
        .zip(b)
        .filter(|(t, _)| **t <= 10.0 * t_min)
        .map(|(_, b)| *b)
        .collect();
    let hi = sel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = sel.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn classify(t: &[f64], b: &[f64]) -> (Classification, Option<SlopeFit>, f64) {
    let k = t.len().saturating_sub(FIT_WINDOW);
    let fit = fit_log_log(&t[k..], &b[k..]);
    let ratio = last_decade_ratio(t, b);
    let class = match fit {
        Some(f) if f.slope <= BLOWUP_SLOPE && f.residual < FIT_RESIDUAL => Classification::BlowUp,
        Some(f) if f.slope.abs() <= BOUNDED_SLOPE && ratio < BOUNDED_RATIO => Classification::Bounded,
        _ => Classification::Inconclusive,
    };
    (class, fit, ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub x: ComplexVector,
    pub fit: Option<SlopeFit>,
    pub max_min_ratio: f64,
    pub classification: Classification,
    /// Classification implied by the flat space: bounded iff `X` lies in `L(z0)`.
    pub predicted: Classification,
}

impl ProbeSummary {
    pub fn agrees(&self) -> bool {
        self.classification == self.predicted
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathExperiment {
    pub z0: ComplexPoint,
    pub w: ComplexVector,
    pub t_grid: Vec<f64>,
    pub flat: FlatSpace,
    /// Ordered by `t`, then by probe index.
    pub samples: Vec<PathSample>,
    /// Leading `t` values at which every probe converged.
    pub converged_prefix: usize,
    pub probes: Vec<ProbeSummary>,
}

impl PathExperiment {
    /// Samples of one probe inside the converged prefix.
    pub fn probe_samples(&self, probe: usize) -> impl Iterator<Item = &PathSample> {
        let np = self.probes.len();
        self.samples
            .iter()
            .take(self.converged_prefix * np)
            .filter(move |s| s.probe == probe)
    }

    pub fn truncated(&self) -> bool {
        self.converged_prefix < self.t_grid.len()
    }

    pub fn all_agree(&self) -> bool {
        self.probes.iter().all(ProbeSummary::agrees)
    }
}

fn predicted(flat: &FlatSpace, x: &ComplexVector) -> Classification {
    if flat.contains_direction(x, 1e-9) {
        Classification::Bounded
    } else {
        Classification::BlowUp
    }
}

/// Walks `z(t) = z0 + t w` and evaluates every probe at every `t`.
pub fn run_path_experiment(
    est: &Estimator,
    z0: &ComplexPoint,
    w: &ComplexVector,
    t_grid: &[f64],
    probes: &[ComplexVector],
) -> Result<PathExperiment> {
    let domain = est.domain();
    if probes.is_empty() {
        return Err(BergmanError::InvalidArgument(
            "at least one probe direction is required".into(),
        ));
    }
    let path = approach_path(domain, z0, w, t_grid)?;
    let flat = domain.flat_space(z0)?;
    let units = probes.iter().map(|x| x.normalized()).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..t_grid.len())
        .flat_map(|i| (0..units.len()).map(move |p| (i, p)))
        .collect();
    let samples = jobs
        .par_iter()
        .map(|&(i, p)| {
            let z = &path[i];
            let x = &units[p];
            let s = est.estimate(z, x)?;
            let dist = domain.boundary_distance(z)?;
            Ok(PathSample {
                t: t_grid[i],
                probe: p,
                z: z.clone(),
                x: x.clone(),
                dist,
                k: s.k,
                m: s.m,
                b: s.b,
                k_dist2: s.k * dist * dist,
                d_zx: domain.directional_radius(z, x)?,
                converged: s.converged,
                condition: s.condition,
                b_error: s.b_error,
                source: s.source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let np = units.len();
    let converged_prefix = (0..t_grid.len())
        .take_while(|&i| samples[i * np..(i + 1) * np].iter().all(|s| s.converged))
        .count();
    let summaries = units
        .iter()
        .enumerate()
        .map(|(p, x)| {
            let (t, b): (Vec<f64>, Vec<f64>) = samples
                .iter()
                .take(converged_prefix * np)
                .filter(|s| s.probe == p)
                .map(|s| (s.t, s.b))
                .unzip();
            let (classification, fit, ratio) = if t.is_empty() {
                (Classification::Inconclusive, None, f64::NAN)
            } else {
                classify(&t, &b)
            };
            ProbeSummary {
                x: x.clone(),
                fit,
                max_min_ratio: ratio,
                classification,
                predicted: predicted(&flat, x),
            }
        })
        .collect();
    Ok(PathExperiment {
        z0: z0.clone(),
        w: w.clone(),
        t_grid: t_grid.to_vec(),
        flat,
        samples,
        converged_prefix,
        probes: summaries,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelGrowth {
    pub t: Vec<f64>,
    pub k_dist2: Vec<f64>,
    pub running_inf: Vec<f64>,
    pub floor: f64,
    pub pass: bool,
}

/// `K dist^2` along the converged part of the path with its running infimum.
pub fn kernel_growth_series(exp: &PathExperiment, floor: f64) -> KernelGrowth {
    let (t, k_dist2): (Vec<f64>, Vec<f64>) = exp.probe_samples(0).map(|s| (s.t, s.k_dist2)).unzip();
    let running_inf: Vec<f64> = k_dist2
        .iter()
        .scan(f64::INFINITY, |m, &v| {
            *m = m.min(v);
            Some(*m)
        })
        .collect();
    let pass = running_inf.last().is_some_and(|&m| m > floor);
    KernelGrowth {
        t,
        k_dist2,
        running_inf,
        floor,
        pass,
    }
}

/// Sixteen unit directions at angular distance at least `min_angle` from `L(z0)`.
pub fn uniformity_grid(flat: &FlatSpace, min_angle: f64) -> Result<Vec<ComplexVector>> {
    let n = flat.base.dim();
    let complement = crate::linalg::orthogonal_complement(
        &flat.basis.iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        n,
        1e-12,
    );
    if complement.is_empty() {
        return Err(BergmanError::InvalidArgument("L(z0) is the whole space".into()));
    }
    let nvec = ComplexVector::from(complement[0].clone());
    let (other, psi_max) = match flat.basis.first() {
        Some(l) => (l.clone(), std::f64::consts::FRAC_PI_2 - min_angle),
        None if complement.len() > 1 => (ComplexVector::from(complement[1].clone()), std::f64::consts::FRAC_PI_2),
        None => (nvec.clone(), 0.0),
    };
    let mut out = Vec::with_capacity(16);
    for i in 0..4 {
        let psi = psi_max * i as f64 / 3.0;
        for j in 0..4 {
            let phase = Complex64::from_polar(psi.sin(), std::f64::consts::FRAC_PI_2 * j as f64);
            let x = nvec.scale(Complex64::new(psi.cos(), 0.0)).add(&other.scale(phase));
            out.push(x.normalized()?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport {
    pub t: Vec<f64>,
    pub min_b: Vec<f64>,
    pub fit: Option<SlopeFit>,
    pub blow_up: bool,
}

/// Minimum of `B` over [`uniformity_grid`] along the path; it must blow up too.
pub fn uniformity_probe(
    est: &Estimator,
    z0: &ComplexPoint,
    w: &ComplexVector,
    t_grid: &[f64],
) -> Result<UniformityReport> {
    let flat = est.domain().flat_space(z0)?;
    let grid = uniformity_grid(&flat, 0.2)?;
    let exp = run_path_experiment(est, z0, w, t_grid, &grid)?;
    let np = grid.len();
    let mut t = Vec::new();
    let mut min_b = Vec::new();
    for i in 0..exp.converged_prefix {
        t.push(t_grid[i]);
        min_b.push(
            exp.samples[i * np..(i + 1) * np]
                .iter()
                .map(|s| s.b)
                .fold(f64::INFINITY, f64::min),
        );
    }
    let k = t.len().saturating_sub(FIT_WINDOW);
    let fit = fit_log_log(&t[k..], &min_b[k..]);
    Ok(UniformityReport {
        blow_up: fit.is_some_and(|f| f.slope <= BLOWUP_SLOPE && f.residual < FIT_RESIDUAL),
        t,
        min_b,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{geometric_grid, Domain, DomainSpec};
    use crate::harness::EstimatorConfig;
    use approx::assert_relative_eq;

    #[test]
    fn fit_recovers_power_law() {
        let t = geometric_grid(0.5, 10);
        let b: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.7)).collect();
        let f = fit_log_log(&t, &b).unwrap();
        assert_relative_eq!(f.slope, -0.7, epsilon = 1e-12);
        assert!(f.residual < 1e-12);
        assert!(fit_log_log(&t[..2], &b[..2]).is_none());
    }

    #[test]
    fn bidisc_probes_classify() {
        let d = Domain::new(DomainSpec::unit_polydisc(2)).unwrap();
        let est = Estimator::new(&d, &EstimatorConfig::default()).unwrap();
        let probes = [
            ComplexVector::real(&[1.0, 0.0]),
            ComplexVector::real(&[0.0, 1.0]),
            ComplexVector::real(&[1.0, 1.0]),
        ];
        let exp = run_path_experiment(
            &est,
            &ComplexPoint::real(&[1.0, 0.0]),
            &ComplexVector::real(&[-1.0, 0.0]),
            &geometric_grid(0.5, 12),
            &probes,
        )
        .unwrap();
        let cls: Vec<_> = exp.probes.iter().map(|p| p.classification).collect();
        assert_eq!(
            cls,
            [Classification::BlowUp, Classification::Bounded, Classification::BlowUp]
        );
        assert!(exp.all_agree());
        let th = kernel_growth_series(&exp, KERNEL_GROWTH_FLOOR);
        assert!(th.pass);
        let u = uniformity_probe(&est, &exp.z0, &exp.w, &exp.t_grid).unwrap();
        assert!(u.blow_up);
    }

    #[test]
    fn uniformity_grid_keeps_away_from_flat_space() {
        let d = Domain::new(DomainSpec::unit_polydisc(3)).unwrap();
        let flat = d.flat_space(&ComplexPoint::real(&[1.0, 0.0, 0.0])).unwrap();
        for x in uniformity_grid(&flat, 0.2).unwrap() {
            let inside = flat.project(&x).norm();
            assert!(inside.acos() >= 0.2 - 1e-12);
        }
    }
}
