use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Shape};
use crate::error::{BergmanError, Result};
use crate::model::{self, KernelSource};
use crate::numeric::{self, SWEEP_B_TOL, SWEEP_K_TOL};
use crate::point::{ComplexPoint, ComplexVector};
use crate::quadrature::{degree_cap, GramSystem, RuleTarget, DEFAULT_QMC_CANDIDATES, DEFAULT_SEED};

/// How an [`Estimator`] evaluates `K` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Closed forms where they exist, products split factor-wise, numerics otherwise.
    #[default]
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub backend: Backend,
    /// Basis degree for numeric parts; the dimension cap when absent.
    pub degree: Option<usize>,
    pub qmc_candidates: usize,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            backend: Backend::Auto,
            degree: None,
            qmc_candidates: DEFAULT_QMC_CANDIDATES,
            seed: DEFAULT_SEED,
        }
    }
}

impl EstimatorConfig {
    pub fn numeric(degree: Option<usize>) -> Self {
        EstimatorConfig {
            backend: Backend::Numeric,
            degree,
            ..Default::default()
        }
    }
}

/// One `(K, M, B)` evaluation with its provenance and error bars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub k: f64,
    pub m: f64,
    pub b: f64,
    pub source: KernelSource,
    /// Numeric parts agree between degrees `d - 2` and `d` (always true for closed forms).
    pub converged: bool,
    pub degree: Option<usize>,
    pub condition: f64,
    /// Qmc standard errors (zero for exact rules and closed forms).
    pub k_error: f64,
    pub b_error: f64,
}

#[derive(Debug)]
enum Engine {
    Closed,
    Product(Box<Estimator>, Box<Estimator>),
    Numeric {
        full: Box<GramSystem>,
        coarse: Box<GramSystem>,
    },
}

/// Evaluates the kernel and metric of one domain. Numeric parts are assembled
/// once at construction; evaluation is read-only and may run concurrently.
#[derive(Debug)]
pub struct Estimator {
    domain: Domain,
    engine: Engine,
}

impl Estimator {
    pub fn new(domain: &Domain, config: &EstimatorConfig) -> Result<Estimator> {
        let engine = match config.backend {
            Backend::Closed if model::has_closed_form(domain) => Engine::Closed,
            Backend::Closed => {
                return Err(BergmanError::Unsupported("domain has no closed-form kernel".into()));
            }
            Backend::Numeric => numeric_engine(domain, config)?,
            Backend::Auto => {
                if model::has_closed_form(domain) {
                    Engine::Closed
                } else if let Shape::Product(l, r) = &domain.shape {
                    Engine::Product(
                        Box::new(Estimator::new(l, config)?),
                        Box::new(Estimator::new(r, config)?),
                    )
                } else {
                    numeric_engine(domain, config)?
                }
            }
        };
        Ok(Estimator {
            domain: domain.clone(),
            engine,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `K(z)` only.
    pub fn kernel(&self, z: &ComplexPoint) -> Result<Sample> {
        self.estimate(z, &ComplexVector::zeros(self.domain.dim()))
    }

    pub fn estimate(&self, z: &ComplexPoint, x: &ComplexVector) -> Result<Sample> {
        match &self.engine {
            Engine::Closed => {
                let v = model::metric_closed(&self.domain, z, x)?;
                let source = model::kernel_closed(&self.domain, z)?.source;
                Ok(Sample {
                    k: v.k,
                    m: v.m,
                    b: v.b,
                    source,
                    converged: true,
                    degree: None,
                    condition: 1.0,
                    k_error: 0.0,
                    b_error: 0.0,
                })
            }
            Engine::Product(l, r) => {
                let n = l.domain.dim();
                let (zl, zr) = z.split(n);
                let (xl, xr) = x.split(n);
                let a = l.estimate(&zl, &xl)?;
                let c = r.estimate(&zr, &xr)?;
                let k = a.k * c.k;
                let b = a.b.hypot(c.b);
                let b_error = if b > 0.0 {
                    (a.b * a.b_error + c.b * c.b_error) / b
                } else {
                    a.b_error + c.b_error
                };
                Ok(Sample {
                    k,
                    m: b * k.sqrt(),
                    b,
                    source: KernelSource::Composed,
                    converged: a.converged && c.converged,
                    degree: a.degree.max(c.degree),
                    condition: a.condition.max(c.condition),
                    k_error: a.k_error * c.k + a.k * c.k_error,
                    b_error,
                })
            }
            Engine::Numeric { full, coarse } => {
                let hi = numeric::metric_estimate(full, z, x)?;
                let lo = numeric::metric_estimate(coarse, z, x)?;
                let converged = (hi.k - lo.k).abs() <= SWEEP_K_TOL * hi.k
                    && (hi.b - lo.b).abs() <= SWEEP_B_TOL * hi.b.max(f64::MIN_POSITIVE);
                let err = hi.qmc_error;
                Ok(Sample {
                    k: hi.k,
                    m: hi.m,
                    b: hi.b,
                    source: KernelSource::Numeric,
                    converged,
                    degree: Some(hi.degree),
                    condition: hi.condition,
                    k_error: err.map_or(0.0, |e| e.k),
                    b_error: err.map_or(0.0, |e| e.b),
                })
            }
        }
    }
}

fn numeric_engine(domain: &Domain, config: &EstimatorConfig) -> Result<Engine> {
    let degree = config.degree.unwrap_or_else(|| degree_cap(domain.dim()));
    let target = RuleTarget::new(degree)
        .with_candidates(config.qmc_candidates)
        .with_seed(config.seed);
    let full = GramSystem::build(domain, &target)?;
    let coarse = full.truncated(degree.saturating_sub(2))?;
    Ok(Engine::Numeric {
        full: Box::new(full),
        coarse: Box::new(coarse),
    })
}
