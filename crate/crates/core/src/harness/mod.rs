//! Boundary-approach experiments and inequality checks built on the estimators.

mod checks;
mod estimator;
mod path;
mod peak;

pub use checks::{
    caratheodory_check, caratheodory_path, cone_bound_check, identity_suite, intersect, localization_ratio,
    CaratheodoryMargin, ConeReport, ConeSeries, IdentityCheck, LocalizationReport, CARATHEODORY_TOL, CONE_RATIO,
    LOCALIZATION_TOL,
};
pub use estimator::{Backend, Estimator, EstimatorConfig, Sample};
pub use path::{
    classify, fit_log_log, kernel_growth_series, last_decade_ratio, run_path_experiment, uniformity_grid,
    uniformity_probe, Classification, KernelGrowth, PathExperiment, PathSample, ProbeSummary, SlopeFit,
    UniformityReport, BLOWUP_SLOPE, BOUNDED_RATIO, BOUNDED_SLOPE, FIT_RESIDUAL, FIT_WINDOW, KERNEL_GROWTH_FLOOR,
};
pub use peak::{build_peak_function, verify_peak, PeakFunctionSpec, PeakReport};
