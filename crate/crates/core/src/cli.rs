//! Command-line front end: `bergman kernel | metric | experiment ...`.
//!
//! Points and directions are written `"re,im;re,im"` (one `re,im` pair per
//! coordinate; a lone `re` means a zero imaginary part). Reports are CSV with
//! a trailing `# {json}` footer, or a single JSON document. Both embed the
//! resolved configuration and the library version.
//!
//! Exit codes: 0 pass, 2 usage or input error, 3 numerically inconclusive,
//! 4 a checked inequality or classification failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::domain::{geometric_grid, Domain, DomainSpec};
use crate::error::BergmanError;
use crate::harness::{
    build_peak_function, caratheodory_path, cone_bound_check, identity_suite, kernel_growth_series, localization_ratio,
    run_path_experiment, uniformity_probe, verify_peak, Backend, Classification, Estimator, EstimatorConfig,
    KERNEL_GROWTH_FLOOR,
};
use crate::model;
use crate::point::{ComplexPoint, ComplexVector};
use crate::quadrature::{DEFAULT_QMC_CANDIDATES, DEFAULT_SEED};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "bergman",
    version,
    about = "Bergman kernel and metric estimates on convex domains"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate K(z).
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        point: Coords,
    },
    /// Evaluate K(z), M(z;X) and B(z;X).
    Metric {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        point: Coords,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        direction: Coords,
    },
    /// Boundary experiments.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Walk z0 + t w and classify each probe as blow-up or bounded.
    Path {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        z0: Coords,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        approach: Coords,
        #[arg(long = "probe", value_parser = parse_coords, allow_hyphen_values = true, required = true)]
        probes: Vec<Coords>,
        #[arg(long = "t-grid", default_value = "geo:0.5,12", value_parser = parse_t_grid)]
        t_grid: TGrid,
    },
    /// Metric along cones with vertex z0 for flat probe directions.
    Cone {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        z0: Coords,
        #[arg(long = "cone-point", value_parser = parse_coords, allow_hyphen_values = true, required = true)]
        cone_points: Vec<Coords>,
        #[arg(long = "probe", value_parser = parse_coords, allow_hyphen_values = true, required = true)]
        probes: Vec<Coords>,
        #[arg(long = "t-grid", default_value = "geo:0.5,12", value_parser = parse_t_grid)]
        t_grid: TGrid,
    },
    /// Ratio K_D / K_{D∩U} along z0 + t w.
    Localization {
        #[command(flatten)]
        common: Common,
        /// Domain file for the neighborhood U (half-plane or polytope).
        #[arg(long)]
        neighborhood: PathBuf,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        z0: Coords,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        approach: Coords,
        #[arg(long = "t-grid", default_value = "geo:0.5,12", value_parser = parse_t_grid)]
        t_grid: TGrid,
    },
    /// Build exp(z1 + a z1^2) at z0 and sample the closure.
    Peak {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_coords, allow_hyphen_values = true)]
        z0: Coords,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Scaling, product and half-plane identities.
    Identities {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long = "point", value_parser = parse_coords, allow_hyphen_values = true)]
        points: Vec<Coords>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Domain description (JSON).
    #[arg(long)]
    domain: PathBuf,
    /// Basis degree for numeric estimates (defaults to the dimension cap).
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Qmc candidate points for polytope-like domains.
    #[arg(long, default_value_t = DEFAULT_QMC_CANDIDATES)]
    candidates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendArg {
    Auto,
    Closed,
    Numeric,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct TGrid(Vec<f64>);

/// Parsed point or direction literal.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
struct Coords(Vec<Complex64>);

fn parse_coords(s: &str) -> Result<Coords, String> {
    parse_point(s).map(Coords)
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

/// `"re,im;re,im"`; each coordinate is `re,im` or a bare `re`.
pub fn parse_point(s: &str) -> Result<Vec<Complex64>, String> {
    if s.trim().is_empty() {
        return Err("empty point".into());
    }
    s.split(';')
        .map(|c| {
            let parts: Vec<&str> = c.split(',').collect();
            match parts.as_slice() {
                [re] => Ok(Complex64::new(parse_number(re)?, 0.0)),
                [re, im] => Ok(Complex64::new(parse_number(re)?, parse_number(im)?)),
                _ => Err(format!("bad coordinate {c:?}; expected re,im")),
            }
        })
        .collect()
}

/// `geo:ratio,count` or `list:t1,t2,...` (strictly decreasing, positive).
fn parse_t_grid(s: &str) -> Result<TGrid, String> {
    let grid = if let Some(rest) = s.strip_prefix("geo:") {
        let (r, n) = rest.split_once(',').ok_or("expected geo:ratio,count")?;
        let r = parse_number(r)?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
        if !(r > 0.0 && r < 1.0) || n == 0 {
            return Err("geo grid needs 0 < ratio < 1 and count >= 1".into());
        }
        geometric_grid(r, n)
    } else if let Some(rest) = s.strip_prefix("list:") {
        rest.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?
    } else {
        return Err("t grid must start with geo: or list:".into());
    };
    if grid.iter().any(|&t| !(t > 0.0)) || grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err("t grid must be positive and strictly decreasing".into());
    }
    Ok(TGrid(grid))
}

#[derive(Serialize, Debug)]
struct RunConfig {
    subcommand: String,
    domain_file: PathBuf,
    domain: DomainSpec,
    backend: Backend,
    degree: Option<usize>,
    candidates: usize,
    seed: u64,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    #[serde(flatten)]
    extra: serde_json::Map<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    fn code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
            Status::Fail => EXIT_FAILED,
        }
    }
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
fn fmt_f(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone)]
enum Cell {
    F(f64),
    U(usize),
    B(bool),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => fmt_f(*v),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) => json!(v),
            Cell::U(v) => json!(v),
            Cell::B(v) => json!(v),
            Cell::S(v) => json!(v),
        }
    }
}

struct Report {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    summary: Value,
    status: Status,
}

impl Report {
    fn render(&self, config: &RunConfig) -> String {
        let meta = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "summary": self.summary,
            "status": self.status,
        });
        match config.format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
                let _ = writeln!(out, "# {meta}");
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let mut doc = meta;
                doc["columns"] = json!(self.columns);
                doc["rows"] = Value::Array(rows);
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Failure before a report exists.
#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl From<BergmanError> for CliError {
    fn from(e: BergmanError) -> Self {
        let code = match e {
            BergmanError::Numerical(_) | BergmanError::NonFinite | BergmanError::FlatValidation(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn load_domain(path: &PathBuf) -> Result<DomainSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(DomainSpec::from_json(&text)?)
}

fn point(v: &[Complex64]) -> Result<ComplexPoint, CliError> {
    Ok(ComplexPoint::new(v.to_vec())?)
}

fn vector(v: &[Complex64]) -> Result<ComplexVector, CliError> {
    Ok(ComplexVector::new(v.to_vec())?)
}

fn fmt_c(c: Complex64) -> String {
    match (c.re, c.im) {
        (re, im) if im == 0.0 => format!("{re}"),
        (re, im) if re == 0.0 => format!("{im}i"),
        (re, im) if im < 0.0 => format!("{re}-{}i", -im),
        (re, im) => format!("{re}+{im}i"),
    }
}

/// `(1,0)`-style label.
fn label(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|c| fmt_c(*c)).collect();
    format!("({})", parts.join(","))
}

fn coord_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n)
        .flat_map(|i| [format!("{prefix}{i}_re"), format!("{prefix}{i}_im")])
        .collect()
}

fn coord_cells(v: &[Complex64]) -> Vec<Cell> {
    v.iter().flat_map(|c| [Cell::F(c.re), Cell::F(c.im)]).collect()
}

fn points_json(v: &[Coords]) -> Value {
    json!(v)
}

struct Setup {
    config: RunConfig,
    domain: Domain,
    estimator_config: EstimatorConfig,
}

fn setup(name: &str, common: &Common, default_numeric: bool, extra: Value) -> Result<Setup, CliError> {
    let spec = load_domain(&common.domain)?;
    let domain = Domain::new(spec.clone())?;
    let backend = match common.backend {
        Some(BackendArg::Auto) => Backend::Auto,
        Some(BackendArg::Closed) => Backend::Closed,
        Some(BackendArg::Numeric) => Backend::Numeric,
        None if default_numeric && domain.is_bounded() => Backend::Numeric,
        None => Backend::Auto,
    };
    if common.candidates < 1024 {
        return Err(input_error("--candidates must be at least 1024"));
    }
    let estimator_config = EstimatorConfig {
        backend,
        degree: common.degree,
        qmc_candidates: common.candidates,
        seed: common.seed,
    };
    let Value::Object(extra) = extra else {
        unreachable!("extra config is an object")
    };
    Ok(Setup {
        config: RunConfig {
            subcommand: name.into(),
            domain_file: common.domain.clone(),
            domain: spec,
            backend,
            degree: common.degree,
            candidates: common.candidates,
            seed: common.seed,
            format: common.format,
            out: common.out.clone(),
            extra,
        },
        domain,
        estimator_config,
    })
}

fn cmd_kernel(s: &Setup, z: &ComplexPoint) -> Result<Report, CliError> {
    let est = Estimator::new(&s.domain, &s.estimator_config)?;
    let v = est.kernel(z)?;
    let closed = if model::has_closed_form(&s.domain) {
        Some(model::kernel_closed(&s.domain, z)?.k)
    } else {
        None
    };
    let rel = closed.map(|c| (v.k - c).abs() / c);
    let mut columns = coord_columns("z", z.dim());
    columns.extend(
        [
            "d_max",
            "K",
            "K_closed",
            "rel_err",
            "condition",
            "quadrature_error",
            "source",
            "converged",
        ]
        .map(String::from),
    );
    let mut row = coord_cells(z.coords());
    row.extend([
        v.degree.map_or(Cell::S(String::new()), Cell::U),
        Cell::F(v.k),
        closed.map_or(Cell::S(String::new()), Cell::F),
        rel.map_or(Cell::S(String::new()), Cell::F),
        Cell::F(v.condition),
        Cell::F(v.k_error),
        Cell::S(json!(v.source).as_str().unwrap_or_default().to_string()),
        Cell::B(v.converged),
    ]);
    Ok(Report {
        columns,
        rows: vec![row],
        summary: json!({ "K": v.k, "K_closed": closed, "rel_err": rel, "source": v.source, "converged": v.converged }),
        status: if v.converged {
            Status::Pass
        } else {
            Status::Inconclusive
        },
    })
}

fn cmd_metric(s: &Setup, z: &ComplexPoint, x: &ComplexVector) -> Result<Report, CliError> {
    if x.is_zero() {
        return Err(BergmanError::ZeroDirection.into());
    }
    let est = Estimator::new(&s.domain, &s.estimator_config)?;
    let v = est.estimate(z, x)?;
    let closed = if model::has_closed_form(&s.domain) {
        Some(model::metric_closed(&s.domain, z, x)?)
    } else {
        None
    };
    let k_rel = closed.map(|c| (v.k - c.k).abs() / c.k);
    let b_rel = closed.map(|c| (v.b - c.b).abs() / c.b);
    let mut columns = coord_columns("z", z.dim());
    columns.extend(coord_columns("X", x.dim()));
    columns.extend(
        [
            "d_max",
            "K",
            "M",
            "B",
            "K_closed",
            "B_closed",
            "K_rel_err",
            "B_rel_err",
            "condition",
            "K_error",
            "B_error",
            "source",
            "converged",
        ]
        .map(String::from),
    );
    let opt = |o: Option<f64>| o.map_or(Cell::S(String::new()), Cell::F);
    let mut row = coord_cells(z.coords());
    row.extend(coord_cells(x.coords()));
    row.extend([
        v.degree.map_or(Cell::S(String::new()), Cell::U),
        Cell::F(v.k),
        Cell::F(v.m),
        Cell::F(v.b),
        opt(closed.map(|c| c.k)),
        opt(closed.map(|c| c.b)),
        opt(k_rel),
        opt(b_rel),
        Cell::F(v.condition),
        Cell::F(v.k_error),
        Cell::F(v.b_error),
        Cell::S(json!(v.source).as_str().unwrap_or_default().to_string()),
        Cell::B(v.converged),
    ]);
    Ok(Report {
        columns,
        rows: vec![row],
        summary: json!({
            "K": v.k, "M": v.m, "B": v.b,
            "B_closed": closed.map(|c| c.b), "B_rel_err": b_rel,
            "source": v.source, "converged": v.converged,
        }),
        status: if v.converged {
            Status::Pass
        } else {
            Status::Inconclusive
        },
    })
}

fn cmd_path(
    s: &Setup,
    z0: &ComplexPoint,
    w: &ComplexVector,
    raw_probes: &[Coords],
    t_grid: &[f64],
) -> Result<Report, CliError> {
    let probes = raw_probes.iter().map(|p| vector(&p.0)).collect::<Result<Vec<_>, _>>()?;
    let est = Estimator::new(&s.domain, &s.estimator_config)?;
    let exp = run_path_experiment(&est, z0, w, t_grid, &probes)?;
    let growth = kernel_growth_series(&exp, KERNEL_GROWTH_FLOOR);
    let cara = caratheodory_path(&exp);
    let cara_fail = cara.iter().filter(|m| !m.pass).count();
    let cara_min = cara.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    let uniform = if exp.flat.dim() < z0.dim() {
        Some(uniformity_probe(&est, z0, w, t_grid)?)
    } else {
        None
    };

    let n = z0.dim();
    let mut columns = vec!["t".to_string()];
    columns.extend(coord_columns("z", n));
    columns.extend(coord_columns("X", n));
    columns.extend(["dist", "K", "M", "B", "K_dist2", "d_zX", "converged", "condition"].map(String::from));
    let rows = exp
        .samples
        .iter()
        .map(|p| {
            let mut r = vec![Cell::F(p.t)];
            r.extend(coord_cells(p.z.coords()));
            r.extend(coord_cells(p.x.coords()));
            r.extend([
                Cell::F(p.dist),
                Cell::F(p.k),
                Cell::F(p.m),
                Cell::F(p.b),
                Cell::F(p.k_dist2),
                Cell::F(p.d_zx),
                Cell::B(p.converged),
                Cell::F(p.condition),
            ]);
            r
        })
        .collect();

    let mut classification = serde_json::Map::new();
    let mut predicted = serde_json::Map::new();
    let mut slopes = serde_json::Map::new();
    for (raw, p) in raw_probes.iter().zip(&exp.probes) {
        let key = label(&raw.0);
        classification.insert(key.clone(), json!(p.classification.as_str()));
        predicted.insert(key.clone(), json!(p.predicted.as_str()));
        slopes.insert(key, json!(p.fit.map(|f| f.slope)));
    }
    let disagree = exp
        .probes
        .iter()
        .any(|p| p.classification != Classification::Inconclusive && !p.agrees());
    let inconclusive = exp
        .probes
        .iter()
        .any(|p| p.classification == Classification::Inconclusive);
    // checks without converged data are inconclusive, not failed
    let growth_fail = !growth.t.is_empty() && !growth.pass;
    let uniform_fail = uniform.as_ref().is_some_and(|u| u.fit.is_some() && !u.blow_up);
    let missing = growth.t.is_empty() || uniform.as_ref().is_some_and(|u| u.fit.is_none());
    let status = if disagree || growth_fail || cara_fail > 0 || uniform_fail {
        Status::Fail
    } else if inconclusive || missing {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(Report {
        columns,
        rows,
        summary: json!({
            "classification": classification,
            "predicted": predicted,
            "slopes": slopes,
            "flat_dim": exp.flat.dim(),
            "converged_prefix": exp.converged_prefix,
            "truncated": exp.truncated(),
            "kernel_growth": {
                "pass": growth.pass,
                "floor": growth.floor,
                "final": growth.k_dist2.last(),
                "running_inf": growth.running_inf.last(),
            },
            "caratheodory": { "checked": cara.len(), "violations": cara_fail, "min_margin": cara_min },
            "uniformity": uniform.map(|u| json!({ "blow_up": u.blow_up, "slope": u.fit.map(|f| f.slope) })),
        }),
        status,
    })
}

fn cmd_cone(
    s: &Setup,
    z0: &ComplexPoint,
    gens: &[ComplexPoint],
    probes: &[ComplexVector],
    t_grid: &[f64],
) -> Result<Report, CliError> {
    let est = Estimator::new(&s.domain, &s.estimator_config)?;
    let r = cone_bound_check(&est, z0, gens, t_grid, probes)?;
    let columns = ["generator", "probe", "t", "B_over_norm"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for series in &r.series {
        for (t, b) in series.t.iter().zip(&series.b) {
            rows.push(vec![
                Cell::U(series.generator),
                Cell::U(series.probe),
                Cell::F(*t),
                Cell::F(*b),
            ]);
        }
    }
    Ok(Report {
        columns,
        rows,
        summary: json!({ "c_emp": r.c_emp, "max_ratio": r.max_ratio, "pass": r.pass }),
        status: if r.pass { Status::Pass } else { Status::Fail },
    })
}

fn cmd_localization(
    s: &Setup,
    neighborhood: &DomainSpec,
    z0: &ComplexPoint,
    w: &ComplexVector,
    t_grid: &[f64],
) -> Result<Report, CliError> {
    let r = localization_ratio(&s.domain, neighborhood, z0, w, t_grid, &s.estimator_config)?;
    let columns = ["t", "K_D", "K_DU", "ratio"].map(String::from).to_vec();
    let rows = (0..r.t.len())
        .map(|i| {
            vec![
                Cell::F(r.t[i]),
                Cell::F(r.k_d[i]),
                Cell::F(r.k_du[i]),
                Cell::F(r.ratio[i]),
            ]
        })
        .collect();
    let status = if !r.upper_ok {
        Status::Fail
    } else if !r.monotone {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(Report {
        columns,
        rows,
        summary: json!({
            "upper_ok": r.upper_ok,
            "monotone": r.monotone,
            "max_ratio": r.max_ratio,
            "final_ratio": r.final_ratio,
            "intersection": r.intersection,
        }),
        status,
    })
}

fn cmd_peak(s: &Setup, z0: &ComplexPoint, samples: usize) -> Result<Report, CliError> {
    let spec = build_peak_function(&s.domain, z0)?;
    let r = verify_peak(&s.domain, &spec, samples, s.config.seed)?;
    let spot = spec.at_zeta(Complex64::new(-1.0, 0.0)).norm();
    let columns = [
        "a",
        "inf_re",
        "off_samples",
        "on_samples",
        "off_violations",
        "on_violations",
        "max_off",
        "max_on_deviation",
        "abs_f_at_minus_one",
    ]
    .map(String::from)
    .to_vec();
    let rows = vec![vec![
        Cell::F(spec.a),
        Cell::F(spec.inf_re),
        Cell::U(r.off_samples),
        Cell::U(r.on_samples),
        Cell::U(r.off_violations),
        Cell::U(r.on_violations),
        Cell::F(r.max_off),
        Cell::F(r.max_on_deviation),
        Cell::F(spot),
    ]];
    Ok(Report {
        columns,
        rows,
        summary: json!({ "peak": spec, "report": r }),
        status: if r.pass { Status::Pass } else { Status::Fail },
    })
}

fn cmd_identities(s: &Setup, alpha: f64, points: &[ComplexPoint]) -> Result<Report, CliError> {
    let checks = identity_suite(s.domain.spec(), alpha, points, &s.estimator_config)?;
    let columns = ["name", "left", "right", "rel_err", "tol", "pass"]
        .map(String::from)
        .to_vec();
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                Cell::S(c.name.clone()),
                Cell::F(c.left),
                Cell::F(c.right),
                Cell::F(c.rel_err),
                Cell::F(c.tol),
                Cell::B(c.pass),
            ]
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    let worst = checks.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    Ok(Report {
        columns,
        rows,
        summary: json!({ "checks": checks.len(), "max_rel_err": worst, "pass": pass }),
        status: if pass { Status::Pass } else { Status::Fail },
    })
}

fn execute(cli: Cli) -> Result<(String, Option<PathBuf>, i32), CliError> {
    let (setup, report) = match cli.command {
        Command::Kernel { common, point: p } => {
            let s = setup("kernel", &common, true, json!({ "point": p }))?;
            let r = cmd_kernel(&s, &point(&p.0)?)?;
            (s, r)
        }
        Command::Metric {
            common,
            point: p,
            direction,
        } => {
            let s = setup("metric", &common, true, json!({ "point": p, "direction": direction }))?;
            let r = cmd_metric(&s, &point(&p.0)?, &vector(&direction.0)?)?;
            (s, r)
        }
        Command::Experiment { kind } => match kind {
            Experiment::Path {
                common,
                z0,
                approach,
                probes,
                t_grid,
            } => {
                let extra =
                    json!({ "z0": z0, "approach": approach, "probes": points_json(&probes), "t_grid": t_grid.0 });
                let s = setup("experiment path", &common, false, extra)?;
                let r = cmd_path(&s, &point(&z0.0)?, &vector(&approach.0)?, &probes, &t_grid.0)?;
                (s, r)
            }
            Experiment::Cone {
                common,
                z0,
                cone_points,
                probes,
                t_grid,
            } => {
                if t_grid.0.iter().any(|&t| t > 1.0) {
                    return Err(input_error("cone t grid must lie in (0, 1]"));
                }
                let extra = json!({
                    "z0": z0, "cone_points": points_json(&cone_points),
                    "probes": points_json(&probes), "t_grid": t_grid.0,
                });
                let s = setup("experiment cone", &common, false, extra)?;
                let gens = cone_points.iter().map(|p| point(&p.0)).collect::<Result<Vec<_>, _>>()?;
                let xs = probes.iter().map(|p| vector(&p.0)).collect::<Result<Vec<_>, _>>()?;
                let r = cmd_cone(&s, &point(&z0.0)?, &gens, &xs, &t_grid.0)?;
                (s, r)
            }
            Experiment::Localization {
                common,
                neighborhood,
                z0,
                approach,
                t_grid,
            } => {
                let u = load_domain(&neighborhood)?;
                let extra = json!({
                    "neighborhood_file": neighborhood, "neighborhood": u,
                    "z0": z0, "approach": approach, "t_grid": t_grid.0,
                });
                let s = setup("experiment localization", &common, false, extra)?;
                let r = cmd_localization(&s, &u, &point(&z0.0)?, &vector(&approach.0)?, &t_grid.0)?;
                (s, r)
            }
            Experiment::Peak { common, z0, samples } => {
                let s = setup(
                    "experiment peak",
                    &common,
                    false,
                    json!({ "z0": z0, "samples": samples }),
                )?;
                let r = cmd_peak(&s, &point(&z0.0)?, samples)?;
                (s, r)
            }
            Experiment::Identities { common, alpha, points } => {
                let s = setup("experiment identities", &common, false, json!({ "alpha": alpha }))?;
                let pts = if points.is_empty() {
                    vec![s.domain.reference_point().clone()]
                } else {
                    points.iter().map(|p| point(&p.0)).collect::<Result<Vec<_>, _>>()?
                };
                let mut s = s;
                s.config.extra.insert("points".into(), json!(pts));
                let r = cmd_identities(&s, alpha, &pts)?;
                (s, r)
            }
        },
    };
    Ok((
        report.render(&setup.config),
        setup.config.out.clone(),
        report.status.code(),
    ))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    match execute(cli) {
        Ok((text, out, code)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_INPUT
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
