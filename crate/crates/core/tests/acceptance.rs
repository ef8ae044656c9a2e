//! Acceptance gate. Runs every criterion, prints one line each and exits
//! non-zero if any of them fails.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use bergman::domain::geometric_grid;
use bergman::harness::{
    build_peak_function, caratheodory_check, caratheodory_path, cone_bound_check, kernel_growth_series,
    localization_ratio, run_path_experiment, verify_peak, CaratheodoryMargin, Classification, Estimator,
    EstimatorConfig, PathExperiment, KERNEL_GROWTH_FLOOR,
};
use bergman::model::{self, scaling_identity_check, scaling_identity_with};
use bergman::numeric::{kernel_derivative, kernel_estimate, m_estimate, metric_estimate};
use bergman::quadrature::{GramSystem, RuleTarget};
use bergman::{ComplexPoint, ComplexVector, Domain, DomainSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Fail(String);

impl From<bergman::BergmanError> for Fail {
    fn from(e: bergman::BergmanError) -> Self {
        Fail(e.to_string())
    }
}

impl From<String> for Fail {
    fn from(s: String) -> Self {
        Fail(s)
    }
}

impl From<&str> for Fail {
    fn from(s: &str) -> Self {
        Fail(s.to_string())
    }
}

type Check = Result<String, Fail>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fixture(name: &str) -> Domain {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    Domain::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), Fail> {
    if ok {
        Ok(())
    } else {
        Err(Fail(msg.into()))
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), Fail> {
    ensure(elapsed < limit, format!("runtime {elapsed:.2?} exceeds {limit:?}"))
}

// Independent closed forms for the oracles below.

fn disc_kernel(r2: f64) -> f64 {
    1.0 / (PI * (1.0 - r2).powi(2))
}

fn disc_metric(r2: f64) -> f64 {
    SQRT_2 / (1.0 - r2)
}

/// Everything later criteria need from earlier ones.
#[derive(Default)]
struct Suite {
    margins: Vec<CaratheodoryMargin>,
    experiments: usize,
}

fn half_plane_kernel() -> Check {
    let start = Instant::now();
    let d = fixture("halfplane.json");
    let k = model::kernel_closed(&d, &ComplexPoint::real(&[-1.0]))?.k;
    let elapsed = start.elapsed();
    let want = 1.0 / (4.0 * PI);
    ensure((k - want).abs() <= 1e-14, format!("K = {k:.17e}, want {want:.17e}"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("K = {k:.16}, |err| = {:.1e}, {elapsed:.2?}", (k - want).abs()))
}

fn disc_numeric() -> Check {
    let start = Instant::now();
    let d = fixture("disc.json");
    let gs = GramSystem::build(&d, &RuleTarget::new(30))?;
    let x = ComplexVector::real(&[1.0]);
    let mut worst_k: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..20 {
        let r = 0.95 * i as f64 / 19.0;
        let z = ComplexPoint::real(&[r]);
        let e = metric_estimate(&gs, &z, &x)?;
        let (ek, eb) = (rel(e.k, disc_kernel(r * r)), rel(e.b, disc_metric(r * r)));
        worst_k = worst_k.max(ek);
        worst_b = worst_b.max(eb);
        if ek >= 1e-5 || eb >= 1e-5 {
            failures.push(format!("r={r:.3} (K {ek:.1e}, B {eb:.1e})"));
        }
    }
    let b0 = metric_estimate(&gs, &ComplexPoint::real(&[0.0]), &x)?.b;
    let elapsed = start.elapsed();
    ensure((b0 - SQRT_2).abs() <= 1e-9, format!("B(0;1) = {b0:.15}"))?;
    ensure(
        failures.is_empty(),
        format!(
            "{} of 20 radii over 1e-5, first {}, worst K {worst_k:.1e}, worst B {worst_b:.1e}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("worst K {worst_k:.1e}, worst B {worst_b:.1e}, {elapsed:.2?}"))
}

fn product_identity(suite: &mut Suite) -> Check {
    let start = Instant::now();
    let d = fixture("bidisc.json");
    let est = Estimator::new(&d, &EstimatorConfig::numeric(None))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_closed: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    let mut items = Vec::new();
    for _ in 0..50 {
        let coords: Vec<Complex64> = (0..2)
            .map(|_| Complex64::from_polar(0.5 * rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI)))
            .collect();
        let oracle = disc_kernel(coords[0].norm_sqr()) * disc_kernel(coords[1].norm_sqr());
        let z = ComplexPoint::new(coords)?;
        let closed = model::kernel_closed(&d, &z)?.k;
        worst_closed = worst_closed.max(rel(closed, oracle));
        let x = ComplexVector::new(vec![
            c(rng.random_range(-1.0..1.0), 0.3),
            c(0.5, rng.random_range(-1.0..1.0)),
        ])?;
        let s = est.estimate(&z, &x)?;
        worst_numeric = worst_numeric.max(rel(s.k, oracle));
        items.push((z, x, s));
    }
    suite.margins.extend(caratheodory_check(&d, &items)?);
    let elapsed = start.elapsed();
    ensure(worst_closed <= 1e-12, format!("closed form off by {worst_closed:.1e}"))?;
    ensure(
        worst_numeric <= 1e-4,
        format!("numeric engine off by {worst_numeric:.1e}"),
    )?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "closed {worst_closed:.1e}, numeric {worst_numeric:.1e}, {elapsed:.2?}"
    ))
}

fn scaling_identity() -> Check {
    let start = Instant::now();
    let disc = DomainSpec::unit_disc();
    let mut worst_closed: f64 = 0.0;
    for z in [c(0.0, 0.0), c(0.3, -0.1), c(-0.9, 0.6), c(1.5, 0.2)] {
        let (l, r) = scaling_identity_check(&disc, 2.0, &ComplexPoint::new(vec![z])?)?;
        worst_closed = worst_closed.max(rel(l.k, r.k));
    }
    ensure(
        worst_closed <= 1e-12,
        format!("disc sides differ by {worst_closed:.1e}"),
    )?;

    let unit_box = fixture("unit_box.json").spec().clone();
    let mut worst_sigma: f64 = 0.0;
    for z in [c(0.0, 0.0), c(0.1, 0.05), c(0.3, -0.2)] {
        // the rule is affine-equivariant, so the two sides need independent samples
        let mut seed = 42;
        let ((l, le), (r, re)) = scaling_identity_with(&unit_box, 2.0, &ComplexPoint::new(vec![z])?, |d, p| {
            let config = EstimatorConfig {
                seed,
                ..EstimatorConfig::numeric(None)
            };
            seed += 1;
            let s = Estimator::new(d, &config)?.kernel(p)?;
            Ok((s.k, s.k_error))
        })?;
        let err = le.hypot(re);
        ensure(err > 0.0, "qmc error estimate is zero")?;
        let sigma = (l - r).abs() / err;
        worst_sigma = worst_sigma.max(sigma);
        ensure(sigma <= 3.0, format!("box sides {l:.6e} vs {r:.6e}, {sigma:.2} sigma"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "disc {worst_closed:.1e}, box worst {worst_sigma:.2} sigma, {elapsed:.2?}"
    ))
}

fn bidisc_path(est: &Estimator) -> Result<PathExperiment, Fail> {
    let probes = [
        ComplexVector::real(&[1.0, 0.0]),
        ComplexVector::real(&[0.0, 1.0]),
        ComplexVector::real(&[1.0, 1.0]),
    ];
    Ok(run_path_experiment(
        est,
        &ComplexPoint::real(&[1.0, 0.0]),
        &ComplexVector::real(&[-1.0, 0.0]),
        &geometric_grid(0.5, 12),
        &probes,
    )?)
}

fn kernel_growth(suite: &mut Suite) -> Check {
    let start = Instant::now();
    let est = Estimator::new(&fixture("bidisc.json"), &EstimatorConfig::default())?;
    let exp = bidisc_path(&est)?;
    suite.margins.extend(caratheodory_path(&exp));
    suite.experiments += 1;
    let series = kernel_growth_series(&exp, KERNEL_GROWTH_FLOOR);
    let elapsed = start.elapsed();
    let last = *series.k_dist2.last().ok_or("no converged samples")?;
    let inf = *series.running_inf.last().unwrap();
    let limit = 1.0 / (4.0 * PI * PI);
    ensure(
        rel(last, limit) <= 0.05,
        format!("K dist^2 = {last:.6} at t = {:e}", series.t.last().unwrap()),
    )?;
    ensure(inf >= 0.02, format!("running infimum {inf:.6}"))?;
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "K dist^2 = {last:.6} at t = {:e} (limit {limit:.6}), inf {inf:.6}, {elapsed:.2?}",
        series.t.last().unwrap()
    ))
}

fn classification(suite: &mut Suite) -> Check {
    let start = Instant::now();
    let est = Estimator::new(&fixture("bidisc.json"), &EstimatorConfig::default())?;
    let exp = bidisc_path(&est)?;
    ensure(!exp.truncated(), "bidisc path did not converge everywhere")?;
    let normal = &exp.probes[0];
    let slope = normal.fit.ok_or("no fit for (1,0)")?.slope;
    ensure((slope + 1.0).abs() <= 0.05, format!("(1,0) slope {slope:.4}"))?;
    ensure(normal.classification == Classification::BlowUp, "(1,0) not blow-up")?;
    for s in exp.probe_samples(1) {
        ensure(
            (s.b - SQRT_2).abs() <= 1e-3,
            format!("(0,1) B = {:.6} at t = {:e}", s.b, s.t),
        )?;
    }
    ensure(
        exp.probes[1].classification == Classification::Bounded,
        "(0,1) not bounded",
    )?;
    ensure(
        exp.probes[2].classification == Classification::BlowUp,
        "(1,1) not blow-up",
    )?;
    let mut summary = vec![format!("bidisc slope {slope:.4}")];
    suite.margins.extend(caratheodory_path(&exp));
    suite.experiments += 1;

    let cases: [(&str, [f64; 3], [f64; 3], Vec<[f64; 3]>); 4] = [
        (
            "bidisc",
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        ),
        (
            "tridisc",
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
        ),
        (
            "ball",
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        ),
        (
            "box_times_disc",
            [0.1, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        ),
    ];
    for (name, z0, w, probes) in cases {
        let d = fixture(&format!("{name}.json"));
        let n = d.dim();
        let est = Estimator::new(&d, &EstimatorConfig::default())?;
        let probes: Vec<ComplexVector> = probes.iter().map(|p| ComplexVector::real(&p[..n])).collect();
        let exp = run_path_experiment(
            &est,
            &ComplexPoint::real(&z0[..n]),
            &ComplexVector::real(&w[..n]),
            &geometric_grid(0.5, 12),
            &probes,
        )?;
        suite.margins.extend(caratheodory_path(&exp));
        suite.experiments += 1;
        for (i, p) in exp.probes.iter().enumerate() {
            ensure(
                p.agrees(),
                format!(
                    "{name} probe {i}: {} but L(z0) predicts {} (slope {:?})",
                    p.classification.as_str(),
                    p.predicted.as_str(),
                    p.fit.map(|f| f.slope)
                ),
            )?;
        }
        if name == "ball" {
            ensure(exp.flat.is_trivial(), "ball flat space is not {0}")?;
        }
        summary.push(format!("{name} {}/{} agree", exp.probes.len(), exp.probes.len()));
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("{}, {elapsed:.2?}", summary.join(", ")))
}

fn caratheodory_floor(suite: &Suite) -> Check {
    ensure(!suite.margins.is_empty(), "no samples collected")?;
    let bad: Vec<_> = suite.margins.iter().filter(|m| !m.pass).collect();
    let min = suite.margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    ensure(
        bad.is_empty(),
        format!("{} violations, worst margin {min:.3e}", bad.len()),
    )?;
    Ok(format!(
        "{} samples from {} experiments, min margin {min:.3e}",
        suite.margins.len(),
        suite.experiments
    ))
}

fn cone_bound() -> Check {
    let est = Estimator::new(&fixture("bidisc.json"), &EstimatorConfig::default())?;
    let generators = [
        ComplexPoint::real(&[0.5, 0.0]),
        ComplexPoint::real(&[0.0, 0.0]),
        ComplexPoint::new(vec![c(-0.3, 0.4), c(0.0, 0.0)])?,
    ];
    let t: Vec<f64> = (0..=12).map(|k| 0.5f64.powi(k)).collect();
    let report = cone_bound_check(
        &est,
        &ComplexPoint::real(&[1.0, 0.0]),
        &generators,
        &t,
        &[ComplexVector::real(&[0.0, 1.0])],
    )?;
    ensure(
        (report.c_emp - SQRT_2).abs() <= 1e-3,
        format!("C_emp = {:.6}", report.c_emp),
    )?;
    ensure(
        report.max_ratio < 1.05,
        format!("max/min ratio {:.4}", report.max_ratio),
    )?;
    Ok(format!("C_emp = {:.9}, max/min {:.6}", report.c_emp, report.max_ratio))
}

fn localization() -> Check {
    let d = fixture("disc.json");
    let u = fixture("right_of_half.json").spec().clone();
    let t = [0.4, 0.2, 0.1, 0.05, 0.02, 0.01];
    let r = localization_ratio(
        &d,
        &u,
        &ComplexPoint::real(&[1.0]),
        &ComplexVector::real(&[-1.0]),
        &t,
        &EstimatorConfig::default(),
    )?;
    for (i, (kd, kdu)) in r.k_d.iter().zip(&r.k_du).enumerate() {
        ensure(*kd <= kdu * (1.0 + 1e-3), format!("K_D > K_(D∩U) at t = {}", t[i]))?;
        // K_D does not depend on the clip
        let oracle = disc_kernel((1.0 - t[i]).powi(2));
        ensure(rel(*kd, oracle) <= 1e-12, format!("K_D off at t = {}", t[i]))?;
    }
    ensure(
        r.final_ratio >= 0.9,
        format!("ratio at t = 1e-2 is {:.5}", r.final_ratio),
    )?;
    Ok(format!(
        "ratios {:.4} .. {:.5}, max {:.5}",
        r.ratio[0], r.final_ratio, r.max_ratio
    ))
}

fn peak_function() -> Check {
    let d = fixture("shifted_disc_times_disc.json");
    let spec = build_peak_function(&d, &ComplexPoint::real(&[0.0, 0.0]))?;
    let report = verify_peak(&d, &spec, 10_000, 42)?;
    ensure(
        report.off_samples >= 10_000,
        format!("{} off samples", report.off_samples),
    )?;
    ensure(
        report.off_violations == 0,
        format!("{} off violations, max {:.6}", report.off_violations, report.max_off),
    )?;
    ensure(
        report.on_violations == 0,
        format!(
            "{} on violations, max dev {:.1e}",
            report.on_violations, report.max_on_deviation
        ),
    )?;
    let mut worst_spot: f64 = 0.0;
    for w in [c(0.0, 0.0), c(0.5, -0.5), c(0.0, 1.0)] {
        let v = spec.eval(&ComplexPoint::new(vec![c(-1.0, 0.0), w])?).norm();
        worst_spot = worst_spot.max(rel(v, (-0.75f64).exp()));
    }
    ensure(worst_spot <= 1e-14, format!("spot value off by {worst_spot:.1e}"))?;
    Ok(format!(
        "{} off (max |f| {:.6}), {} on (max dev {:.1e}), spot err {worst_spot:.1e}",
        report.off_samples, report.max_off, report.on_samples, report.max_on_deviation
    ))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn point_in(radius: f64, n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (0.0..radius, 0.0..2.0 * PI).prop_map(|(r, a)| Complex64::from_polar(r, a)),
        n,
    )
}

fn direction(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), n)
        .prop_filter("nonzero", |v| v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-2)
}

fn run<T: std::fmt::Debug>(name: &str, r: Result<(), TestError<T>>, done: &mut Vec<String>) -> Result<(), Fail> {
    match r {
        Ok(()) => {
            done.push(name.to_string());
            Ok(())
        }
        Err(e) => Err(Fail(format!("{name}: {e}"))),
    }
}

fn property_suites() -> Check {
    let mut done = Vec::new();

    // basis monotonicity
    let bidisc = fixture("bidisc.json");
    let full = GramSystem::build(&bidisc, &RuleTarget::new(10))?;
    let blocks: Vec<GramSystem> = (1..=10).map(|d| full.truncated(d)).collect::<Result<_, _>>()?;
    let r = runner(64).run(&(point_in(0.8, 2), direction(2)), |(z, x)| {
        let z = ComplexPoint::new(z).unwrap();
        let x = ComplexVector::new(x).unwrap();
        let mut prev = (0.0, 0.0);
        for gs in &blocks {
            let k = kernel_estimate(gs, &z).unwrap();
            let m = m_estimate(gs, &z, &x).unwrap();
            prop_assert!(k >= prev.0 * (1.0 - 1e-10), "K dropped at degree {}", gs.degree());
            prop_assert!(m >= prev.1 * (1.0 - 1e-8), "M dropped at degree {}", gs.degree());
            prev = (k, m);
        }
        Ok(())
    });
    run("basis monotonicity", r, &mut done)?;

    // domain monotonicity
    let small = GramSystem::build(&Domain::new(DomainSpec::disc(c(0.0, 0.0), 0.8))?, &RuleTarget::new(30))?;
    let big = GramSystem::build(&fixture("disc.json"), &RuleTarget::new(30))?;
    let r = runner(64).run(&point_in(0.5, 1), |z| {
        let z = ComplexPoint::new(z).unwrap();
        prop_assert!(kernel_estimate(&small, &z).unwrap() >= kernel_estimate(&big, &z).unwrap());
        Ok(())
    });
    run("domain monotonicity (discs)", r, &mut done)?;

    let config = EstimatorConfig::numeric(None);
    let inner = Estimator::new(&fixture("unit_box.json"), &config)?;
    let outer = Estimator::new(&Domain::new(DomainSpec::complex_box(&[c(0.0, 0.0)], &[0.75]))?, &config)?;
    let r = runner(32).run(&((-0.3..0.3f64), (-0.3..0.3f64)), |(a, b)| {
        let z = ComplexPoint::new(vec![c(a, b)]).unwrap();
        let (ki, ko) = (inner.kernel(&z).unwrap(), outer.kernel(&z).unwrap());
        prop_assert!(
            ki.k + 3.0 * ki.k_error >= ko.k - 3.0 * ko.k_error,
            "{} < {}",
            ki.k,
            ko.k
        );
        Ok(())
    });
    run("domain monotonicity (boxes)", r, &mut done)?;

    // homogeneity
    let est = Estimator::new(&bidisc, &config)?;
    let r = runner(64).run(
        &(point_in(0.7, 2), direction(2), (0.05..20.0f64), (0.0..2.0 * PI)),
        |(z, x, s, a)| {
            let z = ComplexPoint::new(z).unwrap();
            let x = ComplexVector::new(x).unwrap();
            let lambda = Complex64::from_polar(s, a);
            let b1 = est.estimate(&z, &x).unwrap().b;
            let b2 = est.estimate(&z, &x.scale(lambda)).unwrap().b;
            prop_assert!(rel(b2, s * b1) <= 1e-9, "{b2} vs {}", s * b1);
            Ok(())
        },
    );
    run("B homogeneity", r, &mut done)?;

    // complex linearity of L(z0)
    let flats = [
        ("bidisc.json", vec![1.0, 0.0]),
        ("tridisc.json", vec![1.0, 1.0, 0.0]),
        ("tridisc.json", vec![1.0, 0.0, 0.0]),
        ("box_times_disc.json", vec![0.1, 1.0]),
        ("box_times_disc.json", vec![0.5, 0.2]),
    ];
    for (name, z0) in flats {
        let d = fixture(name);
        let z0 = ComplexPoint::real(&z0);
        let flat = d.flat_space(&z0)?;
        let n = d.dim();
        let r = runner(48).run(
            &(direction(n), direction(n), direction(1), direction(1)),
            |(u, v, a, b)| {
                let pu = flat.project(&ComplexVector::new(u.clone()).unwrap());
                let pv = flat.project(&ComplexVector::new(v).unwrap());
                let combo = pu.scale(a[0]).add(&pv.scale(b[0]));
                prop_assert!(flat.contains_direction(&combo, 1e-9));
                if !combo.is_zero() {
                    let unit = combo.normalized().unwrap();
                    prop_assert!(d.is_flat_direction_numeric(&z0, &unit, flat.radius, 16));
                }
                let rest = ComplexVector::new(u).unwrap().sub(&pu);
                if rest.norm() > 1e-6 {
                    prop_assert!(!flat.contains_direction(&rest, 1e-6));
                }
                Ok(())
            },
        );
        run(&format!("flat-space linearity ({name})"), r, &mut done)?;
    }

    // analytic derivative vs central differences
    let disc = GramSystem::build(&fixture("disc.json"), &RuleTarget::new(20))?;
    for gs in [&disc, &full] {
        let n = gs.domain().dim();
        let r = runner(64).run(&(point_in(0.6, n), direction(n)), |(z, x)| {
            let z = ComplexPoint::new(z).unwrap();
            let x = ComplexVector::new(x).unwrap();
            let h = 1e-5 * gs.domain().diameter() / 2.0;
            let kp = kernel_estimate(gs, &z.offset(c(h, 0.0), &x)).unwrap();
            let km = kernel_estimate(gs, &z.offset(c(-h, 0.0), &x)).unwrap();
            let fd = (kp - km) / (2.0 * h);
            let analytic = kernel_derivative(gs, &z, &x).unwrap();
            let k = kernel_estimate(gs, &z).unwrap();
            prop_assert!(
                (analytic - fd).abs() <= 1e-4 * analytic.abs().max(1e-3 * k),
                "analytic {analytic} vs fd {fd}"
            );
            Ok(())
        });
        run(&format!("derivative cross-check (n={n})"), r, &mut done)?;
    }
    Ok(format!("{} suites green", done.len()))
}

fn main() {
    let mut suite = Suite::default();
    let mut outcomes: Vec<(u32, &str, Check)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut(&mut Suite) -> Check| {
        let r = catch_unwind(AssertUnwindSafe(|| f(&mut suite))).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(Fail(format!("panic: {msg}")))
        });
        let tag = if r.is_ok() { "PASS" } else { "FAIL" };
        let detail = match &r {
            Ok(s) | Err(Fail(s)) => s,
        };
        println!("criterion {id:>2} {tag} {name}: {detail}");
        outcomes.push((id, name, r));
    };

    record(1, "half-plane kernel", &mut |_| half_plane_kernel());
    record(2, "disc numerics vs closed form", &mut |_| disc_numeric());
    record(3, "product identity", &mut product_identity);
    record(4, "scaling identity", &mut |_| scaling_identity());
    record(5, "kernel growth along normal path", &mut kernel_growth);
    record(6, "metric classification", &mut classification);
    record(7, "Carathéodory floor", &mut |s| caratheodory_floor(s));
    record(8, "cone bound", &mut |_| cone_bound());
    record(9, "localization", &mut |_| localization());
    record(10, "peak function", &mut |_| peak_function());
    record(11, "property suites", &mut |_| property_suites());

    let failed: Vec<u32> = outcomes.iter().filter(|o| o.2.is_err()).map(|o| o.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
