use std::f64::consts::{PI, SQRT_2};

use bergman::harness::{Estimator, EstimatorConfig};
use bergman::model;
use bergman::numeric::metric_estimate;
use bergman::quadrature::{GramSystem, RuleTarget};
use bergman::{ComplexPoint, ComplexVector, Domain, DomainSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> ComplexPoint {
    // uniform in the polydisc of the given radius, then pulled into the ball of that radius
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = if s > radius { radius / s } else { 1.0 };
    ComplexPoint::new(v.into_iter().map(|z| z * scale).collect()).unwrap()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn agreement(spec: DomainSpec, seed: u64) -> (f64, f64) {
    let d = Domain::new(spec).unwrap();
    let n = d.dim();
    let est = Estimator::new(&d, &EstimatorConfig::numeric(None)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut wk, mut wb): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let z = random_point(&mut rng, n, 0.5);
        let x = random_direction(&mut rng, n);
        let closed = model::metric_closed(&d, &z, &x).unwrap();
        let s = est.estimate(&z, &x).unwrap();
        wk = wk.max(rel(s.k, closed.k));
        wb = wb.max(rel(s.b, closed.b));
    }
    (wk, wb)
}

#[test]
fn numeric_engine_matches_disc() {
    let (k, b) = agreement(DomainSpec::unit_disc(), 1);
    assert!(k < 1e-4 && b < 1e-4, "K {k:e}, B {b:e}");
}

#[test]
fn numeric_engine_matches_bidisc() {
    let (k, b) = agreement(DomainSpec::unit_polydisc(2), 2);
    assert!(k < 1e-4 && b < 1e-4, "K {k:e}, B {b:e}");
}

#[test]
fn numeric_engine_matches_ball() {
    let (k, b) = agreement(DomainSpec::unit_ball(2), 3);
    assert!(k < 1e-4 && b < 1e-4, "K {k:e}, B {b:e}");
}

#[test]
fn ball_normalization_is_inverse_volume() {
    // vol of the unit ball in C^n is pi^n / n!
    for (n, vol) in [(1, PI), (2, PI * PI / 2.0), (3, PI.powi(3) / 6.0)] {
        let d = Domain::new(DomainSpec::unit_ball(n)).unwrap();
        let k = model::kernel_closed(&d, &ComplexPoint::zeros(n)).unwrap().k;
        assert!(rel(k, 1.0 / vol) < 1e-14, "n={n}");
    }
    let r = 1.7;
    let d = Domain::new(DomainSpec::Ball {
        center: vec![c(0.2, 0.0), c(0.0, -1.0)],
        radius: r,
    })
    .unwrap();
    let k = model::kernel_closed(&d, &ComplexPoint::new(vec![c(0.2, 0.0), c(0.0, -1.0)]).unwrap())
        .unwrap()
        .k;
    assert!(rel(k, 2.0 / (PI * PI * r.powi(4))) < 1e-14);
}

#[test]
fn half_plane_is_the_limit_of_tangent_discs() {
    let hp = Domain::new(DomainSpec::HalfPlane {
        normal: c(1.0, 0.0),
        offset: 0.0,
    })
    .unwrap();
    let z = ComplexPoint::real(&[-1.0]);
    let x = ComplexVector::real(&[1.0]);
    let k_hp = model::kernel_closed(&hp, &z).unwrap().k;
    let b_hp = model::metric_closed(&hp, &z, &x).unwrap().b;
    assert!(rel(b_hp, SQRT_2 / 2.0) < 1e-14);
    let mut prev = f64::INFINITY;
    for radius in [10.0, 100.0, 1000.0] {
        let disc = Domain::new(DomainSpec::disc(c(-radius, 0.0), radius)).unwrap();
        let k = model::kernel_closed(&disc, &z).unwrap().k;
        let err = rel(k, k_hp);
        // K_disc / K_hp = R^2 / (R - 1/2)^2 ~ 1 + 1/R
        assert!(err < 1.5 / radius, "R={radius}: {err:e}");
        assert!(err < prev);
        prev = err;
    }
}

#[test]
fn lune_is_approached_from_below() {
    let spec = DomainSpec::clipped(DomainSpec::unit_disc(), vec![c(-1.0, 0.0)], 0.2);
    let d = Domain::new(spec).unwrap();
    let full = GramSystem::build(&d, &RuleTarget::new(24)).unwrap();
    let coarse = full.truncated(16).unwrap();
    let x = ComplexVector::real(&[1.0]);
    for z in [c(0.5, 0.0), c(0.6, 0.3), c(0.4, -0.5)] {
        let z = ComplexPoint::new(vec![z]).unwrap();
        let closed = model::metric_closed(&d, &z, &x).unwrap();
        let lo = metric_estimate(&coarse, &z, &x).unwrap();
        let hi = metric_estimate(&full, &z, &x).unwrap();
        let err = hi.qmc_error.unwrap();
        // corners slow the truncation down, so only the trend and a loose gap are checked
        assert!(hi.k <= closed.k + 3.0 * err.k);
        assert!(closed.k - hi.k < closed.k - lo.k);
        assert!(closed.b - hi.b < closed.b - lo.b);
        assert!(rel(hi.k, closed.k) < 2e-3, "{} vs {}", hi.k, closed.k);
        assert!(rel(hi.b, closed.b) < 2e-2, "{} vs {}", hi.b, closed.b);
    }
}
