//! Closed-form Bergman kernels `K(z)` and metrics `B(z;X)` on model domains,
//! composed through products and complex-affine images.
//!
//! | domain | `K(z)` | `B(z;X)` |
//! |---|---|---|
//! | disc `(c, r)` | `r^2 / (pi (r^2 - |z-c|^2)^2)` | `sqrt(2) r |X| / (r^2 - |z-c|^2)` |
//! | half-plane | `1 / (4 pi d^2)` | `|X| / (sqrt(2) d)` |
//! | ball `(c, R)` in C^n | `n!/pi^n * R^2 / (R^2 - |w|^2)^{n+1}` | see [`ball`] |
//! | product | `K_1 K_2` | `sqrt(B_1^2 + B_2^2)` |
//! | affine image `w = Az + b` | `|det A|^{-2} K_base(z)` | `B_base(z; A^{-1} X)` |
//!
//! A disc clipped by a half-plane is handled through its conformal map onto
//! the upper half-plane.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::domain::polytope::HalfSpace;
use crate::domain::{AffineMapSpec, Domain, DomainSpec, Membership, Shape};
use crate::error::{BergmanError, Result};
use crate::point::{check_dim, hermitian, norm, ComplexPoint, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelSource {
    ClosedForm,
    Composed,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub k: f64,
    pub source: KernelSource,
}

/// `B = M / sqrt(K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValue {
    pub b: f64,
    pub m: f64,
    pub k: f64,
}

/// Whether [`kernel_closed`] and [`metric_closed`] accept this domain.
pub fn has_closed_form(domain: &Domain) -> bool {
    match &domain.shape {
        Shape::Disc { .. } | Shape::Polydisc { .. } | Shape::Ball { .. } | Shape::HalfPlane(_) => true,
        Shape::Polytope(_) => false,
        Shape::Product(l, r) => has_closed_form(l) && has_closed_form(r),
        Shape::Affine { base, .. } => has_closed_form(base),
        Shape::Clipped { base, .. } => matches!(base.shape, Shape::Disc { .. }),
    }
}

fn source_of(domain: &Domain) -> KernelSource {
    match &domain.shape {
        Shape::Product(..) | Shape::Affine { .. } | Shape::Polydisc { .. } => KernelSource::Composed,
        _ => KernelSource::ClosedForm,
    }
}

fn unsupported() -> BergmanError {
    BergmanError::Unsupported("no closed form; use the numeric engine".into())
}

pub fn kernel_closed(domain: &Domain, z: &ComplexPoint) -> Result<KernelValue> {
    if domain.contains(z)? != Membership::Interior {
        return Err(BergmanError::NotInterior);
    }
    let k = kernel_at(domain, z.coords())?;
    Ok(KernelValue {
        k,
        source: source_of(domain),
    })
}

pub fn metric_closed(domain: &Domain, z: &ComplexPoint, x: &ComplexVector) -> Result<MetricValue> {
    check_dim(domain.dim(), x.dim())?;
    if domain.contains(z)? != Membership::Interior {
        return Err(BergmanError::NotInterior);
    }
    let k = kernel_at(domain, z.coords())?;
    let b = metric_at(domain, z.coords(), x.coords())?;
    Ok(MetricValue { b, m: b * k.sqrt(), k })
}

fn disc_kernel(center: Complex64, radius: f64, z: Complex64) -> f64 {
    let r2 = radius * radius;
    r2 / (PI * (r2 - (z - center).norm_sqr()).powi(2))
}

fn disc_metric(center: Complex64, radius: f64, z: Complex64, x: Complex64) -> f64 {
    SQRT_2 * radius * x.norm() / (radius * radius - (z - center).norm_sqr())
}

/// Ball kernel and squared metric in C^n; `w = z - c`.
pub fn ball(center: &[Complex64], radius: f64, z: &[Complex64], x: &[Complex64]) -> (f64, f64) {
    let n = center.len();
    let w: Vec<Complex64> = z.iter().zip(center).map(|(a, b)| a - b).collect();
    let gap = radius * radius - norm(&w).powi(2);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let k = fact / PI.powi(n as i32) * radius * radius / gap.powi(n as i32 + 1);
    let b2 = (n as f64 + 1.0) * (norm(x).powi(2) * gap + hermitian(&w, x).norm_sqr()) / (gap * gap);
    (k, b2)
}

fn kernel_at(domain: &Domain, z: &[Complex64]) -> Result<f64> {
    Ok(match &domain.shape {
        Shape::Disc { center, radius } => disc_kernel(*center, *radius, z[0]),
        Shape::Polydisc { centers, radii } => (0..domain.dim())
            .map(|i| disc_kernel(centers[i], radii[i], z[i]))
            .product(),
        Shape::Ball { center, radius } => ball(center, *radius, z, &vec![Complex64::new(0.0, 0.0); z.len()]).0,
        Shape::HalfPlane(h) => {
            let d = -h.signed_distance(z);
            1.0 / (4.0 * PI * d * d)
        }
        Shape::Polytope(_) => return Err(unsupported()),
        Shape::Product(l, r) => kernel_at(l, &z[..l.dim()])? * kernel_at(r, &z[l.dim()..])?,
        Shape::Affine { base, map } => kernel_at(base, &map.pull(z))? / map.det.norm_sqr(),
        Shape::Clipped { base, cut } => match &base.shape {
            Shape::Disc { center, radius } => {
                Lune::new(*center, *radius, cut, base)?
                    .kernel_metric(z[0], Complex64::new(0.0, 0.0))
                    .0
            }
            _ => return Err(unsupported()),
        },
    })
}

fn metric_at(domain: &Domain, z: &[Complex64], x: &[Complex64]) -> Result<f64> {
    Ok(match &domain.shape {
        Shape::Disc { center, radius } => disc_metric(*center, *radius, z[0], x[0]),
        Shape::Polydisc { centers, radii } => (0..domain.dim())
            .map(|i| disc_metric(centers[i], radii[i], z[i], x[i]).powi(2))
            .sum::<f64>()
            .sqrt(),
        Shape::Ball { center, radius } => ball(center, *radius, z, x).1.sqrt(),
        Shape::HalfPlane(h) => {
            let d = -h.signed_distance(z);
            x[0].norm() / (SQRT_2 * d)
        }
        Shape::Polytope(_) => return Err(unsupported()),
        Shape::Product(l, r) => {
            let k = l.dim();
            metric_at(l, &z[..k], &x[..k])?.hypot(metric_at(r, &z[k..], &x[k..])?)
        }
        Shape::Affine { base, map } => metric_at(base, &map.pull(z), &map.pull_vec(x))?,
        Shape::Clipped { base, cut } => match &base.shape {
            Shape::Disc { center, radius } => Lune::new(*center, *radius, cut, base)?.kernel_metric(z[0], x[0]).1,
            _ => return Err(unsupported()),
        },
    })
}

/// Disc `|z - c| < r` cut by a half-plane: a circular lune with corners `p`, `q`.
/// `m(z) = (z - p)/(z - q)` sends it onto a sector of opening `beta` starting
/// at angle `theta0`; `(e^{-i theta0} m)^{pi/beta}` finishes the map onto the
/// upper half-plane.
struct Lune {
    p: Complex64,
    q: Complex64,
    theta0: f64,
    beta: f64,
    /// Cut misses the disc: the clip removes nothing.
    whole_disc: Option<(Complex64, f64)>,
}

fn arg_from(w: Complex64, start: f64) -> f64 {
    (w.arg() - start).rem_euclid(std::f64::consts::TAU)
}

impl Lune {
    fn new(center: Complex64, radius: f64, cut: &HalfSpace, base: &Domain) -> Result<Lune> {
        let a = cut.normal[0];
        let an = cut.normal_norm;
        let ahat = a / an;
        let sd = cut.signed_distance(&[center]);
        if sd.abs() >= radius {
            if sd < 0.0 {
                return Ok(Lune {
                    p: center,
                    q: center,
                    theta0: 0.0,
                    beta: 0.0,
                    whole_disc: Some((center, radius)),
                });
            }
            return Err(BergmanError::InvalidDomain("clipped disc is empty".into()));
        }
        let foot = center - ahat * sd;
        let h = (radius * radius - sd * sd).sqrt();
        let tangent = Complex64::new(0.0, 1.0) * ahat;
        let p = foot + tangent * h;
        let q = foot - tangent * h;
        let m = |z: Complex64| (z - p) / (z - q);
        let arc_mid = center - ahat * radius;
        let a1 = m(arc_mid).arg();
        let a2 = m(foot).arg();
        // interior probe between the chord and the arc
        let probe = 0.5 * (arc_mid + foot);
        debug_assert_eq!(base.dim(), 1);
        let d = arg_from(Complex64::from_polar(1.0, a2), a1);
        let (theta0, beta) = if arg_from(m(probe), a1) < d {
            (a1, d)
        } else {
            (a2, std::f64::consts::TAU - d)
        };
        Ok(Lune {
            p,
            q,
            theta0,
            beta,
            whole_disc: None,
        })
    }

    /// `(K, B)` at `z` for direction `x`.
    fn kernel_metric(&self, z: Complex64, x: Complex64) -> (f64, f64) {
        if let Some((c, r)) = self.whole_disc {
            return (disc_kernel(c, r, z), disc_metric(c, r, z, x));
        }
        let w = (z - self.p) / (z - self.q);
        let s = PI / self.beta;
        let ang = arg_from(w, self.theta0) * s;
        let rho = w.norm().powf(s);
        let zeta = Complex64::from_polar(rho, ang);
        let dm = ((self.p - self.q) / (z - self.q).powi(2)).norm();
        let deriv = s * rho / w.norm() * dm;
        let y = zeta.im;
        (deriv * deriv / (4.0 * PI * y * y), deriv * x.norm() / (SQRT_2 * y))
    }
}

/// `F_t = {z : t z in F}`; `F_{1/alpha}` is `alpha F` and `F_alpha` is `F / alpha`.
pub fn scaled_domain(f: &DomainSpec, dim: usize, t: f64) -> DomainSpec {
    DomainSpec::affine(f.clone(), AffineMapSpec::scaling(dim, 1.0 / t))
}

/// Both sides of `K_{F_{1/alpha}}(z) = alpha^{-4k} K_{F_alpha}(alpha^{-2} z)` for a
/// domain `F` in C^k, each evaluated with `eval` (value and error estimate).
pub fn scaling_identity_with(
    f: &DomainSpec,
    alpha: f64,
    z: &ComplexPoint,
    mut eval: impl FnMut(&Domain, &ComplexPoint) -> Result<(f64, f64)>,
) -> Result<((f64, f64), (f64, f64))> {
    if !(alpha >= 1.0) {
        return Err(BergmanError::InvalidArgument("alpha must be >= 1".into()));
    }
    let k = Domain::new(f.clone())?.dim();
    check_dim(k, z.dim())?;
    let left_dom = Domain::new(scaled_domain(f, k, 1.0 / alpha))?;
    let right_dom = Domain::new(scaled_domain(f, k, alpha))?;
    let (lv, le) = eval(&left_dom, z)?;
    let zs = z.scale(Complex64::new(alpha.powi(-2), 0.0));
    let (rv, re) = eval(&right_dom, &zs)?;
    let factor = alpha.powi(-4 * k as i32);
    Ok(((lv, le), (factor * rv, factor * re)))
}

/// Closed-form evaluation of both sides of the scaling identity.
pub fn scaling_identity_check(f: &DomainSpec, alpha: f64, z: &ComplexPoint) -> Result<(KernelValue, KernelValue)> {
    let ((l, _), (r, _)) = scaling_identity_with(f, alpha, z, |d, p| Ok((kernel_closed(d, p)?.k, 0.0)))?;
    Ok((
        KernelValue {
            k: l,
            source: KernelSource::Composed,
        },
        KernelValue {
            k: r,
            source: KernelSource::Composed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dom(spec: DomainSpec) -> Domain {
        Domain::new(spec).unwrap()
    }

    #[test]
    fn halfplane_at_unit_distance() {
        let hp = dom(DomainSpec::HalfPlane {
            normal: c(1.0, 0.0),
            offset: 0.0,
        });
        let k = kernel_closed(&hp, &ComplexPoint::real(&[-1.0])).unwrap();
        assert_relative_eq!(k.k, 1.0 / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(k.k, 0.0795775, epsilon = 1e-7);
    }

    #[test]
    fn disc_and_bidisc_at_center() {
        let d = dom(DomainSpec::unit_disc());
        assert_relative_eq!(kernel_closed(&d, &ComplexPoint::real(&[0.0])).unwrap().k, 1.0 / PI);
        let m = metric_closed(&d, &ComplexPoint::real(&[0.0]), &ComplexVector::real(&[1.0])).unwrap();
        assert_relative_eq!(m.b, SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(m.m, (2.0 / PI).sqrt(), max_relative = 1e-15);
        let bd = dom(DomainSpec::unit_polydisc(2));
        assert_relative_eq!(
            kernel_closed(&bd, &ComplexPoint::real(&[0.0, 0.0])).unwrap().k,
            1.0 / (PI * PI)
        );
        let m = metric_closed(&bd, &ComplexPoint::real(&[0.5, 0.0]), &ComplexVector::real(&[0.0, 1.0])).unwrap();
        assert_relative_eq!(m.b, SQRT_2, max_relative = 1e-15);
        let m0 = metric_closed(&bd, &ComplexPoint::real(&[0.5, 0.0]), &ComplexVector::real(&[0.0, 0.0])).unwrap();
        assert_eq!(m0.b, 0.0);
    }

    #[test]
    fn polytope_has_no_closed_form() {
        let sq = dom(DomainSpec::complex_box(&[c(0.0, 0.0)], &[0.5]));
        assert!(!has_closed_form(&sq));
        assert!(matches!(
            kernel_closed(&sq, &ComplexPoint::real(&[0.0])),
            Err(BergmanError::Unsupported(_))
        ));
    }

    #[test]
    fn ball_in_one_dimension_is_disc() {
        let b = dom(DomainSpec::Ball {
            center: vec![c(0.2, 0.1)],
            radius: 1.5,
        });
        let d = dom(DomainSpec::disc(c(0.2, 0.1), 1.5));
        let z = ComplexPoint::from_re_im(&[(0.7, -0.4)]).unwrap();
        let x = ComplexVector::from_re_im(&[(0.3, 1.0)]).unwrap();
        let mb = metric_closed(&b, &z, &x).unwrap();
        let md = metric_closed(&d, &z, &x).unwrap();
        assert_relative_eq!(mb.k, md.k, max_relative = 1e-14);
        assert_relative_eq!(mb.b, md.b, max_relative = 1e-14);
    }

    #[test]
    fn scaling_identity_examples() {
        let (l, r) = scaling_identity_check(&DomainSpec::unit_disc(), 2.0, &ComplexPoint::real(&[0.0])).unwrap();
        assert_relative_eq!(l.k, 1.0 / (4.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(r.k, 1.0 / (4.0 * PI), max_relative = 1e-14);
        let (l, r) =
            scaling_identity_check(&DomainSpec::unit_polydisc(2), 2.0, &ComplexPoint::real(&[0.0, 0.0])).unwrap();
        assert_relative_eq!(l.k, 1.0 / (16.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(r.k, l.k, max_relative = 1e-14);
        let (l, r) = scaling_identity_check(&DomainSpec::unit_disc(), 1.0, &ComplexPoint::real(&[0.3])).unwrap();
        assert_eq!(l.k, r.k);
    }

    #[test]
    fn lune_dominates_disc_and_matches_far_cut() {
        let disc = dom(DomainSpec::unit_disc());
        let lune = dom(DomainSpec::clipped(DomainSpec::unit_disc(), vec![c(-1.0, 0.0)], 0.5));
        for &(x, y) in &[(0.6, 0.0), (0.9, 0.1), (0.75, -0.3), (0.99, 0.0)] {
            let z = ComplexPoint::from_re_im(&[(x, y)]).unwrap();
            let kl = kernel_closed(&lune, &z).unwrap().k;
            let kd = kernel_closed(&disc, &z).unwrap().k;
            assert!(kl >= kd, "lune {kl} < disc {kd} at {x},{y}");
        }
        // a cut that misses the disc leaves it unchanged
        let same = dom(DomainSpec::clipped(DomainSpec::unit_disc(), vec![c(1.0, 0.0)], -2.0));
        let z = ComplexPoint::real(&[0.3]);
        assert_relative_eq!(kernel_closed(&same, &z).unwrap().k, kernel_closed(&disc, &z).unwrap().k);
    }

    #[test]
    fn half_disc_symmetric_and_blows_up_at_chord() {
        // upper half disc: cut Im z > 0, i.e. Re(conj(-i) z) < 0
        let hd = dom(DomainSpec::clipped(DomainSpec::unit_disc(), vec![c(0.0, -1.0)], 0.0));
        let k1 = kernel_closed(&hd, &ComplexPoint::from_re_im(&[(0.3, 0.4)]).unwrap())
            .unwrap()
            .k;
        let k2 = kernel_closed(&hd, &ComplexPoint::from_re_im(&[(-0.3, 0.4)]).unwrap())
            .unwrap()
            .k;
        assert_relative_eq!(k1, k2, max_relative = 1e-12);
        // near the chord it behaves like the half-plane kernel 1/(4 pi y^2)
        let y = 1e-4;
        let k = kernel_closed(&hd, &ComplexPoint::from_re_im(&[(0.0, y)]).unwrap())
            .unwrap()
            .k;
        assert_relative_eq!(k * 4.0 * PI * y * y, 1.0, max_relative = 1e-3);
    }
}
