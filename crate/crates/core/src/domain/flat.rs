//! Boundary geometry at a point `z0`: the flat space `L(z0)` of directions
//! whose analytic discs stay in the boundary, the normal slice
//! `E(z0) = D ∩ (z0 + L(z0)^⊥)`, and the sample grids the experiments walk.

use num_complex::Complex64;
use serde::Serialize;

use super::{AffineMapSpec, Domain, DomainSpec, Membership, Shape};
use crate::error::{BergmanError, Result};
use crate::linalg::{orthogonal_complement, orthonormal_span};
use crate::point::{check_dim, hermitian, ComplexPoint, ComplexVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Phases used to certify a flat radius.
pub const FLAT_VALIDATION_PHASES: usize = 16;

/// Complex-linear space `L(z0)` with an orthonormal basis and a radius
/// `eps` such that `z0 + lambda X` stays on the boundary for `|lambda| <= eps`.
#[derive(Debug, Clone, Serialize)]
pub struct FlatSpace {
    pub base: ComplexPoint,
    pub basis: Vec<ComplexVector>,
    /// Zero when the space is trivial.
    pub radius: f64,
}

impl FlatSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthogonal projection onto the flat space.
    pub fn project(&self, x: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(x.dim());
        for q in &self.basis {
            out = out.add(&q.scale(q.dot(x)));
        }
        out
    }

    /// `true` when `x` lies in the span up to a relative residual `tol`.
    pub fn contains_direction(&self, x: &ComplexVector, tol: f64) -> bool {
        x.sub(&self.project(x)).norm() <= tol * x.norm()
    }
}

/// Normal slice through `z0`: slice coordinates `w` map to `z0 + Q w`.
#[derive(Debug, Clone)]
pub struct NormalSlice {
    pub base: ComplexPoint,
    /// Orthonormal columns of `Q`, spanning `L(z0)^⊥`.
    pub basis: Vec<ComplexVector>,
    /// `E(z0)` in slice coordinates.
    pub slice: DomainSpec,
    pub flat: FlatSpace,
}

impl NormalSlice {
    pub fn embed(&self, w: &ComplexPoint) -> ComplexPoint {
        let mut z = self.base.clone();
        for (q, wi) in self.basis.iter().zip(w.coords()) {
            z = z.offset(*wi, q);
        }
        z
    }

    pub fn project(&self, z: &ComplexPoint) -> ComplexPoint {
        let d = z.diff(&self.base);
        ComplexPoint::from(self.basis.iter().map(|q| q.dot(&d)).collect::<Vec<_>>())
    }

    /// Whether `z` lies on the affine space `N(z0)`.
    pub fn in_normal_space(&self, z: &ComplexPoint, tol: f64) -> bool {
        self.embed(&self.project(z)).distance(z) <= tol * (1.0 + z.norm())
    }
}

fn identity(n: usize) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![ZERO; n];
            e[i] = ONE;
            e
        })
        .collect()
}

fn lift(vs: Vec<Vec<Complex64>>, before: usize, after: usize) -> Vec<Vec<Complex64>> {
    vs.into_iter()
        .map(|v| {
            let mut out = vec![ZERO; before];
            out.extend(v);
            out.extend(std::iter::repeat_n(ZERO, after));
            out
        })
        .collect()
}

impl Domain {
    /// Active-constraint tolerance, relative to the domain scale.
    fn active_tol(&self) -> f64 {
        1e-9 * (1.0 + self.diameter().min(1e300))
    }

    /// Covectors `a` whose functionals `<a, .>` must vanish on `L(z0)`.
    fn blocked_covectors(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let zp = ComplexPoint::from(z.to_vec());
        match &self.shape {
            Shape::Disc { .. } | Shape::Ball { .. } | Shape::HalfPlane(_) => {
                if self.classify(&zp) == Membership::Boundary {
                    identity(self.dim)
                } else {
                    Vec::new()
                }
            }
            Shape::Polydisc { centers, radii } => (0..self.dim)
                .filter(|&i| ((z[i] - centers[i]).norm() - radii[i]).abs() <= self.tol)
                .map(|i| identity(self.dim)[i].clone())
                .collect(),
            Shape::Polytope(hs) => {
                let tol = self.active_tol();
                hs.iter()
                    .filter(|h| h.signed_distance(z).abs() <= tol)
                    .map(|h| h.normal.clone())
                    .collect()
            }
            Shape::Product(l, r) => {
                let k = l.dim;
                let mut out = lift(l.blocked_covectors(&z[..k]), 0, r.dim);
                out.extend(lift(r.blocked_covectors(&z[k..]), k, 0));
                out
            }
            Shape::Affine { base, map } => base
                .blocked_covectors(&map.pull(z))
                .into_iter()
                .map(|a| map.push_covector(&a))
                .collect(),
            Shape::Clipped { base, cut } => {
                let mut out = base.blocked_covectors(z);
                if cut.signed_distance(z).abs() <= self.active_tol() {
                    out.push(cut.normal.clone());
                }
                out
            }
        }
    }

    /// Radius along `x` within which `z0 + lambda x` stays in the closure for all phases.
    fn closure_radius(&self, z0: &ComplexPoint, x: &ComplexVector) -> f64 {
        let phases = 64;
        (0..phases)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / phases as f64;
                self.ray_exit(z0, &x.scale(Complex64::from_polar(1.0, th)), true)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `L(z0)`, validated on a phase circle of radius `eps`.
    pub fn flat_space(&self, z0: &ComplexPoint) -> Result<FlatSpace> {
        if self.contains(z0)? != Membership::Boundary {
            return Err(BergmanError::NotOnBoundary);
        }
        let blocked = self.blocked_covectors(z0.coords());
        let basis: Vec<ComplexVector> = orthogonal_complement(&blocked, self.dim, 1e-10)
            .into_iter()
            .map(ComplexVector::from)
            .collect();
        if basis.is_empty() {
            return Ok(FlatSpace {
                base: z0.clone(),
                basis,
                radius: 0.0,
            });
        }
        let mut radius = basis
            .iter()
            .map(|x| self.closure_radius(z0, x))
            .fold(f64::INFINITY, f64::min)
            / 2.0;
        if !radius.is_finite() {
            radius = 1.0;
        }
        if !(radius > 0.0) {
            return Err(BergmanError::FlatValidation("flat radius collapsed to zero".into()));
        }
        let flat = FlatSpace {
            base: z0.clone(),
            basis,
            radius,
        };
        for x in &flat.basis {
            if !self.is_flat_direction_numeric(z0, x, radius, FLAT_VALIDATION_PHASES) {
                return Err(BergmanError::FlatValidation(format!(
                    "basis direction leaves the boundary within radius {radius:e}"
                )));
            }
        }
        Ok(flat)
    }

    /// Membership-only check that `z0 + r e^{i theta} x` is a boundary point for
    /// `phases` equally spaced angles and radii `radius, radius/2, radius/4`.
    pub fn is_flat_direction_numeric(&self, z0: &ComplexPoint, x: &ComplexVector, radius: f64, phases: usize) -> bool {
        [1.0, 0.5, 0.25].iter().all(|f| {
            (0..phases).all(|k| {
                let th = std::f64::consts::TAU * k as f64 / phases as f64;
                self.classify(&z0.offset(Complex64::from_polar(radius * f, th), x)) == Membership::Boundary
            })
        })
    }

    /// Normal slice `E(z0)`.
    pub fn normal_slice(&self, z0: &ComplexPoint) -> Result<NormalSlice> {
        let flat = self.flat_space(z0)?;
        let (cols, slice) = if flat.is_trivial() {
            let shift = z0.coords().iter().map(|c| -c).collect();
            (
                identity(self.dim),
                Some(DomainSpec::affine(self.spec.clone(), AffineMapSpec::translation(shift))),
            )
        } else {
            self.slice_parts(z0.coords())?
        };
        let slice = slice.ok_or(BergmanError::NotOnBoundary)?;
        // validates boundedness and nonempty interior
        Domain::new(slice.clone())?;
        Ok(NormalSlice {
            base: z0.clone(),
            basis: cols.into_iter().map(ComplexVector::from).collect(),
            slice,
            flat,
        })
    }

    fn slice_parts(&self, z: &[Complex64]) -> Result<(Vec<Vec<Complex64>>, Option<DomainSpec>)> {
        let zp = ComplexPoint::from(z.to_vec());
        if self.classify(&zp) == Membership::Interior {
            return Ok((Vec::new(), None));
        }
        Ok(match &self.shape {
            Shape::Disc { center, radius } => (
                identity(1),
                Some(DomainSpec::Disc {
                    center: center - z[0],
                    radius: *radius,
                }),
            ),
            Shape::Ball { center, radius } => (
                identity(self.dim),
                Some(DomainSpec::Ball {
                    center: center.iter().zip(z).map(|(c, z)| c - z).collect(),
                    radius: *radius,
                }),
            ),
            Shape::HalfPlane(h) => (
                identity(1),
                Some(DomainSpec::HalfPlane {
                    normal: h.normal[0],
                    offset: -h.value(z),
                }),
            ),
            Shape::Polydisc { centers, radii } => {
                let on: Vec<usize> = (0..self.dim)
                    .filter(|&i| ((z[i] - centers[i]).norm() - radii[i]).abs() <= self.tol)
                    .collect();
                let cols = on.iter().map(|&i| identity(self.dim)[i].clone()).collect();
                let spec = if on.len() == 1 {
                    DomainSpec::Disc {
                        center: centers[on[0]] - z[on[0]],
                        radius: radii[on[0]],
                    }
                } else {
                    DomainSpec::Polydisc {
                        centers: on.iter().map(|&i| centers[i] - z[i]).collect(),
                        radii: on.iter().map(|&i| radii[i]).collect(),
                    }
                };
                (cols, Some(spec))
            }
            Shape::Polytope(hs) => {
                let tol = self.active_tol();
                let active: Vec<Vec<Complex64>> = hs
                    .iter()
                    .filter(|h| h.signed_distance(z).abs() <= tol)
                    .map(|h| h.normal.clone())
                    .collect();
                let q = orthonormal_span(&active, 1e-10);
                let mut constraints = Vec::new();
                for h in hs {
                    let normal: Vec<Complex64> = q.iter().map(|col| hermitian(col, &h.normal)).collect();
                    let nn = crate::point::norm(&normal);
                    if nn <= 1e-14 * h.normal_norm {
                        // constant on the slice; inactive constraints hold there
                        continue;
                    }
                    constraints.push(super::ConstraintSpec {
                        normal,
                        offset: h.value(z),
                    });
                }
                (q, Some(DomainSpec::Polytope { constraints }))
            }
            Shape::Product(l, r) => {
                let k = l.dim;
                let (ql, el) = l.slice_parts(&z[..k])?;
                let (qr, er) = r.slice_parts(&z[k..])?;
                let mut cols = lift(ql, 0, r.dim);
                cols.extend(lift(qr, k, 0));
                let spec = match (el, er) {
                    (Some(a), Some(b)) => Some(DomainSpec::product(a, b)),
                    (a, b) => a.or(b),
                };
                (cols, spec)
            }
            Shape::Affine { .. } | Shape::Clipped { .. } => {
                return Err(BergmanError::Unsupported(
                    "normal slice with a nontrivial flat space needs a polytope or product domain".into(),
                ))
            }
        })
    }
}

/// Cone grid `{z0 + t (k - z0) : k in generators, t in t_grid}`, generator-major.
/// Generators are ambient points of `E(z0)`.
pub fn cone_samples(
    domain: &Domain,
    slice: &NormalSlice,
    generators: &[ComplexPoint],
    t_grid: &[f64],
) -> Result<Vec<ComplexPoint>> {
    let z0 = &slice.base;
    let mut out = Vec::with_capacity(generators.len() * t_grid.len());
    for k in generators {
        check_dim(domain.dim(), k.dim())?;
        if !slice.in_normal_space(k, 1e-9) {
            return Err(BergmanError::InvalidArgument("cone generator is not on N(z0)".into()));
        }
        let v = k.diff(z0);
        for &t in t_grid {
            if !(t > 0.0 && t <= 1.0) {
                return Err(BergmanError::InvalidArgument(format!(
                    "cone parameter {t} outside (0, 1]"
                )));
            }
            let z = z0.offset(Complex64::new(t, 0.0), &v);
            if domain.contains(&z)? != Membership::Interior {
                return Err(BergmanError::NotInterior);
            }
            out.push(z);
        }
    }
    Ok(out)
}

/// Path `z(t) = z0 + t w` over a strictly decreasing positive grid.
pub fn approach_path(
    domain: &Domain,
    z0: &ComplexPoint,
    w: &ComplexVector,
    t_grid: &[f64],
) -> Result<Vec<ComplexPoint>> {
    check_dim(domain.dim(), z0.dim())?;
    check_dim(domain.dim(), w.dim())?;
    if t_grid.windows(2).any(|p| !(p[1] < p[0])) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(BergmanError::InvalidArgument(
            "t grid must be positive and strictly decreasing".into(),
        ));
    }
    t_grid
        .iter()
        .map(|&t| {
            let z = z0.offset(Complex64::new(t, 0.0), w);
            match domain.contains(&z)? {
                Membership::Interior => Ok(z),
                _ => Err(BergmanError::NotInterior),
            }
        })
        .collect()
}

/// `t_k = ratio^k`, `k = 1..=count`.
pub fn geometric_grid(ratio: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| ratio.powi(k as i32)).collect()
}
