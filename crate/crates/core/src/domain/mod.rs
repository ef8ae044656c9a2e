//! Bounded convex domains in C^n (n <= 3): membership, boundary distance,
//! directional (analytic-disc) radius and support functions.
//!
//! A [`DomainSpec`] is the plain, serializable description. [`Domain::new`]
//! validates it and precomputes everything derived (bounding box, constraint
//! norms, an interior reference point); a `Domain` never changes afterwards.

mod flat;
pub mod polytope;

pub use flat::{approach_path, cone_samples, geometric_grid, FlatSpace, NormalSlice};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BergmanError, Result};
use crate::point::{check_dim, hermitian, norm, ComplexPoint, ComplexVector, MAX_DIM};
use polytope::HalfSpace;

/// One polytope constraint `Re<normal, z> + offset < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub normal: Vec<Complex64>,
    pub offset: f64,
}

/// Complex-affine map `w = matrix * z + shift`; `matrix` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMapSpec {
    pub matrix: Vec<Vec<Complex64>>,
    pub shift: Vec<Complex64>,
}

impl AffineMapSpec {
    pub fn translation(shift: Vec<Complex64>) -> Self {
        let n = shift.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        AffineMapSpec { matrix, shift }
    }

    pub fn scaling(n: usize, s: f64) -> Self {
        let mut m = Self::translation(vec![Complex64::new(0.0, 0.0); n]);
        for (i, row) in m.matrix.iter_mut().enumerate() {
            row[i] = Complex64::new(s, 0.0);
        }
        m
    }
}

/// Serializable domain description. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainSpec {
    Disc {
        center: Complex64,
        radius: f64,
    },
    Polydisc {
        centers: Vec<Complex64>,
        radii: Vec<f64>,
    },
    Ball {
        center: Vec<Complex64>,
        radius: f64,
    },
    /// `{zeta : Re(conj(normal) * zeta) < offset}` in C.
    #[serde(rename = "halfplane")]
    HalfPlane {
        normal: Complex64,
        offset: f64,
    },
    Polytope {
        constraints: Vec<ConstraintSpec>,
    },
    Product {
        left: Box<DomainSpec>,
        right: Box<DomainSpec>,
    },
    /// Image of `base` under an invertible complex-affine map.
    #[serde(rename = "affine")]
    AffineImage {
        base: Box<DomainSpec>,
        map: AffineMapSpec,
    },
    /// `base` intersected with the half-space `Re<normal, z> + offset < 0`.
    Clipped {
        base: Box<DomainSpec>,
        normal: Vec<Complex64>,
        offset: f64,
    },
}

impl DomainSpec {
    pub fn disc(center: Complex64, radius: f64) -> Self {
        DomainSpec::Disc { center, radius }
    }

    pub fn unit_disc() -> Self {
        Self::disc(Complex64::new(0.0, 0.0), 1.0)
    }

    /// Unit polydisc centred at the origin.
    pub fn unit_polydisc(n: usize) -> Self {
        DomainSpec::Polydisc {
            centers: vec![Complex64::new(0.0, 0.0); n],
            radii: vec![1.0; n],
        }
    }

    pub fn unit_ball(n: usize) -> Self {
        DomainSpec::Ball {
            center: vec![Complex64::new(0.0, 0.0); n],
            radius: 1.0,
        }
    }

    /// Axis-aligned box `prod_i {|Re z_i - Re c_i| < h_i, |Im z_i - Im c_i| < h_i}`.
    pub fn complex_box(center: &[Complex64], half_widths: &[f64]) -> Self {
        let n = center.len();
        let mut constraints = Vec::new();
        for (i, (c, h)) in center.iter().zip(half_widths).enumerate() {
            for unit in [
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
            ] {
                let mut normal = vec![Complex64::new(0.0, 0.0); n];
                normal[i] = unit;
                // Re(conj(unit) (z - c)) - h < 0
                let offset = -(unit.conj() * c).re - h;
                constraints.push(ConstraintSpec { normal, offset });
            }
        }
        DomainSpec::Polytope { constraints }
    }

    pub fn product(left: DomainSpec, right: DomainSpec) -> Self {
        DomainSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn affine(base: DomainSpec, map: AffineMapSpec) -> Self {
        DomainSpec::AffineImage {
            base: Box::new(base),
            map,
        }
    }

    pub fn clipped(base: DomainSpec, normal: Vec<Complex64>, offset: f64) -> Self {
        DomainSpec::Clipped {
            base: Box::new(base),
            normal,
            offset,
        }
    }

    pub fn from_json(s: &str) -> Result<DomainSpec> {
        serde_json::from_str(s).map_err(|e| BergmanError::InvalidDomain(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain specs always serialize")
    }
}

/// Verdict of a membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

impl Membership {
    fn and(self, other: Membership) -> Membership {
        use Membership::*;
        match (self, other) {
            (Exterior, _) | (_, Exterior) => Exterior,
            (Interior, Interior) => Interior,
            _ => Boundary,
        }
    }

    fn from_margin(margin: f64, tol: f64) -> Membership {
        if margin < -tol {
            Membership::Interior
        } else if margin <= tol {
            Membership::Boundary
        } else {
            Membership::Exterior
        }
    }

    /// Interior or boundary.
    pub fn in_closure(self) -> bool {
        self != Membership::Exterior
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AffineMap {
    pub matrix: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
    pub shift: Vec<Complex64>,
    pub det: Complex64,
}

impl AffineMap {
    fn new(spec: &AffineMapSpec, n: usize) -> Result<AffineMap> {
        check_dim(n, spec.shift.len())?;
        if spec.matrix.len() != n || spec.matrix.iter().any(|r| r.len() != n) {
            return Err(BergmanError::InvalidDomain("affine matrix must be n x n".into()));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| spec.matrix[i][j]);
        let det = matrix.determinant();
        let scale = matrix.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !(det.norm() > 1e-14 * scale.powi(n as i32)) {
            return Err(BergmanError::InvalidDomain("affine map is not invertible".into()));
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| BergmanError::InvalidDomain("affine map is not invertible".into()))?;
        Ok(AffineMap {
            matrix,
            inverse,
            shift: spec.shift.clone(),
            det,
        })
    }

    fn mul(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        Self::mul(&self.matrix, z)
            .into_iter()
            .zip(&self.shift)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Preimage of a point.
    pub fn pull(&self, w: &[Complex64]) -> Vec<Complex64> {
        let d: Vec<_> = w.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
        Self::mul(&self.inverse, &d)
    }

    pub fn pull_vec(&self, y: &[Complex64]) -> Vec<Complex64> {
        Self::mul(&self.inverse, y)
    }

    /// `A^H u`: pulls a linear functional `<u, .>` back to base coordinates.
    pub fn pull_covector(&self, u: &[Complex64]) -> Vec<Complex64> {
        Self::mul(&self.matrix.adjoint(), u)
    }

    /// `A^{-H} a`: pushes a base covector to image coordinates.
    pub fn push_covector(&self, a: &[Complex64]) -> Vec<Complex64> {
        Self::mul(&self.inverse.adjoint(), a)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Shape {
    Disc { center: Complex64, radius: f64 },
    Polydisc { centers: Vec<Complex64>, radii: Vec<f64> },
    Ball { center: Vec<Complex64>, radius: f64 },
    HalfPlane(HalfSpace),
    Polytope(Vec<HalfSpace>),
    Product(Box<Domain>, Box<Domain>),
    Affine { base: Box<Domain>, map: AffineMap },
    Clipped { base: Box<Domain>, cut: HalfSpace },
}

/// Validated, immutable domain.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    pub(crate) shape: Shape,
    dim: usize,
    bbox: Option<(Vec<f64>, Vec<f64>)>,
    tol: f64,
    reference: ComplexPoint,
}

fn positive(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(BergmanError::InvalidDomain(format!(
            "{what} must be positive and finite"
        )))
    }
}

fn finite_all(cs: &[Complex64]) -> Result<()> {
    if cs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(BergmanError::NonFinite)
    }
}

fn concat_box(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> (Vec<f64>, Vec<f64>) {
    let mut lo = a.0.clone();
    lo.extend_from_slice(&b.0);
    let mut hi = a.1.clone();
    hi.extend_from_slice(&b.1);
    (lo, hi)
}

/// Real-coordinate box from the support function in the 2n coordinate directions.
fn box_from_support(n: usize, support: impl Fn(&[Complex64]) -> Result<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = Vec::with_capacity(2 * n);
    let mut hi = Vec::with_capacity(2 * n);
    for i in 0..n {
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let mut u = vec![Complex64::new(0.0, 0.0); n];
            u[i] = unit;
            hi.push(support(&u)?);
            u[i] = -unit;
            lo.push(-support(&u)?);
        }
    }
    Ok((lo, hi))
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Domain> {
        let (shape, dim) = match &spec {
            DomainSpec::Disc { center, radius } => {
                finite_all(&[*center])?;
                (
                    Shape::Disc {
                        center: *center,
                        radius: positive(*radius, "disc radius")?,
                    },
                    1,
                )
            }
            DomainSpec::Polydisc { centers, radii } => {
                finite_all(centers)?;
                if centers.len() != radii.len() {
                    return Err(BergmanError::DimensionMismatch {
                        expected: centers.len(),
                        found: radii.len(),
                    });
                }
                for r in radii {
                    positive(*r, "polydisc radius")?;
                }
                (
                    Shape::Polydisc {
                        centers: centers.clone(),
                        radii: radii.clone(),
                    },
                    centers.len(),
                )
            }
            DomainSpec::Ball { center, radius } => {
                finite_all(center)?;
                (
                    Shape::Ball {
                        center: center.clone(),
                        radius: positive(*radius, "ball radius")?,
                    },
                    center.len(),
                )
            }
            DomainSpec::HalfPlane { normal, offset } => (Shape::HalfPlane(HalfSpace::new(vec![*normal], -offset)?), 1),
            DomainSpec::Polytope { constraints } => {
                let n = constraints.first().map(|c| c.normal.len()).unwrap_or(0);
                let mut hs = Vec::with_capacity(constraints.len());
                for c in constraints {
                    check_dim(n, c.normal.len())?;
                    hs.push(HalfSpace::new(c.normal.clone(), c.offset)?);
                }
                (Shape::Polytope(hs), n)
            }
            DomainSpec::Product { left, right } => {
                let l = Domain::new((**left).clone())?;
                let r = Domain::new((**right).clone())?;
                let n = l.dim + r.dim;
                (Shape::Product(Box::new(l), Box::new(r)), n)
            }
            DomainSpec::AffineImage { base, map } => {
                let b = Domain::new((**base).clone())?;
                let n = b.dim;
                let m = AffineMap::new(map, n)?;
                match &b.shape {
                    // the image of a polytope is a polytope
                    Shape::Polytope(hs) => {
                        let mut out = Vec::with_capacity(hs.len());
                        for h in hs {
                            let a = m.push_covector(&h.normal);
                            let c = h.offset - hermitian(&a, &m.shift).re;
                            out.push(HalfSpace::new(a, c)?);
                        }
                        (Shape::Polytope(out), n)
                    }
                    _ => (
                        Shape::Affine {
                            base: Box::new(b),
                            map: m,
                        },
                        n,
                    ),
                }
            }
            DomainSpec::Clipped { base, normal, offset } => {
                let b = Domain::new((**base).clone())?;
                let n = b.dim;
                check_dim(n, normal.len())?;
                let cut = HalfSpace::new(normal.clone(), *offset)?;
                match &b.shape {
                    Shape::Polytope(hs) => {
                        let mut hs = hs.clone();
                        hs.push(cut);
                        (Shape::Polytope(hs), n)
                    }
                    _ => (Shape::Clipped { base: Box::new(b), cut }, n),
                }
            }
        };
        if dim == 0 || dim > MAX_DIM {
            return Err(BergmanError::UnsupportedDimension(dim));
        }
        let mut d = Domain {
            spec,
            shape,
            dim,
            bbox: None,
            tol: 0.0,
            reference: ComplexPoint::zeros(dim),
        };
        d.bbox = d.compute_bbox()?;
        d.tol = 1e-12 * (1.0 + d.diameter().min(1e300));
        if let Shape::HalfPlane(h) = &d.shape {
            d.tol = 1e-12 * (1.0 + h.offset.abs() / h.normal_norm);
        }
        d.reference = d.compute_reference()?;
        Ok(d)
    }

    pub fn from_json(s: &str) -> Result<Domain> {
        Domain::new(DomainSpec::from_json(s)?)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_bounded(&self) -> bool {
        self.bbox.is_some()
    }

    /// Real-coordinate bounding box `(lo, hi)`, `2n` entries each; `None` if unbounded.
    pub fn bounding_box(&self) -> Option<&(Vec<f64>, Vec<f64>)> {
        self.bbox.as_ref()
    }

    /// Diagonal of the bounding box (an upper bound on the diameter).
    pub fn diameter(&self) -> f64 {
        match &self.bbox {
            Some((lo, hi)) => lo.iter().zip(hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt(),
            None => f64::INFINITY,
        }
    }

    /// Membership tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// A point well inside the domain.
    pub fn reference_point(&self) -> &ComplexPoint {
        &self.reference
    }

    fn compute_bbox(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        Ok(match &self.shape {
            Shape::Disc { center, radius } => Some((
                vec![center.re - radius, center.im - radius],
                vec![center.re + radius, center.im + radius],
            )),
            Shape::Polydisc { centers, radii } => {
                let lo = centers
                    .iter()
                    .zip(radii)
                    .flat_map(|(c, r)| [c.re - r, c.im - r])
                    .collect();
                let hi = centers
                    .iter()
                    .zip(radii)
                    .flat_map(|(c, r)| [c.re + r, c.im + r])
                    .collect();
                Some((lo, hi))
            }
            Shape::Ball { center, radius } => {
                let lo = center.iter().flat_map(|c| [c.re - radius, c.im - radius]).collect();
                let hi = center.iter().flat_map(|c| [c.re + radius, c.im + radius]).collect();
                Some((lo, hi))
            }
            Shape::HalfPlane(_) => None,
            Shape::Polytope(hs) => Some(polytope::bounding_box(hs, self.dim)?),
            Shape::Product(l, r) => match (&l.bbox, &r.bbox) {
                (Some(a), Some(b)) => Some(concat_box(a, b)),
                _ => None,
            },
            Shape::Affine { base, .. } | Shape::Clipped { base, .. } => {
                if base.bbox.is_none() {
                    None
                } else {
                    Some(box_from_support(self.dim, |u| self.support(u))?)
                }
            }
        })
    }

    fn compute_reference(&self) -> Result<ComplexPoint> {
        let pt = match &self.shape {
            Shape::Disc { center, .. } => vec![*center],
            Shape::Polydisc { centers, .. } => centers.clone(),
            Shape::Ball { center, .. } => center.clone(),
            Shape::HalfPlane(h) => {
                // a point at distance 1 from the boundary line
                let a = h.normal[0];
                let t = (-h.offset - h.normal_norm) / h.normal_norm.powi(2);
                vec![a * t]
            }
            Shape::Polytope(hs) => {
                let (c, r) = polytope::chebyshev_center(hs, self.dim)?;
                if !(r > 0.0) {
                    return Err(BergmanError::InvalidDomain("polytope has empty interior".into()));
                }
                c
            }
            Shape::Product(l, r) => l.reference.concat(&r.reference).into_coords(),
            Shape::Affine { base, map } => map.apply(base.reference.coords()),
            Shape::Clipped { base, cut } => {
                let (lo, hi) = self.bbox.clone().ok_or(BergmanError::Unbounded)?;
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                let mut best: Option<(f64, Vec<Complex64>)> = None;
                let mut consider = |z: Vec<Complex64>| {
                    let zp = ComplexPoint::from(z.clone());
                    if base.classify(&zp) == Membership::Interior && cut.value(&z) < 0.0 {
                        let depth = base.distance_unchecked(&zp).min(-cut.signed_distance(&z));
                        if best.as_ref().is_none_or(|b| depth > b.0) {
                            best = Some((depth, z));
                        }
                    }
                };
                consider(base.reference.coords().to_vec());
                for _ in 0..4096 {
                    let z = (0..self.dim)
                        .map(|i| {
                            Complex64::new(
                                rng.random_range(lo[2 * i]..=hi[2 * i]),
                                rng.random_range(lo[2 * i + 1]..=hi[2 * i + 1]),
                            )
                        })
                        .collect();
                    consider(z);
                }
                best.ok_or_else(|| BergmanError::InvalidDomain("clipped domain has empty interior".into()))?
                    .1
            }
        };
        Ok(ComplexPoint::from(pt))
    }

    /// Exact volume where available in closed form.
    pub fn volume_exact(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match &self.shape {
            Shape::Disc { radius, .. } => Some(PI * radius * radius),
            Shape::Polydisc { radii, .. } => Some(radii.iter().map(|r| PI * r * r).product()),
            Shape::Ball { radius, .. } => {
                let n = self.dim as i32;
                let fact: f64 = (1..=self.dim).map(|k| k as f64).product();
                Some(PI.powi(n) * radius.powi(2 * n) / fact)
            }
            Shape::Product(l, r) => Some(l.volume_exact()? * r.volume_exact()?),
            Shape::Affine { base, map } => Some(base.volume_exact()? * map.det.norm_sqr()),
            _ => None,
        }
    }

    /// Membership verdict with the domain's tolerance.
    pub fn contains(&self, z: &ComplexPoint) -> Result<Membership> {
        check_dim(self.dim, z.dim())?;
        Ok(self.classify(z))
    }

    pub(crate) fn classify(&self, z: &ComplexPoint) -> Membership {
        let zc = z.coords();
        match &self.shape {
            Shape::Disc { center, radius } => Membership::from_margin((zc[0] - center).norm() - radius, self.tol),
            Shape::Polydisc { centers, radii } => {
                let m = zc
                    .iter()
                    .zip(centers)
                    .zip(radii)
                    .map(|((z, c), r)| (z - c).norm() - r)
                    .fold(f64::NEG_INFINITY, f64::max);
                Membership::from_margin(m, self.tol)
            }
            Shape::Ball { center, radius } => {
                let d: Vec<_> = zc.iter().zip(center).map(|(a, b)| a - b).collect();
                Membership::from_margin(norm(&d) - radius, self.tol)
            }
            Shape::HalfPlane(h) => Membership::from_margin(h.signed_distance(zc), self.tol),
            Shape::Polytope(hs) => {
                let m = hs
                    .iter()
                    .map(|h| h.signed_distance(zc))
                    .fold(f64::NEG_INFINITY, f64::max);
                Membership::from_margin(m, self.tol)
            }
            Shape::Product(l, r) => {
                let (a, b) = z.split(l.dim);
                l.classify(&a).and(r.classify(&b))
            }
            Shape::Affine { base, map } => base.classify(&ComplexPoint::from(map.pull(zc))),
            Shape::Clipped { base, cut } => base
                .classify(z)
                .and(Membership::from_margin(cut.signed_distance(zc), self.tol)),
        }
    }

    fn require_interior(&self, z: &ComplexPoint) -> Result<()> {
        if self.contains(z)? != Membership::Interior {
            return Err(BergmanError::NotInterior);
        }
        Ok(())
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, z: &ComplexPoint) -> Result<f64> {
        self.require_interior(z)?;
        Ok(self.distance_unchecked(z))
    }

    fn distance_unchecked(&self, z: &ComplexPoint) -> f64 {
        let zc = z.coords();
        match &self.shape {
            Shape::Disc { center, radius } => radius - (zc[0] - center).norm(),
            Shape::Polydisc { centers, radii } => zc
                .iter()
                .zip(centers)
                .zip(radii)
                .map(|((z, c), r)| r - (z - c).norm())
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => {
                let d: Vec<_> = zc.iter().zip(center).map(|(a, b)| a - b).collect();
                radius - norm(&d)
            }
            Shape::HalfPlane(h) => -h.signed_distance(zc),
            Shape::Polytope(hs) => hs.iter().map(|h| -h.signed_distance(zc)).fold(f64::INFINITY, f64::min),
            Shape::Product(l, r) => {
                let (a, b) = z.split(l.dim);
                l.distance_unchecked(&a).min(r.distance_unchecked(&b))
            }
            Shape::Clipped { base, cut } => base.distance_unchecked(z).min(-cut.signed_distance(zc)),
            Shape::Affine { .. } => self.distance_by_support(zc),
        }
    }

    /// `min_{|u|=1} h(u) - Re<u, z>` by multistart pattern search on the unit
    /// sphere of R^{2n}; exact for convex sets given an exact support function.
    fn distance_by_support(&self, z: &[Complex64]) -> f64 {
        let n = self.dim;
        let eval = |u: &[f64]| -> f64 {
            let uc: Vec<Complex64> = (0..n).map(|i| Complex64::new(u[2 * i], u[2 * i + 1])).collect();
            let s = norm(&uc);
            let uc: Vec<Complex64> = uc.into_iter().map(|x| x / s).collect();
            self.support(&uc).unwrap_or(f64::INFINITY) - hermitian(&uc, z).re
        };
        let normalize = |u: &mut Vec<f64>| {
            let s = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            u.iter_mut().for_each(|x| *x /= s);
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut starts: Vec<(f64, Vec<f64>)> = (0..256 * n)
            .map(|_| {
                let mut u: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
                normalize(&mut u);
                (eval(&u), u)
            })
            .collect();
        starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = f64::INFINITY;
        for (mut f, mut u) in starts.into_iter().take(4) {
            let mut step = 0.25;
            while step > 1e-9 {
                let mut improved = false;
                for k in 0..2 * n {
                    for sgn in [1.0, -1.0] {
                        let mut v = u.clone();
                        v[k] += sgn * step;
                        normalize(&mut v);
                        let fv = eval(&v);
                        if fv < f {
                            f = fv;
                            u = v;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best = best.min(f);
        }
        best
    }

    /// Support function `sup { Re<u, z> : z in D }`.
    pub fn support(&self, u: &[Complex64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        Ok(match &self.shape {
            Shape::Disc { center, radius } => (u[0].conj() * center).re + radius * u[0].norm(),
            Shape::Polydisc { centers, radii } => u
                .iter()
                .zip(centers)
                .zip(radii)
                .map(|((u, c), r)| (u.conj() * c).re + r * u.norm())
                .sum(),
            Shape::Ball { center, radius } => hermitian(u, center).re + radius * norm(u),
            Shape::HalfPlane(h) => {
                // finite only along the outward normal
                let a = h.normal[0];
                let ratio = u[0] / a;
                if ratio.im.abs() <= 1e-14 * ratio.norm() && ratio.re >= 0.0 {
                    -ratio.re * h.offset
                } else {
                    f64::INFINITY
                }
            }
            Shape::Polytope(hs) => polytope::support(hs, u)?,
            Shape::Product(l, r) => l.support(&u[..l.dim])? + r.support(&u[l.dim..])?,
            Shape::Affine { base, map } => base.support(&map.pull_covector(u))? + hermitian(u, &map.shift).re,
            Shape::Clipped { base, cut } => clipped_support(base, cut, u)?,
        })
    }

    /// Radius `d(z;X)` of the largest analytic disc `z + lambda X`, `|lambda| < r`,
    /// inside the domain. `+inf` when the whole complex line fits.
    pub fn directional_radius(&self, z: &ComplexPoint, x: &ComplexVector) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        if x.is_zero() {
            return Err(BergmanError::ZeroDirection);
        }
        self.require_interior(z)?;
        Ok(self.radius_unchecked(z.coords(), x.coords()))
    }

    fn radius_unchecked(&self, z: &[Complex64], x: &[Complex64]) -> f64 {
        if x.iter().all(|c| c.norm_sqr() == 0.0) {
            return f64::INFINITY;
        }
        match &self.shape {
            Shape::Disc { center, radius } => (radius - (z[0] - center).norm()) / x[0].norm(),
            Shape::Polydisc { centers, radii } => (0..self.dim)
                .filter(|&i| x[i].norm() > 0.0)
                .map(|i| (radii[i] - (z[i] - centers[i]).norm()) / x[i].norm())
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => {
                // max over phases of |w + lambda x|^2 = |w|^2 + r^2|x|^2 + 2 r |<w,x>|
                let w: Vec<_> = z.iter().zip(center).map(|(a, b)| a - b).collect();
                let p = hermitian(&w, x).norm();
                let xx = norm(x).powi(2);
                let slack = radius * radius - norm(&w).powi(2);
                (-p + (p * p + xx * slack).sqrt()) / xx
            }
            Shape::HalfPlane(h) => h.disc_radius(z, x),
            Shape::Polytope(hs) => hs.iter().map(|h| h.disc_radius(z, x)).fold(f64::INFINITY, f64::min),
            Shape::Product(l, r) => {
                let k = l.dim;
                l.radius_unchecked(&z[..k], &x[..k])
                    .min(r.radius_unchecked(&z[k..], &x[k..]))
            }
            Shape::Affine { base, map } => base.radius_unchecked(&map.pull(z), &map.pull_vec(x)),
            Shape::Clipped { base, cut } => base.radius_unchecked(z, x).min(cut.disc_radius(z, x)),
        }
    }

    /// Largest `s` with `z + s*dir` interior (bisection on the membership test).
    pub(crate) fn ray_exit(&self, z: &ComplexPoint, dir: &ComplexVector, closure: bool) -> f64 {
        let inside = |s: f64| {
            let m = self.classify(&z.offset(Complex64::new(s, 0.0), dir));
            if closure {
                m.in_closure()
            } else {
                m == Membership::Interior
            }
        };
        let dn = dir.norm();
        let mut hi = if self.is_bounded() {
            2.0 * (self.diameter() + z.distance(&self.reference)) / dn + 1.0
        } else {
            1.0 / dn
        };
        while inside(hi) {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        if !inside(lo) {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        lo
    }

    /// Phase-grid estimate of `d(z;X)`: the minimum over `phases` equally spaced
    /// directions `e^{i theta} X` of the ray-exit distance, refined by golden
    /// section around the best phase.
    pub fn directional_radius_phase_grid(&self, z: &ComplexPoint, x: &ComplexVector, phases: usize) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        if x.is_zero() {
            return Err(BergmanError::ZeroDirection);
        }
        self.require_interior(z)?;
        Ok(min_over_phases(phases, |theta| {
            self.ray_exit(z, &x.scale(Complex64::from_polar(1.0, theta)), false)
        }))
    }
}

/// Minimum over a uniform phase grid with three golden-section refinements.
pub(crate) fn min_over_phases(phases: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = std::f64::consts::TAU / phases as f64;
    let (k, mut best) = (0..phases)
        .map(|k| (k, f(k as f64 * h)))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let center = k as f64 * h;
    let (mut a, mut b) = (center - h, center + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..3 {
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..40 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        best = best.min(f1).min(f2);
        let mid = 0.5 * (a + b);
        a = mid - h / 4.0;
        b = mid + h / 4.0;
    }
    best
}

/// Support of `base ∩ {Re<a,z> + c < 0}` via the one-dimensional dual
/// `min_{lambda >= 0} h_base(u - lambda a) - lambda c`.
fn clipped_support(base: &Domain, cut: &HalfSpace, u: &[Complex64]) -> Result<f64> {
    let phi = |lam: f64| -> Result<f64> {
        let v: Vec<Complex64> = u.iter().zip(&cut.normal).map(|(ui, ai)| ui - ai * lam).collect();
        Ok(base.support(&v)? - lam * cut.offset)
    };
    let mut hi = 1.0;
    let mut prev = phi(0.0)?;
    loop {
        let cur = phi(hi)?;
        if cur > prev || hi > 1e12 {
            break;
        }
        prev = cur;
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1)?, phi(x2)?);
    for _ in 0..120 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2)?;
        }
    }
    Ok(phi(0.0)?.min(f1).min(f2))
}
