use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{Domain, Membership, Shape};
use crate::error::{BergmanError, Result};
use crate::point::{hermitian, norm, ComplexPoint, ComplexVector};

/// `f_1(z) = exp(zeta + a zeta^2)` with `zeta = <n, z - z0>`, where `n` is a
/// unit outward normal of a supporting half-space at `z0`, so that the domain
/// lies in `{Re zeta < 0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakFunctionSpec {
    pub z0: ComplexPoint,
    pub normal: ComplexVector,
    pub a: f64,
    /// `inf Re zeta` over the domain.
    pub inf_re: f64,
}

impl PeakFunctionSpec {
    pub fn zeta(&self, z: &ComplexPoint) -> Complex64 {
        let d: Vec<Complex64> = z.coords().iter().zip(self.z0.coords()).map(|(a, b)| a - b).collect();
        hermitian(self.normal.coords(), &d)
    }

    pub fn at_zeta(&self, zeta: Complex64) -> Complex64 {
        (zeta + self.a * zeta * zeta).exp()
    }

    pub fn eval(&self, z: &ComplexPoint) -> Complex64 {
        self.at_zeta(self.zeta(z))
    }

    /// `a inf Re zeta > -1`.
    pub fn admissible(&self) -> bool {
        self.a > 0.0 && self.a * self.inf_re > -1.0
    }
}

fn outward_normal(d: &Domain, z: &[Complex64]) -> Option<Vec<Complex64>> {
    let active = 1e-9 * (1.0 + d.diameter());
    let zero = Complex64::new(0.0, 0.0);
    match &d.shape {
        Shape::Disc { center, radius } => ((z[0] - center).norm() - radius)
            .abs()
            .le(&active)
            .then(|| vec![z[0] - center]),
        Shape::Polydisc { centers, radii } => (0..z.len())
            .find(|&i| ((z[i] - centers[i]).norm() - radii[i]).abs() <= active)
            .map(|i| {
                let mut v = vec![zero; z.len()];
                v[i] = z[i] - centers[i];
                v
            }),
        Shape::Ball { center, radius } => {
            let w: Vec<Complex64> = z.iter().zip(center).map(|(a, b)| a - b).collect();
            (norm(&w) - radius).abs().le(&active).then_some(w)
        }
        Shape::HalfPlane(h) => h.signed_distance(z).abs().le(&active).then(|| h.normal.clone()),
        Shape::Polytope(hs) => {
            let mut v = vec![zero; z.len()];
            let mut any = false;
            for h in hs.iter().filter(|h| h.signed_distance(z).abs() <= active) {
                any = true;
                v.iter_mut().zip(&h.normal).for_each(|(s, a)| *s += a / h.normal_norm);
            }
            any.then_some(v)
        }
        Shape::Product(l, r) => {
            let k = l.dim();
            if let Some(v) = outward_normal(l, &z[..k]) {
                Some(v.into_iter().chain(std::iter::repeat_n(zero, r.dim())).collect())
            } else {
                outward_normal(r, &z[k..]).map(|v| std::iter::repeat_n(zero, k).chain(v).collect())
            }
        }
        Shape::Affine { base, map } => outward_normal(base, &map.pull(z)).map(|v| map.push_covector(&v)),
        Shape::Clipped { base, cut } => {
            if cut.signed_distance(z).abs() <= active {
                Some(cut.normal.clone())
            } else {
                outward_normal(base, z)
            }
        }
    }
}

/// Supporting normal at `z0` and the admissible coefficient `a = min(1/4, -1/(2 inf Re zeta))`.
pub fn build_peak_function(domain: &Domain, z0: &ComplexPoint) -> Result<PeakFunctionSpec> {
    if domain.contains(z0)? != Membership::Boundary {
        return Err(BergmanError::NotOnBoundary);
    }
    let raw = outward_normal(domain, z0.coords())
        .ok_or_else(|| BergmanError::Numerical("no supporting half-space found".into()))?;
    let normal = ComplexVector::from(raw).normalized()?;
    let h = domain.support(normal.coords())?;
    let at = hermitian(normal.coords(), z0.coords()).re;
    if (h - at).abs() > 1e-8 * (1.0 + domain.diameter()) {
        return Err(BergmanError::Numerical(
            "candidate normal does not support the domain at z0".into(),
        ));
    }
    let minus: Vec<Complex64> = normal.coords().iter().map(|c| -c).collect();
    let inf_re = -domain.support(&minus)? - at;
    if !inf_re.is_finite() {
        return Err(BergmanError::Unbounded);
    }
    let a = if inf_re < 0.0 {
        f64::min(0.25, -0.5 / inf_re)
    } else {
        0.25
    };
    let spec = PeakFunctionSpec {
        z0: z0.clone(),
        normal,
        a,
        inf_re,
    };
    if !spec.admissible() {
        return Err(BergmanError::InvalidArgument(
            "peak coefficient is not admissible".into(),
        ));
    }
    Ok(spec)
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub off_samples: usize,
    pub on_samples: usize,
    /// Off-hyperplane samples with `|f_1| >= 1`.
    pub off_violations: usize,
    /// On-hyperplane samples with `||f_1| - 1| > 1e-12`.
    pub on_violations: usize,
    pub max_off: f64,
    pub max_on_deviation: f64,
    pub pass: bool,
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let s = norm(&v);
        if s > 1e-3 && s <= 1.0 {
            return ComplexVector::from(v.into_iter().map(|c| c / s).collect::<Vec<_>>());
        }
    }
}

/// Samples the closure: interior points, boundary points, points close to
/// `{zeta = 0}` and points on it. At least `budget` samples lie off the hyperplane.
pub fn verify_peak(domain: &Domain, spec: &PeakFunctionSpec, budget: usize, seed: u64) -> Result<PeakReport> {
    let (lo, hi) = domain.bounding_box().cloned().ok_or(BergmanError::Unbounded)?;
    let n = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut off = Vec::with_capacity(budget);
    let mut on = Vec::new();
    let reference = domain.reference_point().clone();

    let tangent = |rng: &mut ChaCha8Rng| {
        let v = random_direction(rng, n);
        let c = hermitian(spec.normal.coords(), v.coords());
        v.sub(&spec.normal.scale(c))
    };

    // boundary
    for _ in 0..budget / 4 {
        let dir = random_direction(&mut rng, n);
        let s = domain.ray_exit(&reference, &dir, true);
        off.push(reference.offset(Complex64::new(s, 0.0), &dir));
    }
    // near the hyperplane, just inside
    let mut tries = 0;
    while off.len() < budget / 2 && tries < 100 * budget {
        tries += 1;
        let v = tangent(&mut rng);
        if v.is_zero() {
            continue;
        }
        let smax = domain.ray_exit(&spec.z0, &v, true);
        let base = spec.z0.offset(Complex64::new(rng.random::<f64>() * smax, 0.0), &v);
        let eps = 10f64.powf(-rng.random_range(2.0..8.0)) * domain.diameter();
        let z = base.offset(Complex64::new(-eps, 0.0), &spec.normal);
        if domain.classify(&z).in_closure() {
            off.push(z);
        }
    }
    // interior
    while off.len() < budget {
        let coords: Vec<f64> = (0..2 * n).map(|d| rng.random_range(lo[d]..=hi[d])).collect();
        let z = ComplexPoint::from(
            (0..n)
                .map(|j| Complex64::new(coords[2 * j], coords[2 * j + 1]))
                .collect::<Vec<_>>(),
        );
        if domain.classify(&z).in_closure() {
            off.push(z);
        }
    }
    // on the hyperplane: z0 itself, face points and their far ends
    on.push(spec.z0.clone());
    for _ in 0..budget / 10 {
        let v = tangent(&mut rng);
        if v.is_zero() {
            continue;
        }
        let smax = domain.ray_exit(&spec.z0, &v, true);
        for s in [rng.random::<f64>() * smax, smax] {
            on.push(spec.z0.offset(Complex64::new(s, 0.0), &v));
        }
    }

    let mut off_violations = 0;
    let mut on_violations = 0;
    let mut max_off: f64 = 0.0;
    let mut max_on_deviation: f64 = 0.0;
    let mut off_count = 0;
    let mut on_count = 0;
    for z in off.iter().chain(&on) {
        let zeta = spec.zeta(z);
        let f = spec.at_zeta(zeta).norm();
        if zeta.norm() > 1e-14 {
            off_count += 1;
            max_off = max_off.max(f);
            if f >= 1.0 {
                off_violations += 1;
            }
        } else {
            on_count += 1;
            let dev = (f - 1.0).abs();
            max_on_deviation = max_on_deviation.max(dev);
            if dev > 1e-12 {
                on_violations += 1;
            }
        }
    }
    Ok(PeakReport {
        off_samples: off_count,
        on_samples: on_count,
        off_violations,
        on_violations,
        max_off,
        max_on_deviation,
        pass: off_violations == 0 && on_violations == 0 && off_count >= budget,
    })
}
