//! Linear-programming queries on complex half-space polytopes, posed in the
//! 2n real coordinates `z_i = x_{2i} + i x_{2i+1}`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_complex::Complex64;

use crate::error::{BergmanError, Result};
use crate::point::{hermitian, norm};

/// `{z : Re<normal, z> + offset < 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<Complex64>,
    pub offset: f64,
    pub normal_norm: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<Complex64>, offset: f64) -> Result<HalfSpace> {
        let normal_norm = norm(&normal);
        if !(normal_norm > 0.0) || !normal_norm.is_finite() || !offset.is_finite() {
            return Err(BergmanError::InvalidDomain(
                "constraint normal must be nonzero and finite".into(),
            ));
        }
        Ok(HalfSpace {
            normal,
            offset,
            normal_norm,
        })
    }

    /// `Re<a, z> + c`; negative inside.
    pub fn value(&self, z: &[Complex64]) -> f64 {
        hermitian(&self.normal, z).re + self.offset
    }

    /// Signed Euclidean distance to the bounding hyperplane (negative inside).
    pub fn signed_distance(&self, z: &[Complex64]) -> f64 {
        self.value(z) / self.normal_norm
    }

    /// Radius of the largest analytic disc `z + lambda x` kept inside.
    pub fn disc_radius(&self, z: &[Complex64], x: &[Complex64]) -> f64 {
        let slack = -self.value(z);
        let rate = hermitian(&self.normal, x).norm();
        if rate == 0.0 {
            f64::INFINITY
        } else {
            slack / rate
        }
    }

    /// Half-space in coordinates `w` with `z = origin + Q w` (columns of `q`).
    pub fn restrict(&self, origin: &[Complex64], q: &[Vec<Complex64>]) -> Result<HalfSpace> {
        let normal: Vec<Complex64> = q.iter().map(|col| hermitian(col, &self.normal)).collect();
        HalfSpace::new(normal, self.value(origin))
    }
}

fn real_coeffs(a: &[Complex64]) -> Vec<f64> {
    a.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn build(constraints: &[HalfSpace], objective: &[f64], dir: OptimizationDirection) -> (Problem, Vec<minilp::Variable>) {
    let mut p = Problem::new(dir);
    let vars: Vec<_> = objective
        .iter()
        .map(|&c| p.add_var(c, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for h in constraints {
        let row: Vec<_> = vars.iter().copied().zip(real_coeffs(&h.normal)).collect();
        p.add_constraint(row.as_slice(), ComparisonOp::Le, -h.offset);
    }
    (p, vars)
}

fn lp_error(e: minilp::Error) -> BergmanError {
    match e {
        minilp::Error::Unbounded => BergmanError::Unbounded,
        minilp::Error::Infeasible => BergmanError::InvalidDomain("polytope is empty".into()),
    }
}

/// `sup { Re<u, z> : z in closure }`.
pub fn support(constraints: &[HalfSpace], u: &[Complex64]) -> Result<f64> {
    let (p, _) = build(constraints, &real_coeffs(u), OptimizationDirection::Maximize);
    p.solve().map(|s| s.objective()).map_err(lp_error)
}

/// Real-coordinate bounding box `(lo, hi)` of length `2n`.
pub fn bounding_box(constraints: &[HalfSpace], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = Vec::with_capacity(2 * n);
    let mut hi = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let mut obj = vec![0.0; 2 * n];
        obj[k] = 1.0;
        for (dir, out) in [
            (OptimizationDirection::Maximize, &mut hi),
            (OptimizationDirection::Minimize, &mut lo),
        ] {
            let (p, _) = build(constraints, &obj, dir);
            out.push(p.solve().map_err(lp_error)?.objective());
        }
    }
    Ok((lo, hi))
}

/// Center and radius of the largest inscribed Euclidean ball.
pub fn chebyshev_center(constraints: &[HalfSpace], n: usize) -> Result<(Vec<Complex64>, f64)> {
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..2 * n)
        .map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let s = p.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for h in constraints {
        let mut row: Vec<_> = vars.iter().copied().zip(real_coeffs(&h.normal)).collect();
        row.push((s, h.normal_norm));
        p.add_constraint(row.as_slice(), ComparisonOp::Le, -h.offset);
    }
    let sol = p.solve().map_err(lp_error)?;
    let center = (0..n)
        .map(|i| Complex64::new(sol[vars[2 * i]], sol[vars[2 * i + 1]]))
        .collect();
    Ok((center, sol[s]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_square() -> Vec<HalfSpace> {
        vec![
            HalfSpace::new(vec![c(1.0, 0.0)], -0.5).unwrap(),
            HalfSpace::new(vec![c(-1.0, 0.0)], -0.5).unwrap(),
            HalfSpace::new(vec![c(0.0, 1.0)], -0.5).unwrap(),
            HalfSpace::new(vec![c(0.0, -1.0)], -0.5).unwrap(),
        ]
    }

    #[test]
    fn square_box_and_center() {
        let (lo, hi) = bounding_box(&unit_square(), 1).unwrap();
        assert_eq!(lo, vec![-0.5, -0.5]);
        assert_eq!(hi, vec![0.5, 0.5]);
        let (ctr, r) = chebyshev_center(&unit_square(), 1).unwrap();
        assert!(ctr[0].norm() < 1e-12);
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn open_region_is_unbounded() {
        let one = vec![HalfSpace::new(vec![c(1.0, 0.0)], 0.0).unwrap()];
        assert_eq!(bounding_box(&one, 1), Err(BergmanError::Unbounded));
    }

    #[test]
    fn imaginary_normal_bounds_imaginary_part() {
        // Re(conj(i) z) = Im z
        let h = HalfSpace::new(vec![c(0.0, 1.0)], -0.5).unwrap();
        assert!((h.value(&[c(0.0, 0.5)])).abs() < 1e-15);
    }
}
