//! Small dense complex linear algebra: Gram-Schmidt spans and a pivoted
//! Cholesky factorization for Hermitian positive semidefinite matrices.

use num_complex::Complex64;

use crate::point::{hermitian, norm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Orthonormal basis of the complex span of `vectors`. Vectors whose residual
/// after projection falls below `tol` (relative to their own norm) are skipped.
pub fn orthonormal_span(vectors: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = hermitian(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let r = norm(&w);
        if r > tol * scale {
            basis.push(w.into_iter().map(|x| x / r).collect());
        }
    }
    basis
}

/// Orthonormal basis of the Hermitian orthogonal complement of span(`vectors`) in C^n.
pub fn orthogonal_complement(vectors: &[Vec<Complex64>], n: usize, tol: f64) -> Vec<Vec<Complex64>> {
    let span = orthonormal_span(vectors, tol);
    let mut all = span.clone();
    let k = span.len();
    for i in 0..n {
        let mut e = vec![ZERO; n];
        e[i] = Complex64::new(1.0, 0.0);
        all.push(e);
    }
    orthonormal_span(&all, 1e-8)[k..].to_vec()
}

/// Hermitian matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Leading principal submatrix on the first `m` indices.
    pub fn leading(&self, m: usize) -> HermitianMatrix {
        let mut out = HermitianMatrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Largest `|G[i,j] - conj(G[j,i])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// Diagonally pivoted Cholesky `P G P^T = L L^H`, truncated once the largest
/// remaining pivot drops below `drop_tol` times the leading pivot.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Original indices in pivot order; the first `rank` are retained.
    order: Vec<usize>,
    rank: usize,
    /// Lower-triangular factor on the retained indices, row-major `rank x rank`.
    l: Vec<Complex64>,
    pivots: Vec<f64>,
}

impl PivotedCholesky {
    pub fn factor(g: &HermitianMatrix, drop_tol: f64) -> PivotedCholesky {
        let n = g.size();
        let mut a = g.clone();
        let mut order: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let mut lead = 0.0;
        let mut rank = 0;
        // full n x n workspace for the factor, columns filled left to right
        let mut l = vec![ZERO; n * n];
        for k in 0..n {
            let (p, dmax) = (k..n)
                .map(|i| (i, a.get(i, i).re))
                .fold(
                    (k, f64::NEG_INFINITY),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if k == 0 {
                lead = dmax;
            }
            if !(dmax > 0.0) || dmax < drop_tol * lead {
                break;
            }
            if p != k {
                order.swap(p, k);
                swap_sym(&mut a, p, k);
                for c in 0..k {
                    l.swap(p * n + c, k * n + c);
                }
            }
            let d = dmax.sqrt();
            l[k * n + k] = Complex64::new(d, 0.0);
            for i in k + 1..n {
                l[i * n + k] = a.get(i, k) / d;
            }
            for i in k + 1..n {
                let lik = l[i * n + k];
                for j in k + 1..=i {
                    let v = a.get(i, j) - lik * l[j * n + k].conj();
                    a.set(i, j, v);
                    a.set(j, i, v.conj());
                }
            }
            pivots.push(dmax);
            rank += 1;
        }
        let mut packed = vec![ZERO; rank * rank];
        for i in 0..rank {
            for j in 0..=i {
                packed[i * rank + j] = l[i * n + j];
            }
        }
        PivotedCholesky {
            order,
            rank,
            l: packed,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Retained original indices in pivot order.
    pub fn retained(&self) -> &[usize] {
        &self.order[..self.rank]
    }

    pub fn dropped(&self) -> Vec<usize> {
        let mut d = self.order[self.rank..].to_vec();
        d.sort_unstable();
        d
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Ratio of leading to trailing retained pivot, a cheap estimate of the
    /// condition number of the retained block.
    pub fn condition_estimate(&self) -> f64 {
        match (self.pivots.first(), self.pivots.last()) {
            (Some(a), Some(b)) => a / b,
            _ => f64::INFINITY,
        }
    }

    /// Solves `L y = b_R` where `b_R` is `b` gathered on the retained indices.
    pub fn forward_solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let r = self.rank;
        let mut y: Vec<Complex64> = self.retained().iter().map(|&i| b[i]).collect();
        for i in 0..r {
            let mut s = y[i];
            for j in 0..i {
                s -= self.l[i * r + j] * y[j];
            }
            y[i] = s / self.l[i * r + i];
        }
        y
    }

    /// `L L^H` on the retained indices, in pivot order.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let r = self.rank;
        let mut out = HermitianMatrix::zeros(r);
        for i in 0..r {
            for j in 0..r {
                let mut s = ZERO;
                for k in 0..=i.min(j) {
                    s += self.l[i * r + k] * self.l[j * r + k].conj();
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

fn swap_sym(a: &mut HermitianMatrix, p: usize, k: usize) {
    let n = a.size();
    for c in 0..n {
        let t = a.get(p, c);
        a.set(p, c, a.get(k, c));
        a.set(k, c, t);
    }
    for r in 0..n {
        let t = a.get(r, p);
        a.set(r, p, a.get(r, k));
        a.set(r, k, t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complement_is_orthogonal_and_spans_rest() {
        let a = vec![vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]];
        let comp = orthogonal_complement(&a, 3, 1e-12);
        assert_eq!(comp.len(), 2);
        for q in &comp {
            assert!(hermitian(&a[0], q).norm() < 1e-14);
            assert!((norm(q) - 1.0).abs() < 1e-14);
        }
        assert!(hermitian(&comp[0], &comp[1]).norm() < 1e-14);
    }

    #[test]
    fn cholesky_reconstructs_and_drops_null_directions() {
        // rank-2 matrix v v^H + w w^H in C^3
        let v = [c(1.0, 0.0), c(0.5, 0.5), c(0.0, 1.0)];
        let w = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, -1.0)];
        let mut g = HermitianMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                g.set(i, j, v[i] * v[j].conj() + w[i] * w[j].conj());
            }
        }
        let f = PivotedCholesky::factor(&g, 1e-10);
        assert_eq!(f.rank(), 2);
        let rec = f.reconstruct();
        let ret = f.retained();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec.get(i, j) - g.get(ret[i], ret[j])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_solve_gives_quadratic_form() {
        let g = HermitianMatrix::from_row_major(2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let f = PivotedCholesky::factor(&g, 1e-12);
        let b = [c(1.0, 0.0), c(0.0, 2.0)];
        let y = f.forward_solve(&b);
        let q: f64 = y.iter().map(|x| x.norm_sqr()).sum();
        // G^{-1} = 1/5 [[3, -i],[i, 2]]
        let direct = (3.0 * 1.0 + 2.0 * 4.0 + 2.0 * (b[0].conj() * c(0.0, -1.0) * b[1]).re) / 5.0;
        assert!((q - direct).abs() < 1e-13);
    }
}
