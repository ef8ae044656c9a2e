//! Points and direction vectors in complex n-space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

use crate::error::{BergmanError, Result};

/// Largest ambient dimension handled by the library.
pub const MAX_DIM: usize = 3;

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn hermitian(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

macro_rules! complex_tuple {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<Complex64>);

        impl $name {
            /// Builds from coordinates; rejects empty or non-finite input.
            pub fn new(coords: Vec<Complex64>) -> Result<Self> {
                if coords.is_empty() {
                    return Err(BergmanError::UnsupportedDimension(0));
                }
                if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(BergmanError::NonFinite);
                }
                Ok(Self(coords))
            }

            pub fn from_re_im(pairs: &[(f64, f64)]) -> Result<Self> {
                Self::new(pairs.iter().map(|&(r, i)| Complex64::new(r, i)).collect())
            }

            /// Real-coordinate convenience constructor.
            pub fn real(xs: &[f64]) -> Self {
                Self(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![Complex64::new(0.0, 0.0); n])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[Complex64] {
                &self.0
            }

            pub fn into_coords(self) -> Vec<Complex64> {
                self.0
            }

            pub fn norm(&self) -> f64 {
                norm(&self.0)
            }

            pub fn scale(&self, c: Complex64) -> Self {
                Self(self.0.iter().map(|x| x * c).collect())
            }

            /// Splits into the first `k` coordinates and the rest.
            pub fn split(&self, k: usize) -> (Self, Self) {
                (Self(self.0[..k].to_vec()), Self(self.0[k..].to_vec()))
            }

            pub fn concat(&self, other: &Self) -> Self {
                let mut v = self.0.clone();
                v.extend_from_slice(&other.0);
                Self(v)
            }

            pub fn conj(&self) -> Self {
                Self(self.0.iter().map(|x| x.conj()).collect())
            }
        }

        impl Index<usize> for $name {
            type Output = Complex64;
            fn index(&self, i: usize) -> &Complex64 {
                &self.0[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut Complex64 {
                &mut self.0[i]
            }
        }

        impl From<Vec<Complex64>> for $name {
            fn from(v: Vec<Complex64>) -> Self {
                Self(v)
            }
        }
    };
}

complex_tuple!(ComplexPoint);
complex_tuple!(ComplexVector);

impl ComplexPoint {
    /// `self + lambda * x`.
    pub fn offset(&self, lambda: Complex64, x: &ComplexVector) -> ComplexPoint {
        ComplexPoint(self.0.iter().zip(x.coords()).map(|(z, d)| z + lambda * d).collect())
    }

    pub fn translate(&self, v: &ComplexVector) -> ComplexPoint {
        self.offset(Complex64::new(1.0, 0.0), v)
    }

    /// Displacement `self - other`.
    pub fn diff(&self, other: &ComplexPoint) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn distance(&self, other: &ComplexPoint) -> f64 {
        self.diff(other).norm()
    }
}

impl ComplexVector {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Unit-norm copy; errors on the zero vector.
    pub fn normalized(&self) -> Result<ComplexVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(BergmanError::ZeroDirection);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn unit(n: usize, i: usize) -> ComplexVector {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        ComplexVector(v)
    }

    pub fn dot(&self, other: &ComplexVector) -> Complex64 {
        hermitian(&self.0, &other.0)
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(BergmanError::DimensionMismatch { expected, found });
    }
    Ok(())
}
