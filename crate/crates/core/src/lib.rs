//! Bergman kernel and Bergman metric on low-dimensional convex domains.
//!
//! The crate has three layers:
//!
//! * [`domain`]: convex domains in C^n (n <= 3), membership and distance
//!   queries, the flat space `L(z0)` and the normal slice `E(z0)`.
//! * [`model`] and [`numeric`]: closed-form kernels and metrics on model
//!   domains, and finite-basis estimates from a monomial Gram matrix built by
//!   [`quadrature`].
//! * [`harness`] and [`cli`]: boundary-approach experiments and the
//!   command-line reports built on them.

// `!(x > 0.0)` style comparisons are used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domain;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod numeric;
pub mod point;
pub mod quadrature;

pub use domain::{Domain, DomainSpec, Membership};
pub use error::{BergmanError, Result};
pub use point::{ComplexPoint, ComplexVector};
