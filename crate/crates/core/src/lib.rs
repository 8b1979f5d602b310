// Validation guards use `!(x > 0.0)` on purpose: unlike `x <= 0.0` it also
// rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Risk curves and desk-scale simulations for high-dimensional linear
//! regression with i.i.d. Gaussian designs: Bayes risk, Bayes-AMP risk, and
//! the convex M-estimation lower bound for arbitrary scalar priors, plus the
//! Monte-Carlo machinery (proximal-gradient estimators and Bayes-AMP) that
//! validates them.

pub mod channel;
pub mod error;
pub mod fixed_point;
pub mod optimal;
pub mod prior;
pub mod prox;
pub mod rng;
pub mod sim;
pub mod tabfn;

pub use error::{Error, Result};
pub use prior::{Atom, Prior};
