//! Numerical laboratory for a division-mutation-selection model of germinal-center
//! B-cell populations:
//!
//! `dn/dt = (Q(rho) - d - s(x)) n + mu n_xx` on `[0, 1]` with Neumann conditions,
//! `rho(t) = int_0^t int s n dx dt`, and a birth rate that switches from `Q0` to `Q1`
//! once `rho` reaches the threshold `rho0`.
//!
//! - [`fem`]: P1 finite elements with implicit Euler and the threshold switch.
//! - [`spectral`]: exact eigenpairs of `-mu d^2/dx^2 + s`, modal solutions, the
//!   spectral time-to-threshold, and the large-`mu` modal cascade.
//! - [`asymptotics`]: closed-form time-to-threshold estimates (narrow selection,
//!   small and large `mu`).
//! - [`green`]: heat kernels and two-sided threshold-time bounds for point-mass data.
//! - [`oracle`]: brute-force reference computations used to validate the above.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod convergence;
pub mod error;
pub mod fem;
pub mod field;
pub mod green;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use field::{inner_product, realize_initial, weighted_mass, Field, Grid};
pub use model::{DomainSpec, InitialData, ModelParams, SelectionProfile};
