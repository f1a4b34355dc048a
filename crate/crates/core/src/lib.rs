//! Gradient-regularized Newton method with approximate Hessians.
//!
//! Each step solves
//!
//! ```text
//! x⁺ = x − (H(x) + (‖∇f(x)‖*/γ) B)⁻¹ ∇f(x)
//! ```
//!
//! where `H(x) ⪰ 0` is the exact Hessian or an approximation of it and `B`
//! fixes the geometry. The step size `γ` is tied to the gradient-normalized
//! smoothness of `f`, which can be estimated numerically, bounded in closed
//! form for standard function classes, or found by an adaptive search.
//!
//! Modules:
//! - [`linalg`]: norm pair and regularized solves
//! - [`objectives`], [`data`]: benchmark oracles and datasets
//! - [`hessian`]: Hessian approximations and inexactness diagnostics
//! - [`gns`]: local region, `γ` estimation, closed-form bounds
//! - [`solver`]: fixed and adaptive step-size loops with traces
//! - [`theory`]: iteration-complexity predictors

pub mod data;
pub mod gns;
pub mod hessian;
pub mod linalg;
pub mod objectives;
pub mod solver;
pub mod testing;
pub mod theory;

pub use linalg::{LinalgError, Matrix, NormPair, PsdOperator, Vector, GAMMA_MAX};
