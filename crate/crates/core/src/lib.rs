//! Solvers and diagnostics for ℓq-regularized least squares (`0 < q < 1`):
//!
//! ```text
//! min_x  T_λ(x) = ½‖Ax − y‖₂² + λ Σ |x_i|^q
//! ```
//!
//! The main solver is a Gauss-Seidel iterative thresholding scheme
//! ([`solvers::Gaita`]) that updates one coordinate at a time against the
//! latest residual; it converges for any step size `μ < 1/max_i‖A_i‖²`.
//! A Jacobi variant ([`solvers::Jaita`]) is provided as the baseline, which
//! needs the stricter `μ < ‖A‖₂⁻²`.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod problem;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector};
pub use problem::ProblemInstance;
pub use prox::ProxParams;
pub use solvers::{RunOutcome, RunStatus, SolverConfig, StopRule};
