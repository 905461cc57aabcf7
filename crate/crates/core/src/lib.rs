//! Multi-block nonconvex ADMM with runtime convergence diagnostics.
//!
//! The problem form is
//!
//! ```text
//! minimize   sum_i f_i(x_i) + g(x_0, ..., x_p, y) + h(y)
//! subject to A_0 x_0 + ... + A_p x_p + B y = b
//! ```
//!
//! solved by visiting the blocks in order (`x_0` first, `y` last), each
//! time minimizing the augmented Lagrangian
//! `phi + <w, r> + (beta/2) |r|^2` with `r = A x + B y - b`, and then
//! stepping the multiplier `w <- w + beta r`.

pub mod apps;
pub mod diagnostics;
pub mod engine;
pub mod gallery;
pub mod linalg;
pub mod problem;
pub mod prox;
pub mod subsolvers;

pub use engine::{
    admm_step, run, solve, EngineError, InnerTolerance, Solution, SolverOptions, StopConfig, Trace,
    TraceRecord, UpdateOrder,
};
pub use linalg::{LinearMap, Matrix, Vector};
pub use problem::{
    augmented_lagrangian, BlockId, BlockObjective, BlockSpec, CouplingTerm, Problem, ProblemError,
    State,
};
pub use prox::{FunctionClass, ProxError, ProxHandle};
pub use subsolvers::{SmoothHandle, SubsolveReport};
