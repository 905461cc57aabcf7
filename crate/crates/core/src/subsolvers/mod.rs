//! Block subproblem solvers: closed-form quadratics, backtracking descent
//! for general smooth blocks, and the column-TV prox.

mod descent;
mod quadratic;
mod smooth;
mod tv;

pub use descent::{descend_with, smooth_block_descent};
pub use quadratic::{solve_quadratic_block, solve_quadratic_block_detailed};
pub use smooth::SmoothHandle;
pub use tv::{
    column_tv_value, solve_col_tv_block, solve_col_tv_block_warm, solve_col_tv_dual, ColumnTv,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubsolverError {
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// Outcome of an iterative block solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsolveReport {
    /// Final stationarity measure (gradient norm or duality gap).
    pub achieved: f64,
    pub iterations: usize,
    /// Bound on the error this solve adds to the Lagrangian decrease.
    pub eta: f64,
    pub converged: bool,
}

impl SubsolveReport {
    pub fn exact() -> Self {
        SubsolveReport {
            achieved: 0.0,
            iterations: 0,
            eta: 0.0,
            converged: true,
        }
    }
}
