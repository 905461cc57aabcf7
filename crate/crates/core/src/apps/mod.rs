//! Ready-made problem families wired onto the engine: consensus
//! regression, minimization over a compact manifold, complementarity
//! constraints, and low-rank plus smooth plus noise matrix decomposition.
//!
//! Every instance picks its default penalty as ten times the descent
//! threshold computed from its declared constants.

mod compact;
mod complementarity;
mod decomposition;
mod regression;

pub use compact::{CompactSet, CompactSetInstance};
pub use complementarity::ComplementarityInstance;
pub use decomposition::DecompositionInstance;
pub use regression::{proximal_gradient_reference, RegressionInstance};

use crate::diagnostics::{beta_threshold, ConstantsDecl, DiagnosticsError};
use crate::engine::{run, EngineError, Solution, SolverOptions, UpdateOrder};
use crate::linalg::Matrix;
use crate::problem::{Problem, ProblemError, State};
use crate::prox::ProxError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Prox(#[from] ProxError),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl From<ProblemError> for AppError {
    fn from(e: ProblemError) -> Self {
        AppError::Engine(EngineError::Problem(e))
    }
}

/// Multiplier of the descent threshold used for default penalties.
pub const BETA_FACTOR: f64 = 10.0;

/// `BETA_FACTOR` times the descent threshold for the given `B` and constants.
pub fn recommended_beta(b: &Matrix, c: &ConstantsDecl) -> Result<f64, AppError> {
    Ok(BETA_FACTOR * beta_threshold(b, c)?)
}

pub trait Application {
    fn name(&self) -> &'static str;
    fn build_problem(&self) -> Result<Problem, AppError>;
    fn initial_state(&self) -> Result<State, AppError>;
    fn constants(&self) -> ConstantsDecl;

    fn order(&self) -> UpdateOrder {
        UpdateOrder::CyclicFixed
    }

    fn default_options(&self) -> SolverOptions {
        SolverOptions::default()
    }

    /// Runs the engine from the instance's start; the solution is returned
    /// whether or not the stopping rule was met.
    fn solve(&self, opts: &SolverOptions) -> Result<Solution, AppError> {
        let p = self.build_problem()?;
        Ok(run(&p, self.initial_state()?, &self.order(), opts)?)
    }
}
