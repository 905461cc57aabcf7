//! Small examples with known behavior: finite convergence, cycles,
//! divergence when the feasibility condition fails, and sensitivity to the
//! primal update order. Cases with closed-form iterates carry an oracle.

mod cases;
mod prop1;

pub use cases::{
    chen_divergence_case, lipong_example7_case, neg_abs_cycle_case, order_alternation_case,
    two_abs_case,
};
pub use prop1::{
    prop1_admm_case, prop1_admm_oracle, prop1_alm_oracle, prop1_duality_gap, prop1_problem,
};

use crate::diagnostics::{check_im_subset, check_update_order, check_y_smooth, DiagnosticReport};
use crate::engine::UpdateOrder;
use crate::problem::{Problem, State};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("penalty parameter {0} out of range for this case")]
    InvalidBeta(f64),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("unknown gallery case '{0}'")]
    UnknownCase(String),
    #[error("'{0}' has a closed-form oracle only and cannot be run through the engine")]
    OracleOnly(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedBehavior {
    FiniteConvergence,
    Cycle { period: usize },
    Divergence,
    OrderSensitive,
}

/// Convergence condition a case is built to violate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assumption {
    /// `Im(A) ⊆ Im(B)`.
    Feasibility,
    /// Smooth objective on the last block.
    SmoothLastBlock,
    /// `x_0` first and `y` last in every iteration.
    UpdateOrder,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::Feasibility => "feasibility (image inclusion)",
            Assumption::SmoothLastBlock => "smooth last block",
            Assumption::UpdateOrder => "update order",
        })
    }
}

/// Closed-form iterates `1..=K` in engine convention.
pub type Oracle = Arc<dyn Fn(usize) -> Vec<State> + Send + Sync>;

#[derive(Clone)]
pub struct GalleryCase {
    pub name: String,
    pub problem: Problem,
    pub start: State,
    pub order: UpdateOrder,
    pub expected: ExpectedBehavior,
    pub violated: Option<Assumption>,
    pub oracle: Option<Oracle>,
}

impl fmt::Debug for GalleryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalleryCase")
            .field("name", &self.name)
            .field("expected", &self.expected)
            .field("violated", &self.violated)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

impl GalleryCase {
    /// Runs every assumption checker that applies to a problem/order pair.
    pub fn check_assumptions(&self) -> Vec<(Assumption, DiagnosticReport)> {
        check_all(&self.problem, &self.order)
    }
}

pub fn check_assumption(p: &Problem, order: &UpdateOrder, which: Assumption) -> DiagnosticReport {
    match which {
        Assumption::Feasibility => {
            let a: Vec<_> = p.a_maps().iter().map(|m| m.to_dense()).collect();
            check_im_subset(&a, &p.b_map().to_dense(), 1e-10)
        }
        Assumption::SmoothLastBlock => check_y_smooth(p),
        Assumption::UpdateOrder => check_update_order(order),
    }
}

pub fn check_all(p: &Problem, order: &UpdateOrder) -> Vec<(Assumption, DiagnosticReport)> {
    [
        Assumption::Feasibility,
        Assumption::SmoothLastBlock,
        Assumption::UpdateOrder,
    ]
    .into_iter()
    .map(|a| (a, check_assumption(p, order, a)))
    .collect()
}

/// Names accepted by [`case_by_name`], plus the oracle-only `prop1-alm`.
pub const CASE_NAMES: &[&str] = &[
    "prop1-admm",
    "prop1-alm",
    "neg-abs",
    "order-alt",
    "chen",
    "li-pong",
    "two-abs",
];

/// Default engine penalty for each named case.
pub fn default_beta(name: &str) -> Option<f64> {
    Some(match name {
        "prop1-admm" => 8.0,
        "prop1-alm" => 2.0,
        "neg-abs" => 2.0,
        "order-alt" => 4.0,
        "chen" | "li-pong" | "two-abs" => 1.0,
        _ => return None,
    })
}

/// Builds a named case. `beta` is the engine penalty; cases with a fixed
/// penalty ignore it. `prop1-admm` starts from `y = 1.5, w = -3`.
pub fn case_by_name(name: &str, beta: Option<f64>) -> Result<GalleryCase, GalleryError> {
    let b = beta.or_else(|| default_beta(name));
    match name {
        "prop1-admm" => prop1_admm_case(b.unwrap_or(8.0), 1.5, -3.0),
        "prop1-alm" => Err(GalleryError::OracleOnly(name.into())),
        "neg-abs" => neg_abs_cycle_case(b.unwrap_or(2.0)),
        "order-alt" => order_alternation_case(b.unwrap_or(4.0)),
        "chen" => Ok(chen_divergence_case()),
        "li-pong" => Ok(lipong_example7_case()),
        "two-abs" => two_abs_case(b.unwrap_or(1.0)),
        other => Err(GalleryError::UnknownCase(other.into())),
    }
}
