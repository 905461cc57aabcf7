//! Runtime and post-hoc checks of the convergence assumptions and
//! properties: image inclusion, dual control, sufficient descent, the
//! subgradient bound, running-best rates, and a prox-regularity probe.

mod assumptions;
mod monitors;
mod probe;

pub use assumptions::{
    beta_threshold, check_dual_identity, check_im_subset, check_update_order, check_y_smooth,
    dual_control_constant,
};
pub use monitors::{
    check_dual_control, check_running_best_decay, check_subgradient_bound,
    check_subgradient_bound_trace, check_sufficient_descent, running_best, running_best_rates,
    subgradient_bound_constant, subgradient_norm, RunningBestRates,
};
pub use probe::{default_gamma_grid, probe_restricted_prox_regularity};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("B is the zero matrix")]
    DegenerateB,
    #[error("missing constants: {0}")]
    MissingConstants(String),
    #[error("{0} provides no subgradient sampler")]
    NoSubgradientSampler(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Outcome of one check. `passed` holds exactly when
/// `margin >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub check_name: String,
    pub passed: bool,
    /// Worst-case slack; negative values measure the violation.
    pub margin: f64,
    pub tolerance: f64,
    /// Estimated quantity, when the check produces one (C1, gamma, ...).
    pub value: Option<f64>,
    /// Offending iteration or sample indices.
    pub details: Vec<usize>,
    pub message: String,
}

impl DiagnosticReport {
    pub fn new(check_name: &str, margin: f64, tolerance: f64) -> Self {
        DiagnosticReport {
            check_name: check_name.to_string(),
            passed: margin >= -tolerance,
            margin,
            tolerance,
            value: None,
            details: Vec::new(),
            message: String::new(),
        }
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn with_details(mut self, d: Vec<usize>) -> Self {
        self.details = d;
        self
    }

    pub fn with_message(mut self, m: impl Into<String>) -> Self {
        self.message = m.into();
        self
    }
}

/// User-declared constants: Lipschitz constants of the coupling and the
/// last-block gradients, and the sub-minimization path constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDecl {
    #[serde(default)]
    pub l_g: f64,
    pub l_h: f64,
    pub mbar: f64,
    #[serde(default)]
    pub l_phi: Option<f64>,
}

impl ConstantsDecl {
    pub fn new(l_g: f64, l_h: f64, mbar: f64) -> Self {
        ConstantsDecl {
            l_g,
            l_h,
            mbar,
            l_phi: None,
        }
    }

    /// Lipschitz constants may be zero (linear terms); `mbar` must be positive.
    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.l_g) || !ok(self.l_h) || !(self.mbar > 0.0 && self.mbar.is_finite()) {
            return Err(DiagnosticsError::InvalidInput(format!(
                "constants out of range: {self:?}"
            )));
        }
        Ok(())
    }
}
