//! The two-variable example `min x^2 - y^2 s.t. x = y, x in [-1, 1]`.
//!
//! The closed-form recursions here use the penalty `beta_a |x - y|^2` with
//! dual step `2 beta_a`, which is the engine's `(beta/2)|r|^2` with
//! `beta = 2 beta_a`.

use super::{ExpectedBehavior, GalleryCase, GalleryError, Oracle};
use crate::engine::UpdateOrder;
use crate::linalg::{LinearMap, Vector};
use crate::problem::{BlockSpec, Problem, State};
use crate::prox::ProxHandle;
use crate::subsolvers::SmoothHandle;
use crate::Matrix;
use std::sync::Arc;

/// Iterates `(x^k, y^k, w^k)` for `k = 1..=iters` of ADMM on the example,
/// with penalty `beta_a |x - y|^2`.
pub fn prop1_admm_oracle(
    beta_a: f64,
    y0: f64,
    w0: f64,
    iters: usize,
) -> Result<Vec<(f64, f64, f64)>, GalleryError> {
    if !(beta_a > 1.0) {
        return Err(GalleryError::InvalidBeta(beta_a));
    }
    let (mut y, mut w) = (y0, w0);
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let x = (beta_a / (beta_a + 1.0) * (y - w / (2.0 * beta_a))).clamp(-1.0, 1.0);
        y = beta_a / (beta_a - 1.0) * (x + w / (2.0 * beta_a));
        w += 2.0 * beta_a * (x - y);
        out.push((x, y, w));
    }
    Ok(out)
}

/// Multiplier sequence `w^1..w^iters` of the method of multipliers with
/// dual step `tau`. At `w = 0` the inner problem has two minimizers; the
/// branches are taken alternately, the decreasing one first.
pub fn prop1_alm_oracle(
    beta: f64,
    tau: f64,
    w0: f64,
    iters: usize,
) -> Result<Vec<f64>, GalleryError> {
    if !(beta > 1.0) {
        return Err(GalleryError::InvalidBeta(beta));
    }
    if !(tau > 0.0) {
        return Err(GalleryError::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let contraction = 1.0 - tau / (2.0 * (beta - 1.0));
    let shift = tau / (beta - 1.0);
    let mut w = w0;
    let mut zero_hits = 0usize;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let down = if w == 0.0 {
            zero_hits += 1;
            zero_hits % 2 == 1
        } else {
            w > 0.0
        };
        w = contraction * w + if down { -shift } else { shift };
        out.push(w);
    }
    Ok(out)
}

/// Value of `sup_w inf_{x in [-1,1], y} L(x, y, w)` for penalty `beta |x - y|^2`.
pub fn prop1_duality_gap(beta: f64) -> Result<f64, GalleryError> {
    if !(beta > 1.0) {
        return Err(GalleryError::InvalidBeta(beta));
    }
    Ok(-1.0 / (beta - 1.0))
}

/// The example as an engine problem. `beta` is the engine penalty and must
/// exceed 2 so the `y` subproblem is bounded.
pub fn prop1_problem() -> Problem {
    Problem::builder()
        .x_block(
            BlockSpec::prox(
                1,
                ProxHandle::box_quadratic(
                    Vector::from_element(1, -1.0),
                    Vector::from_element(1, 1.0),
                    1.0,
                ),
            ),
            LinearMap::identity(1),
        )
        .y_block(
            BlockSpec::smooth(
                1,
                SmoothHandle::quadratic(Matrix::from_element(1, 1, -2.0), Vector::zeros(1), 0.0),
            ),
            LinearMap::neg_identity(1),
        )
        .offset(Vector::zeros(1))
        .build()
        .expect("static problem is well formed")
}

pub fn prop1_admm_case(beta: f64, y0: f64, w0: f64) -> Result<GalleryCase, GalleryError> {
    if !(beta > 2.0) {
        return Err(GalleryError::InvalidBeta(beta));
    }
    let beta_a = beta / 2.0;
    let start = State {
        x: vec![Vector::zeros(1)],
        y: Vector::from_element(1, y0),
        w: Vector::from_element(1, w0),
        beta,
    };
    let oracle: Oracle = Arc::new(move |iters| {
        prop1_admm_oracle(beta_a, y0, w0, iters)
            .expect("beta checked")
            .into_iter()
            .map(|(x, y, w)| State {
                x: vec![Vector::from_element(1, x)],
                y: Vector::from_element(1, y),
                w: Vector::from_element(1, w),
                beta,
            })
            .collect()
    });
    Ok(GalleryCase {
        name: "prop1-admm".into(),
        problem: prop1_problem(),
        start,
        order: UpdateOrder::CyclicFixed,
        expected: ExpectedBehavior::FiniteConvergence,
        violated: None,
        oracle: Some(oracle),
    })
}
