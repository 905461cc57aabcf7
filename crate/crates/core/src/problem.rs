//! Problem model: blocks, linear coupling, and the augmented Lagrangian.

use crate::linalg::{range_residual, LinearMap, Matrix, Vector};
use crate::prox::{FunctionClass, ProxHandle};
use crate::subsolvers::SmoothHandle;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("offset b is not in the image of B (residual {residual:.3e}, |b| = {norm:.3e})")]
    InfeasibleOffset { residual: f64, norm: f64 },
}

/// Identifies a primal block: `X(i)` for `x_i`, `Y` for the last block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockId {
    X(usize),
    Y,
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockId::X(i) => write!(f, "x{i}"),
            BlockId::Y => write!(f, "y"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BlockObjective {
    Zero,
    Prox(ProxHandle),
    Smooth(SmoothHandle),
}

#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub dim: usize,
    pub objective: BlockObjective,
    pub class: FunctionClass,
}

impl BlockSpec {
    pub fn zero(dim: usize) -> Self {
        BlockSpec {
            dim,
            objective: BlockObjective::Zero,
            class: FunctionClass::Smooth,
        }
    }

    pub fn prox(dim: usize, handle: ProxHandle) -> Self {
        let class = handle.class();
        BlockSpec {
            dim,
            objective: BlockObjective::Prox(handle),
            class,
        }
    }

    pub fn smooth(dim: usize, handle: SmoothHandle) -> Self {
        BlockSpec {
            dim,
            objective: BlockObjective::Smooth(handle),
            class: FunctionClass::Smooth,
        }
    }

    pub fn value(&self, u: &Vector) -> f64 {
        match &self.objective {
            BlockObjective::Zero => 0.0,
            BlockObjective::Prox(p) => p.value(u),
            BlockObjective::Smooth(s) => s.value(u),
        }
    }

    /// Gradient for smooth or zero objectives, `None` for prox objectives.
    pub fn gradient(&self, u: &Vector) -> Option<Vector> {
        match &self.objective {
            BlockObjective::Zero => Some(Vector::zeros(u.len())),
            BlockObjective::Prox(_) => None,
            BlockObjective::Smooth(s) => Some(s.gradient(u)),
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self.objective, BlockObjective::Prox(_))
    }
}

/// A smooth term coupling several blocks, `g(x_0, ..., x_p, y)`.
pub trait CouplingTerm: Send + Sync {
    fn value(&self, x: &[Vector], y: &Vector) -> f64;
    fn gradient(&self, block: BlockId, x: &[Vector], y: &Vector) -> Vector;
    /// Whether `g` depends on the given block at all.
    fn involves(&self, block: BlockId) -> bool;
    /// Hessian of `g` in one block when it is constant (quadratic `g`).
    fn block_hessian(&self, _block: BlockId) -> Option<Matrix> {
        None
    }
    /// Declared Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

#[derive(Clone)]
pub struct Problem {
    blocks_x: Vec<BlockSpec>,
    block_y: BlockSpec,
    a: Vec<LinearMap>,
    b: LinearMap,
    offset: Vector,
    coupling: Option<Arc<dyn CouplingTerm>>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("blocks_x", &self.blocks_x)
            .field("block_y", &self.block_y)
            .field("rows", &self.offset.len())
            .field("coupling", &self.coupling.is_some())
            .finish()
    }
}

#[derive(Default)]
pub struct ProblemBuilder {
    blocks_x: Vec<(BlockSpec, LinearMap)>,
    block_y: Option<(BlockSpec, LinearMap)>,
    offset: Option<Vector>,
    coupling: Option<Arc<dyn CouplingTerm>>,
}

impl ProblemBuilder {
    pub fn x_block(mut self, spec: BlockSpec, a: impl Into<LinearMap>) -> Self {
        self.blocks_x.push((spec, a.into()));
        self
    }

    pub fn y_block(mut self, spec: BlockSpec, b: impl Into<LinearMap>) -> Self {
        self.block_y = Some((spec, b.into()));
        self
    }

    pub fn offset(mut self, b: Vector) -> Self {
        self.offset = Some(b);
        self
    }

    pub fn coupling(mut self, g: impl CouplingTerm + 'static) -> Self {
        self.coupling = Some(Arc::new(g));
        self
    }

    pub fn build(self) -> Result<Problem, ProblemError> {
        let (block_y, b) = self
            .block_y
            .ok_or_else(|| ProblemError::DimensionMismatch("no y block".into()))?;
        if self.blocks_x.is_empty() {
            return Err(ProblemError::DimensionMismatch(
                "at least one x block is required".into(),
            ));
        }
        let m = b.rows();
        let offset = self.offset.unwrap_or_else(|| Vector::zeros(m));
        if offset.len() != m {
            return Err(ProblemError::DimensionMismatch(format!(
                "b has length {}, B has {m} rows",
                offset.len()
            )));
        }
        if b.cols() != block_y.dim {
            return Err(ProblemError::DimensionMismatch(format!(
                "B has {} columns, y block has dim {}",
                b.cols(),
                block_y.dim
            )));
        }
        let mut blocks_x = Vec::new();
        let mut a = Vec::new();
        for (i, (spec, ai)) in self.blocks_x.into_iter().enumerate() {
            if ai.rows() != m {
                return Err(ProblemError::DimensionMismatch(format!(
                    "A_{i} has {} rows, B has {m}",
                    ai.rows()
                )));
            }
            if ai.cols() != spec.dim {
                return Err(ProblemError::DimensionMismatch(format!(
                    "A_{i} has {} columns, block has dim {}",
                    ai.cols(),
                    spec.dim
                )));
            }
            blocks_x.push(spec);
            a.push(ai);
        }
        let norm = offset.norm();
        if norm > 0.0 {
            let residual = range_residual(&b.to_dense(), &offset);
            if residual > 1e-10 * norm {
                return Err(ProblemError::InfeasibleOffset { residual, norm });
            }
        }
        Ok(Problem {
            blocks_x,
            block_y,
            a,
            b,
            offset,
            coupling: self.coupling,
        })
    }
}

/// Current iterate of the method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: Vec<Vector>,
    pub y: Vector,
    pub w: Vector,
    pub beta: f64,
}

impl State {
    pub fn block(&self, id: BlockId) -> &Vector {
        match id {
            BlockId::X(i) => &self.x[i],
            BlockId::Y => &self.y,
        }
    }

    pub fn block_mut(&mut self, id: BlockId) -> &mut Vector {
        match id {
            BlockId::X(i) => &mut self.x[i],
            BlockId::Y => &mut self.y,
        }
    }
}

impl Problem {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn num_x(&self) -> usize {
        self.blocks_x.len()
    }

    pub fn rows(&self) -> usize {
        self.offset.len()
    }

    pub fn block_ids(&self) -> Vec<BlockId> {
        (0..self.num_x())
            .map(BlockId::X)
            .chain(std::iter::once(BlockId::Y))
            .collect()
    }

    pub fn spec(&self, id: BlockId) -> &BlockSpec {
        match id {
            BlockId::X(i) => &self.blocks_x[i],
            BlockId::Y => &self.block_y,
        }
    }

    pub fn map(&self, id: BlockId) -> &LinearMap {
        match id {
            BlockId::X(i) => &self.a[i],
            BlockId::Y => &self.b,
        }
    }

    pub fn a_maps(&self) -> &[LinearMap] {
        &self.a
    }

    pub fn b_map(&self) -> &LinearMap {
        &self.b
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn coupling(&self) -> Option<&dyn CouplingTerm> {
        self.coupling.as_deref()
    }

    pub fn zero_state(&self, beta: f64) -> State {
        State {
            x: self.blocks_x.iter().map(|s| Vector::zeros(s.dim)).collect(),
            y: Vector::zeros(self.block_y.dim),
            w: Vector::zeros(self.rows()),
            beta,
        }
    }

    pub fn check_state(&self, s: &State) -> Result<(), ProblemError> {
        if !(s.beta > 0.0) {
            return Err(ProblemError::DimensionMismatch(format!(
                "beta must be positive (got {})",
                s.beta
            )));
        }
        if s.x.len() != self.num_x() {
            return Err(ProblemError::DimensionMismatch(format!(
                "state has {} x blocks, problem has {}",
                s.x.len(),
                self.num_x()
            )));
        }
        for id in self.block_ids() {
            if s.block(id).len() != self.spec(id).dim {
                return Err(ProblemError::DimensionMismatch(format!(
                    "block {id} has length {}, expected {}",
                    s.block(id).len(),
                    self.spec(id).dim
                )));
            }
        }
        if s.w.len() != self.rows() {
            return Err(ProblemError::DimensionMismatch(format!(
                "w has length {}, expected {}",
                s.w.len(),
                self.rows()
            )));
        }
        Ok(())
    }

    /// `A x + B y - b`.
    pub fn residual(&self, x: &[Vector], y: &Vector) -> Vector {
        let mut r = self.b.apply(y) - &self.offset;
        for (ai, xi) in self.a.iter().zip(x) {
            r += ai.apply(xi);
        }
        r
    }

    /// `sum_i f_i(x_i) + g(x, y) + h(y)`.
    pub fn objective(&self, x: &[Vector], y: &Vector) -> f64 {
        let mut v: f64 = self.blocks_x.iter().zip(x).map(|(s, xi)| s.value(xi)).sum();
        v += self.block_y.value(y);
        if let Some(g) = &self.coupling {
            v += g.value(x, y);
        }
        v
    }

    pub fn lagrangian_parts(&self, x: &[Vector], y: &Vector, w: &Vector, beta: f64) -> f64 {
        let phi = self.objective(x, y);
        if !phi.is_finite() {
            return phi;
        }
        let r = self.residual(x, y);
        phi + w.dot(&r) + 0.5 * beta * r.norm_squared()
    }
}

pub fn augmented_lagrangian(p: &Problem, s: &State) -> Result<f64, ProblemError> {
    p.check_state(s)?;
    Ok(p.lagrangian_parts(&s.x, &s.y, &s.w, s.beta))
}
