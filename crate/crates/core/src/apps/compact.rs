use super::{recommended_beta, AppError, Application};
use crate::diagnostics::ConstantsDecl;
use crate::linalg::{unvec, vec_of, LinearMap, Matrix, Vector};
use crate::problem::{BlockSpec, Problem, State};
use crate::prox::{proj_sphere, proj_stiefel, ProxHandle};
use crate::subsolvers::SmoothHandle;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CompactSet {
    /// Unit sphere in `R^dim`.
    Sphere { dim: usize },
    /// `rows x cols` matrices with orthonormal columns, stored column-major.
    Stiefel { rows: usize, cols: usize },
}

impl CompactSet {
    pub fn dim(&self) -> usize {
        match *self {
            CompactSet::Sphere { dim } => dim,
            CompactSet::Stiefel { rows, cols } => rows * cols,
        }
    }

    pub fn project(&self, v: &Vector) -> Vector {
        match *self {
            CompactSet::Sphere { .. } => proj_sphere(v),
            CompactSet::Stiefel { rows, cols } => vec_of(&proj_stiefel(&unvec(v, rows, cols))),
        }
    }

    fn handle(&self) -> ProxHandle {
        match *self {
            CompactSet::Sphere { .. } => ProxHandle::sphere(),
            CompactSet::Stiefel { rows, cols } => ProxHandle::stiefel(rows, cols),
        }
    }
}

/// `min indicator_S(x) + J(y) s.t. x - y = 0`: projection step on `x`,
/// smooth step on `y`.
#[derive(Clone, Debug)]
pub struct CompactSetInstance {
    pub objective: SmoothHandle,
    pub set: CompactSet,
    pub beta: f64,
}

impl CompactSetInstance {
    pub fn new(objective: SmoothHandle, set: CompactSet) -> Result<Self, AppError> {
        let mut inst = CompactSetInstance {
            objective,
            set,
            beta: 1.0,
        };
        let d = set.dim();
        inst.beta = recommended_beta(&Matrix::identity(d, d), &inst.constants())?;
        Ok(inst)
    }

    /// `J(y) = 0.5 |y - c|^2`.
    pub fn distance_to(target: Vector, set: CompactSet) -> Result<Self, AppError> {
        let d = target.len();
        Self::new(
            SmoothHandle::quadratic(
                Matrix::identity(d, d),
                -&target,
                0.5 * target.norm_squared(),
            ),
            set,
        )
    }

    /// `J(y) = g^T y`.
    pub fn linear(g: Vector, set: CompactSet) -> Result<Self, AppError> {
        let d = g.len();
        Self::new(SmoothHandle::quadratic(Matrix::zeros(d, d), g, 0.0), set)
    }
}

impl Application for CompactSetInstance {
    fn name(&self) -> &'static str {
        "compact"
    }

    fn build_problem(&self) -> Result<Problem, AppError> {
        let d = self.set.dim();
        Ok(Problem::builder()
            .x_block(
                BlockSpec::prox(d, self.set.handle()),
                LinearMap::identity(d),
            )
            .y_block(
                BlockSpec::smooth(d, self.objective.clone()),
                LinearMap::neg_identity(d),
            )
            .offset(Vector::zeros(d))
            .build()?)
    }

    /// Starts from the projection of the all-ones direction with `w = -grad J(y)`.
    fn initial_state(&self) -> Result<State, AppError> {
        let d = self.set.dim();
        let y = self
            .set
            .project(&Vector::from_fn(d, |i, _| 1.0 + 0.1 * i as f64));
        let w = self.objective.gradient(&y);
        Ok(State {
            x: vec![y.clone()],
            y,
            w,
            beta: self.beta,
        })
    }

    fn constants(&self) -> ConstantsDecl {
        ConstantsDecl::new(0.0, self.objective.lipschitz(), 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SolverOptions;

    #[test]
    fn sphere_quadratic() {
        let c = Vector::from_vec(vec![3.0, -4.0, 1.0]);
        let inst =
            CompactSetInstance::distance_to(c.clone(), CompactSet::Sphere { dim: 3 }).unwrap();
        let sol = inst.solve(&SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((&sol.state.x[0] - &c / c.norm()).norm() < 1e-6);
    }

    #[test]
    fn sphere_linear() {
        let g = Vector::from_vec(vec![1.0, 2.0, -2.0]);
        let inst = CompactSetInstance::linear(g.clone(), CompactSet::Sphere { dim: 3 }).unwrap();
        let sol = inst.solve(&SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(
            (&sol.state.x[0] + &g / g.norm()).norm() < 1e-6,
            "{}",
            sol.state.x[0]
        );
    }
}
