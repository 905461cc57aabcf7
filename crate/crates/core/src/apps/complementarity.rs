use super::{recommended_beta, AppError, Application};
use crate::diagnostics::ConstantsDecl;
use crate::linalg::{LinearMap, Matrix, Vector};
use crate::problem::{BlockSpec, Problem, State};
use crate::prox::{proj_complementarity, ProxHandle};
use crate::subsolvers::SmoothHandle;

/// `min h(x, y) s.t. x, y >= 0, x^T y = 0`, split as
/// `indicator_S(u) + h(v) s.t. u - v = 0` with `u = (x', y')` and `v = (x, y)`
/// stacked as `[x; y]`.
#[derive(Clone, Debug)]
pub struct ComplementarityInstance {
    /// Objective on the stacked pair `[x; y]` of length `2 n`.
    pub objective: SmoothHandle,
    pub n: usize,
    pub beta: f64,
}

impl ComplementarityInstance {
    pub fn new(objective: SmoothHandle, n: usize) -> Result<Self, AppError> {
        let mut inst = ComplementarityInstance {
            objective,
            n,
            beta: 1.0,
        };
        inst.beta = recommended_beta(&Matrix::identity(2 * n, 2 * n), &inst.constants())?;
        Ok(inst)
    }

    /// `h = |x - a|^2 + |y - b|^2`.
    pub fn nearest_pair(a: Vector, b: Vector) -> Result<Self, AppError> {
        if a.len() != b.len() {
            return Err(AppError::Invalid("targets must have equal length".into()));
        }
        let n = a.len();
        let target = Vector::from_iterator(2 * n, a.iter().chain(b.iter()).copied());
        let h = SmoothHandle::quadratic(
            Matrix::identity(2 * n, 2 * n) * 2.0,
            &target * -2.0,
            target.norm_squared(),
        );
        Self::new(h, n)
    }

    /// Splits a stacked vector into `(x, y)`.
    pub fn split(&self, v: &Vector) -> (Vector, Vector) {
        (
            v.rows(0, self.n).into_owned(),
            v.rows(self.n, self.n).into_owned(),
        )
    }
}

impl Application for ComplementarityInstance {
    fn name(&self) -> &'static str {
        "complementarity"
    }

    fn build_problem(&self) -> Result<Problem, AppError> {
        let d = 2 * self.n;
        Ok(Problem::builder()
            .x_block(
                BlockSpec::prox(d, ProxHandle::complementarity()),
                LinearMap::identity(d),
            )
            .y_block(
                BlockSpec::smooth(d, self.objective.clone()),
                LinearMap::neg_identity(d),
            )
            .offset(Vector::zeros(d))
            .build()?)
    }

    /// Starts at the projection of `(1, ..., 1)` onto the complementarity set
    /// with `w = grad h(v)`.
    fn initial_state(&self) -> Result<State, AppError> {
        let v = proj_complementarity(&Vector::from_fn(2 * self.n, |i, _| 1.0 + 0.25 * i as f64));
        let w = self.objective.gradient(&v);
        Ok(State {
            x: vec![v.clone()],
            y: v,
            w,
            beta: self.beta,
        })
    }

    fn constants(&self) -> ConstantsDecl {
        ConstantsDecl::new(0.0, self.objective.lipschitz(), 1.0)
    }
}
