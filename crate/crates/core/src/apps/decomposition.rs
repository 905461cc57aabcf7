use super::{recommended_beta, AppError, Application};
use crate::diagnostics::ConstantsDecl;
use crate::engine::{InnerTolerance, SolverOptions};
use crate::linalg::{unvec, vec_of, LinearMap, Matrix, Vector};
use crate::problem::{BlockSpec, Problem, State};
use crate::prox::ProxHandle;
use crate::subsolvers::SmoothHandle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `min p(X) + sum_i |Y_i - Y_{i+1}| + |Z|_F^2 s.t. X + Y + Z = V`, where
/// `Y_i` are the columns of `Y`. Blocks are visited `X`, `Y`, `Z`; the
/// `Z` update has the closed form `(beta (V - X - Y) - W) / (2 + beta)`.
#[derive(Clone, Debug)]
pub struct DecompositionInstance {
    pub data: Matrix,
    pub low_rank: ProxHandle,
    pub beta: f64,
    /// Lower bound on the tolerance of the inexact `Y` solves.
    pub inner_floor: f64,
}

impl DecompositionInstance {
    pub fn new(data: Matrix, low_rank: ProxHandle) -> Result<Self, AppError> {
        let mut inst = DecompositionInstance {
            data,
            low_rank,
            beta: 1.0,
            inner_floor: 1e-12,
        };
        let d = inst.data.len();
        inst.beta = recommended_beta(&Matrix::identity(d, d), &inst.constants())?;
        Ok(inst)
    }

    /// Schatten-`q` penalty with weight `lambda`.
    pub fn schatten(data: Matrix, lambda: f64, q: f64) -> Result<Self, AppError> {
        let (r, c) = data.shape();
        Self::new(data, ProxHandle::schatten_q(r, c, lambda, q)?)
    }

    /// `V = sigma u v^T + noise` with unit `u`, `v` and Gaussian noise of
    /// standard deviation `noise`. `v` has zero mean, so the low-rank part
    /// carries no constant-across-columns component that the TV block could
    /// equally well absorb.
    pub fn rank_one(rows: usize, cols: usize, sigma: f64, noise: f64, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |k: usize| -> Vector {
            let v = Vector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            &v / v.norm()
        };
        let u = draw(rows);
        let v = draw(cols).add_scalar(0.0);
        let v = v.add_scalar(-v.mean());
        let v = &v / v.norm();
        let mut m = u * v.transpose() * sigma;
        m += Matrix::from_fn(rows, cols, |_, _| {
            noise * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        m
    }

    /// Splits a final state into `(X, Y, Z)`.
    pub fn parts(&self, s: &State) -> (Matrix, Matrix, Matrix) {
        let (r, c) = self.data.shape();
        (
            unvec(&s.x[0], r, c),
            unvec(&s.x[1], r, c),
            unvec(&s.y, r, c),
        )
    }
}

impl Application for DecompositionInstance {
    fn name(&self) -> &'static str {
        "decomposition"
    }

    fn build_problem(&self) -> Result<Problem, AppError> {
        let (r, c) = self.data.shape();
        let d = r * c;
        Ok(Problem::builder()
            .x_block(
                BlockSpec::prox(d, self.low_rank.clone()),
                LinearMap::identity(d),
            )
            .x_block(
                BlockSpec::prox(d, ProxHandle::column_tv(r, c)),
                LinearMap::identity(d),
            )
            .y_block(
                BlockSpec::smooth(
                    d,
                    SmoothHandle::quadratic(Matrix::identity(d, d) * 2.0, Vector::zeros(d), 0.0),
                ),
                LinearMap::identity(d),
            )
            .offset(vec_of(&self.data))
            .build()?)
    }

    fn initial_state(&self) -> Result<State, AppError> {
        Ok(self.build_problem()?.zero_state(self.beta))
    }

    /// `h = |Z|_F^2` has `L_h = 2`; `B = I` gives `mbar = 1`.
    fn constants(&self) -> ConstantsDecl {
        ConstantsDecl::new(0.0, 2.0, 1.0)
    }

    fn default_options(&self) -> SolverOptions {
        let mut opts = SolverOptions {
            inner: InnerTolerance {
                floor: self.inner_floor,
                ..Default::default()
            },
            ..Default::default()
        };
        opts.stop.max_iters = 50_000;
        opts
    }
}
