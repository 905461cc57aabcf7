use super::{recommended_beta, AppError, Application};
use crate::diagnostics::ConstantsDecl;
use crate::engine::SolverOptions;
use crate::linalg::{sym_eigenvalues, LinearMap, Matrix, Vector};
use crate::problem::{BlockSpec, Problem, State};
use crate::prox::ProxHandle;
use crate::subsolvers::SmoothHandle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `min r(x) + sum_s 0.5 |A_s z_s - b_s|^2  s.t.  x = z_s` for every `s`.
///
/// The regularizer is the first block; the stacked local copies
/// `z = (z_1, ..., z_p)` form the smooth last block with `B = I`, and
/// the first block enters through `-[I; ...; I]`. The first-block update is a
/// single prox at the average of `z_s + w_s / beta` with step `1/(p beta)`.
#[derive(Clone, Debug)]
pub struct RegressionInstance {
    pub designs: Vec<Matrix>,
    pub targets: Vec<Vector>,
    pub regularizer: ProxHandle,
    pub beta: f64,
}

impl RegressionInstance {
    /// Builds an instance with the recommended penalty.
    pub fn new(
        designs: Vec<Matrix>,
        targets: Vec<Vector>,
        regularizer: ProxHandle,
    ) -> Result<Self, AppError> {
        let mut inst = RegressionInstance {
            designs,
            targets,
            regularizer,
            beta: 1.0,
        };
        inst.validate()?;
        inst.beta = recommended_beta(
            &Matrix::identity(inst.rows(), inst.rows()),
            &inst.constants(),
        )?;
        Ok(inst)
    }

    /// Seeded LASSO data: Gaussian designs scaled by `1/sqrt(m)`, a truth
    /// with `max(1, n/5)` nonzeros of magnitude in `[1, 2]`, and targets with
    /// noise of standard deviation 0.01.
    pub fn synthetic_lasso(
        n: usize,
        m: usize,
        blocks: usize,
        lambda: f64,
        seed: u64,
    ) -> Result<Self, AppError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nnz = (n / 5).max(1);
        let mut truth = Vector::zeros(n);
        for i in 0..nnz {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            truth[(i * n) / nnz] = sign * rng.random_range(1.0..2.0);
        }
        let scale = 1.0 / (m as f64).sqrt();
        let mut designs = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..blocks {
            let a = Matrix::from_fn(m, n, |_, _| {
                scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
            });
            let noise = Vector::from_fn(m, |_, _| {
                0.01 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
            });
            targets.push(&a * &truth + noise);
            designs.push(a);
        }
        Self::new(designs, targets, ProxHandle::l1(lambda))
    }

    fn validate(&self) -> Result<(), AppError> {
        if self.designs.is_empty() || self.designs.len() != self.targets.len() {
            return Err(AppError::Invalid(
                "need one target per design matrix".into(),
            ));
        }
        let n = self.designs[0].ncols();
        for (a, b) in self.designs.iter().zip(&self.targets) {
            if a.ncols() != n || a.nrows() != b.len() {
                return Err(AppError::Invalid(
                    "design and target dimensions disagree".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.designs[0].ncols()
    }

    pub fn num_blocks(&self) -> usize {
        self.designs.len()
    }

    fn rows(&self) -> usize {
        self.dim() * self.num_blocks()
    }

    /// `r(x) + sum_s 0.5 |A_s x - b_s|^2`.
    pub fn objective(&self, x: &Vector) -> f64 {
        self.regularizer.value(x)
            + self
                .designs
                .iter()
                .zip(&self.targets)
                .map(|(a, b)| 0.5 * (a * x - b).norm_squared())
                .sum::<f64>()
    }

    /// The consensus variable from a final state.
    pub fn consensus<'a>(&self, s: &'a State) -> &'a Vector {
        &s.x[0]
    }
}

impl Application for RegressionInstance {
    fn name(&self) -> &'static str {
        "regression"
    }

    fn build_problem(&self) -> Result<Problem, AppError> {
        self.validate()?;
        let (n, p) = (self.dim(), self.num_blocks());
        let mut q = Matrix::zeros(n * p, n * p);
        let mut c = Vector::zeros(n * p);
        let mut c0 = 0.0;
        for (s, (a, b)) in self.designs.iter().zip(&self.targets).enumerate() {
            q.view_mut((s * n, s * n), (n, n)).copy_from(&a.tr_mul(a));
            c.rows_mut(s * n, n).copy_from(&(-a.tr_mul(b)));
            c0 += 0.5 * b.norm_squared();
        }
        Ok(Problem::builder()
            .x_block(
                BlockSpec::prox(n, self.regularizer.clone()),
                LinearMap::Stacked {
                    dim: n,
                    copies: p,
                    scale: -1.0,
                },
            )
            .y_block(
                BlockSpec::smooth(n * p, SmoothHandle::quadratic(q, c, c0)),
                LinearMap::identity(n * p),
            )
            .offset(Vector::zeros(n * p))
            .build()?)
    }

    /// Zero primal start with the multiplier that makes `w = -grad h(z)` hold.
    fn initial_state(&self) -> Result<State, AppError> {
        let p = self.build_problem()?;
        let mut s = p.zero_state(self.beta);
        let grad = p
            .spec(crate::problem::BlockId::Y)
            .gradient(&s.y)
            .expect("loss block is smooth");
        s.w = -grad;
        Ok(s)
    }

    /// The default penalty is large relative to the loss curvature, so
    /// progress per iteration is slow; the iteration budget is raised.
    fn default_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        opts.stop.max_iters = 100_000;
        opts
    }

    /// `L_h` is the largest curvature among the losses; `B = I` gives `mbar = 1`.
    fn constants(&self) -> ConstantsDecl {
        let l_h = self
            .designs
            .iter()
            .map(|a| {
                sym_eigenvalues(&a.tr_mul(a))
                    .into_iter()
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        ConstantsDecl::new(0.0, l_h, 1.0)
    }
}

/// Proximal gradient on `r(x) + sum_s 0.5 |A_s x - b_s|^2` with step `1/L`
/// from `x = 0`, used as an independent reference solution.
pub fn proximal_gradient_reference(inst: &RegressionInstance, iters: usize) -> Vector {
    let n = inst.dim();
    let mut h = Matrix::zeros(n, n);
    let mut g0 = Vector::zeros(n);
    for (a, b) in inst.designs.iter().zip(&inst.targets) {
        h += a.tr_mul(a);
        g0 -= a.tr_mul(b);
    }
    let lip = sym_eigenvalues(&h)
        .into_iter()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut x = Vector::zeros(n);
    for _ in 0..iters {
        let grad = &h * &x + &g0;
        x = inst.regularizer.prox(&(&x - grad / lip), 1.0 / lip);
    }
    x
}
