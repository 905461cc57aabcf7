use super::{Assumption, ExpectedBehavior, GalleryCase, GalleryError, Oracle};
use crate::engine::UpdateOrder;
use crate::linalg::{LinearMap, Matrix, Vector};
use crate::problem::{BlockId, BlockSpec, CouplingTerm, Problem, State};
use crate::prox::{prox_l1, FunctionClass, ProxHandle};
use std::sync::Arc;

fn scalar_state(x: f64, y: f64, w: f64, beta: f64) -> State {
    State {
        x: vec![Vector::from_element(1, x)],
        y: Vector::from_element(1, y),
        w: Vector::from_element(1, w),
        beta,
    }
}

/// `-|u| + indicator([-1, 1])`.
fn neg_abs_on_box() -> ProxHandle {
    ProxHandle::from_fn(
        "neg_abs_box",
        FunctionClass::LowerSemicontinuous,
        |u| {
            if u.iter().all(|v| v.abs() <= 1.0) {
                -u.abs().sum()
            } else {
                f64::INFINITY
            }
        },
        |v, t| {
            v.map(|vi| {
                let pos = (vi + t).clamp(0.0, 1.0);
                let neg = (vi - t).clamp(-1.0, 0.0);
                let obj = |u: f64| -u.abs() + (u - vi).powi(2) / (2.0 * t);
                if obj(neg) < obj(pos) {
                    neg
                } else {
                    pos
                }
            })
        },
    )
}

/// `min -|x| + |y| s.t. x = y, x in [-1, 1]`, started on its period-two cycle.
pub fn neg_abs_cycle_case(beta: f64) -> Result<GalleryCase, GalleryError> {
    if !(beta > 0.0) {
        return Err(GalleryError::InvalidBeta(beta));
    }
    let problem = Problem::builder()
        .x_block(BlockSpec::prox(1, neg_abs_on_box()), LinearMap::identity(1))
        .y_block(
            BlockSpec::prox(1, ProxHandle::l1(1.0)),
            LinearMap::neg_identity(1),
        )
        .offset(Vector::zeros(1))
        .build()
        .expect("static problem is well formed");
    let a = 2.0 / beta;
    let oracle: Oracle = Arc::new(move |iters| {
        (1..=iters)
            .map(|k| {
                if k % 2 == 1 {
                    scalar_state(a, 0.0, 1.0, beta)
                } else {
                    scalar_state(-a, 0.0, -1.0, beta)
                }
            })
            .collect()
    });
    Ok(GalleryCase {
        name: "neg-abs".into(),
        problem,
        start: scalar_state(-a, 0.0, -1.0, beta),
        order: UpdateOrder::CyclicFixed,
        expected: ExpectedBehavior::Cycle { period: 2 },
        violated: Some(Assumption::SmoothLastBlock),
        oracle: Some(oracle),
    })
}

/// `g(x, y) = x (1 + y)` for scalar `x` and `y`.
struct BilinearShift;

impl CouplingTerm for BilinearShift {
    fn value(&self, x: &[Vector], y: &Vector) -> f64 {
        x[0][0] * (1.0 + y[0])
    }
    fn gradient(&self, block: BlockId, x: &[Vector], y: &Vector) -> Vector {
        match block {
            BlockId::X(_) => Vector::from_element(1, 1.0 + y[0]),
            BlockId::Y => Vector::from_element(1, x[0][0]),
        }
    }
    fn involves(&self, _block: BlockId) -> bool {
        true
    }
    fn block_hessian(&self, _block: BlockId) -> Option<Matrix> {
        Some(Matrix::zeros(1, 1))
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// `min x (1 + y) s.t. x - y = 0`, with the primal order swapped every
/// iteration. Started on the two-point oscillation. At `beta = 2` both
/// points of the oscillation coincide, so the run sits at a fixed point.
pub fn order_alternation_case(beta: f64) -> Result<GalleryCase, GalleryError> {
    if !(beta > 1.0) {
        return Err(GalleryError::InvalidBeta(beta));
    }
    let problem = Problem::builder()
        .x_block(BlockSpec::zero(1), LinearMap::identity(1))
        .y_block(BlockSpec::zero(1), LinearMap::neg_identity(1))
        .offset(Vector::zeros(1))
        .coupling(BilinearShift)
        .build()
        .expect("static problem is well formed");
    let al = 1.0 / beta;
    let even = (-al, 2.0 * al * (al - 1.0), -al);
    let odd = (2.0 * al * (al - 1.0), -al, al - 1.0);
    let oracle: Oracle = Arc::new(move |iters| {
        (1..=iters)
            .map(|k| {
                let (x, y, w) = if k % 2 == 1 { odd } else { even };
                scalar_state(x, y, w, beta)
            })
            .collect()
    });
    Ok(GalleryCase {
        name: "order-alt".into(),
        problem,
        start: scalar_state(even.0, even.1, even.2, beta),
        order: UpdateOrder::Explicit {
            sequences: vec![
                vec![BlockId::Y, BlockId::X(0)],
                vec![BlockId::X(0), BlockId::Y],
            ],
            unsafe_ok: true,
        },
        expected: ExpectedBehavior::OrderSensitive,
        violated: Some(Assumption::UpdateOrder),
        oracle: Some(oracle),
    })
}

/// Three-block linear system with columns `(1,1,1)`, `(1,1,2)`, `(1,2,2)`
/// and zero objective, started at `x_0 = x_1 = y = 1`, `w = 0`.
pub fn chen_divergence_case() -> GalleryCase {
    let col = |v: [f64; 3]| Matrix::from_column_slice(3, 1, &v);
    let beta = 1.0;
    let problem = Problem::builder()
        .x_block(BlockSpec::zero(1), col([1.0, 1.0, 1.0]))
        .x_block(BlockSpec::zero(1), col([1.0, 1.0, 2.0]))
        .y_block(BlockSpec::zero(1), col([1.0, 2.0, 2.0]))
        .offset(Vector::zeros(3))
        .build()
        .expect("static problem is well formed");
    let start = State {
        x: vec![Vector::from_element(1, 1.0), Vector::from_element(1, 1.0)],
        y: Vector::from_element(1, 1.0),
        w: Vector::zeros(3),
        beta,
    };
    GalleryCase {
        name: "chen".into(),
        problem,
        start,
        order: UpdateOrder::CyclicFixed,
        expected: ExpectedBehavior::Divergence,
        violated: Some(Assumption::Feasibility),
        oracle: None,
    }
}

/// `min indicator_S1(x_0) + indicator_S2(x_1) s.t. x_0 = y, x_1 = y` with
/// `S1` the horizontal axis and `S2 = {(0,0), (2,1), (2,-1)}`.
pub fn lipong_example7_case() -> GalleryCase {
    let inf = f64::INFINITY;
    let axis = ProxHandle::box_set(
        Vector::from_vec(vec![-inf, 0.0]),
        Vector::from_vec(vec![inf, 0.0]),
    );
    let points = ProxHandle::finite_set(vec![
        Vector::from_vec(vec![0.0, 0.0]),
        Vector::from_vec(vec![2.0, 1.0]),
        Vector::from_vec(vec![2.0, -1.0]),
    ]);
    let mut a0 = Matrix::zeros(4, 2);
    a0.view_mut((0, 0), (2, 2)).fill_with_identity();
    let mut a1 = Matrix::zeros(4, 2);
    a1.view_mut((2, 0), (2, 2)).fill_with_identity();
    let problem = Problem::builder()
        .x_block(BlockSpec::prox(2, axis), a0)
        .x_block(BlockSpec::prox(2, points), a1)
        .y_block(
            BlockSpec::zero(2),
            LinearMap::Stacked {
                dim: 2,
                copies: 2,
                scale: -1.0,
            },
        )
        .offset(Vector::zeros(4))
        .build()
        .expect("static problem is well formed");
    let beta = 1.0;
    let start = State {
        x: vec![Vector::zeros(2), Vector::zeros(2)],
        y: Vector::from_vec(vec![2.0, 0.0]),
        w: Vector::zeros(4),
        beta,
    };
    GalleryCase {
        name: "li-pong".into(),
        problem,
        start,
        order: UpdateOrder::CyclicFixed,
        expected: ExpectedBehavior::Divergence,
        violated: Some(Assumption::Feasibility),
        oracle: None,
    }
}

/// `min 2|x - 1| + |y| s.t. x = y` with the primal order swapped every
/// iteration, started on the cycle `(a, 0, 2) -> (0, a, 1) -> (a, 0, 2)`
/// with `a = 1/beta`, which exists for `beta >= 1`. A fixed order from the
/// same start reaches the solution `(1, 1, 1)`. The last block is nonsmooth
/// as well, so the smooth-last-block check also fails.
pub fn two_abs_case(beta: f64) -> Result<GalleryCase, GalleryError> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(GalleryError::InvalidBeta(beta));
    }
    let shifted = ProxHandle::from_fn(
        "two_abs_shifted",
        FunctionClass::PiecewiseLinear,
        |u| 2.0 * u.map(|v| v - 1.0).abs().sum(),
        |v, t| prox_l1(&v.map(|vi| vi - 1.0), t, 2.0).map(|u| u + 1.0),
    );
    let problem = Problem::builder()
        .x_block(BlockSpec::prox(1, shifted), LinearMap::identity(1))
        .y_block(
            BlockSpec::prox(1, ProxHandle::l1(1.0)),
            LinearMap::neg_identity(1),
        )
        .offset(Vector::zeros(1))
        .build()
        .expect("static problem is well formed");
    let a = 1.0 / beta;
    let oracle: Oracle = Arc::new(move |iters| {
        (1..=iters)
            .map(|k| {
                if k % 2 == 1 {
                    scalar_state(0.0, a, 1.0, beta)
                } else {
                    scalar_state(a, 0.0, 2.0, beta)
                }
            })
            .collect()
    });
    Ok(GalleryCase {
        name: "two-abs".into(),
        problem,
        start: scalar_state(a, 0.0, 2.0, beta),
        order: UpdateOrder::Explicit {
            sequences: vec![
                vec![BlockId::X(0), BlockId::Y],
                vec![BlockId::Y, BlockId::X(0)],
            ],
            unsafe_ok: true,
        },
        expected: ExpectedBehavior::OrderSensitive,
        violated: Some(Assumption::UpdateOrder),
        oracle: Some(oracle),
    })
}
