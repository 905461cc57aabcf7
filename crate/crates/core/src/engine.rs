//! The multi-block ADMM iteration: sequential block minimization of the
//! augmented Lagrangian followed by the dual ascent step.

use crate::linalg::Vector;
use crate::problem::{BlockId, BlockObjective, Problem, ProblemError, State};
use crate::subsolvers::{descend_with, solve_quadratic_block_detailed, SubsolveReport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("subproblem for block {block} failed: {reason}")]
    SubproblemFailure { block: BlockId, reason: String },
    #[error("no convergence within {} iterations", .0.trace.records.len())]
    NotConverged(Box<Solution>),
    #[error("invalid update order: {0}")]
    InvalidOrder(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Order in which the primal blocks are visited within one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum UpdateOrder {
    /// `x_0, x_1, ..., x_p, y`.
    CyclicFixed,
    /// `x_0`, a seeded random permutation of `x_1..x_p`, then `y`.
    PermutedMiddle { seed: u64 },
    /// Explicit sequences used in turn (iteration `k` uses entry
    /// `k mod len`). Sequences that do not start with `x_0` and end with
    /// `y` are rejected unless `unsafe_ok` is set.
    Explicit {
        sequences: Vec<Vec<BlockId>>,
        unsafe_ok: bool,
    },
}

impl UpdateOrder {
    pub fn sequence(&self, num_x: usize, k: usize) -> Vec<BlockId> {
        match self {
            UpdateOrder::CyclicFixed => (0..num_x).map(BlockId::X).chain([BlockId::Y]).collect(),
            UpdateOrder::PermutedMiddle { seed } => {
                let mut middle: Vec<usize> = (1..num_x).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(k as u64);
                middle.shuffle(&mut rng);
                std::iter::once(BlockId::X(0))
                    .chain(middle.into_iter().map(BlockId::X))
                    .chain([BlockId::Y])
                    .collect()
            }
            UpdateOrder::Explicit { sequences, .. } => sequences[k % sequences.len()].clone(),
        }
    }

    fn sequence_is_safe(seq: &[BlockId]) -> bool {
        seq.first() == Some(&BlockId::X(0)) && seq.last() == Some(&BlockId::Y)
    }

    /// True when every iteration updates `x_0` first and `y` last.
    pub fn is_safe(&self) -> bool {
        match self {
            UpdateOrder::Explicit { sequences, .. } => {
                sequences.iter().all(|s| Self::sequence_is_safe(s))
            }
            _ => true,
        }
    }

    pub fn validate(&self, num_x: usize) -> Result<(), EngineError> {
        if let UpdateOrder::Explicit {
            sequences,
            unsafe_ok,
        } = self
        {
            if sequences.is_empty() {
                return Err(EngineError::InvalidOrder("no sequences given".into()));
            }
            for seq in sequences {
                let mut seen: Vec<BlockId> = seq.clone();
                seen.sort_by_key(|b| match b {
                    BlockId::X(i) => *i,
                    BlockId::Y => usize::MAX,
                });
                let expected: Vec<BlockId> =
                    (0..num_x).map(BlockId::X).chain([BlockId::Y]).collect();
                if seen != expected {
                    return Err(EngineError::InvalidOrder(format!(
                        "{seq:?} is not a permutation of all blocks"
                    )));
                }
                if !Self::sequence_is_safe(seq) && !unsafe_ok {
                    return Err(EngineError::InvalidOrder(format!(
                        "{seq:?} does not update x0 first and y last; set unsafe_ok to allow it"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopConfig {
    pub max_iters: usize,
    pub eps_primal: f64,
    pub eps_change: f64,
}

impl Default for StopConfig {
    fn default() -> Self {
        StopConfig {
            max_iters: 10_000,
            eps_primal: 1e-8,
            eps_change: 1e-8,
        }
    }
}

/// Tolerance schedule for iterative block solves: `max(tol0 * decay^k, floor)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerTolerance {
    pub tol0: f64,
    pub decay: f64,
    pub floor: f64,
    pub max_iters: usize,
}

impl Default for InnerTolerance {
    fn default() -> Self {
        InnerTolerance {
            tol0: 1e-10,
            decay: 0.9,
            floor: 0.0,
            max_iters: 10_000,
        }
    }
}

impl InnerTolerance {
    pub fn at(&self, k: usize) -> f64 {
        (self.tol0 * self.decay.powi(k.min(i32::MAX as usize) as i32)).max(self.floor)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub stop: StopConfig,
    pub inner: InnerTolerance,
    /// Keep every iterate in the trace (needed for subgradient checks).
    pub record_states: bool,
    /// Record the Lagrangian after each individual block update.
    pub record_block_lagrangians: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub lagrangian: f64,
    pub primal_residual: f64,
    /// `|A_i (x_i^{k} - x_i^{k-1})|` for every x block, in index order.
    pub delta_x: Vec<f64>,
    /// `|B (y^k - y^{k-1})|`.
    pub delta_y: f64,
    pub dual_delta: f64,
    /// `|B^T w + grad_y(h + g)|`, NaN when the y objective is not smooth.
    pub dual_identity_err: f64,
    pub eta: f64,
    pub order: Vec<BlockId>,
    /// Lagrangian after each block update (old multiplier), when recorded.
    pub block_lagrangians: Vec<f64>,
    pub notes: Vec<String>,
}

impl TraceRecord {
    /// Largest movement among `x_1..x_p` and `y`. `x_0` is left out: its
    /// previous value never enters the next iteration.
    pub fn max_change(&self) -> f64 {
        self.delta_x
            .iter()
            .skip(1)
            .cloned()
            .fold(self.delta_y, f64::max)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub initial_lagrangian: Option<f64>,
    pub records: Vec<TraceRecord>,
    /// Iterates `0..=K` when state recording is on.
    pub states: Vec<State>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub state: State,
    pub trace: Trace,
    pub converged: bool,
}

struct BlockOutcome {
    u: Vector,
    report: SubsolveReport,
    note: Option<String>,
}

/// Minimizes the augmented Lagrangian over one block with all other
/// blocks and the multiplier held at their values in `st`.
fn solve_block(
    p: &Problem,
    st: &State,
    id: BlockId,
    tol: f64,
    inner_max: usize,
) -> Result<BlockOutcome, EngineError> {
    let beta = st.beta;
    let map = p.map(id);
    let u0 = st.block(id).clone();
    let c = p.residual(&st.x, &st.y) - map.apply(&u0);
    let coupling = p.coupling().filter(|g| g.involves(id));
    let fail = |reason: String| EngineError::SubproblemFailure { block: id, reason };

    // gradient of the smooth part excluding the block objective
    let penalty_grad = |u: &Vector| -> Vector {
        let mut g = map.apply_transpose(&(&st.w + (map.apply(u) + &c) * beta));
        if let Some(cg) = coupling {
            let mut x = st.x.clone();
            let mut y = st.y.clone();
            match id {
                BlockId::X(i) => x[i] = u.clone(),
                BlockId::Y => y = u.clone(),
            }
            g += cg.gradient(id, &x, &y);
        }
        g
    };
    let coupled_value = |u: &Vector| -> f64 {
        let r = map.apply(u) + &c;
        let mut v = st.w.dot(&r) + 0.5 * beta * r.norm_squared();
        if let Some(cg) = coupling {
            let mut x = st.x.clone();
            let mut y = st.y.clone();
            match id {
                BlockId::X(i) => x[i] = u.clone(),
                BlockId::Y => y = u.clone(),
            }
            v += cg.value(&x, &y);
        }
        v
    };

    let spec = p.spec(id);
    let outcome = match &spec.objective {
        BlockObjective::Prox(h) => {
            match map.gram_scalar().filter(|_| coupling.is_none()) {
                Some(alpha) => {
                    let v = -map.apply_transpose(&(&c + &st.w / beta)) / alpha;
                    let t = 1.0 / (alpha * beta);
                    if h.is_exact() {
                        BlockOutcome {
                            u: h.prox(&v, t),
                            report: SubsolveReport::exact(),
                            note: None,
                        }
                    } else {
                        let (u, report) = h.prox_inexact(&v, t, tol, &u0);
                        let note = (!report.converged).then(|| {
                            format!("{id}: inner solve stopped at {:.3e}", report.achieved)
                        });
                        BlockOutcome { u, report, note }
                    }
                }
                None => {
                    // proximal gradient on the penalty (and coupling) part
                    let smax = map.sigma_max();
                    let lip = beta * smax * smax + coupling.map_or(0.0, |g| g.lipschitz());
                    let mut u = u0.clone();
                    let mut achieved = f64::INFINITY;
                    let mut iters = 0;
                    while iters < inner_max {
                        iters += 1;
                        let next = h.prox(&(&u - penalty_grad(&u) / lip), 1.0 / lip);
                        achieved = lip * (&next - &u).norm();
                        u = next;
                        if achieved <= tol {
                            break;
                        }
                    }
                    let converged = achieved <= tol;
                    let report = SubsolveReport {
                        achieved,
                        iterations: iters,
                        eta: achieved * (&u - &u0).norm(),
                        converged,
                    };
                    let note = (!converged)
                        .then(|| format!("{id}: proximal-gradient stopped at {achieved:.3e}"));
                    BlockOutcome { u, report, note }
                }
            }
        }
        BlockObjective::Zero | BlockObjective::Smooth(_) => {
            let own_hessian = match &spec.objective {
                BlockObjective::Smooth(s) => s.hessian().cloned(),
                _ => Some(crate::linalg::Matrix::zeros(spec.dim, spec.dim)),
            };
            let coupling_hessian = match coupling {
                Some(g) => g.block_hessian(id),
                None => Some(crate::linalg::Matrix::zeros(spec.dim, spec.dim)),
            };
            let full_grad = |u: &Vector| -> Vector {
                let mut g = penalty_grad(u);
                if let Some(og) = spec.gradient(u) {
                    g += og;
                }
                g
            };
            match (own_hessian, coupling_hessian) {
                (Some(h1), Some(h2)) => {
                    let hess = h1 + h2 + map.gram() * beta;
                    let grad = full_grad(&u0);
                    let (step, singular) = solve_quadratic_block_detailed(&hess, &grad)
                        .map_err(|e| fail(e.to_string()))?;
                    let note = singular
                        .then(|| format!("{id}: singular block Hessian, minimum-norm step taken"));
                    BlockOutcome {
                        u: &u0 + step,
                        report: SubsolveReport::exact(),
                        note,
                    }
                }
                _ => {
                    let lip = match &spec.objective {
                        BlockObjective::Smooth(s) => s.lipschitz(),
                        _ => 0.0,
                    } + coupling.map_or(0.0, |g| g.lipschitz())
                        + beta * map.sigma_max().powi(2);
                    let (u, report) = descend_with(
                        |u| spec.value(u) + coupled_value(u),
                        full_grad,
                        lip,
                        &u0,
                        tol,
                        inner_max,
                    );
                    let note = (!report.converged).then(|| {
                        format!("{id}: descent stopped at gradient {:.3e}", report.achieved)
                    });
                    BlockOutcome { u, report, note }
                }
            }
        }
    };
    if outcome.u.iter().any(|v| !v.is_finite()) {
        return Err(fail("non-finite block solution".into()));
    }
    Ok(outcome)
}

/// Runs one iteration from `s`; `k` is the zero-based iteration index
/// (the produced record carries `k + 1`).
pub fn admm_step(
    p: &Problem,
    s: &State,
    order: &UpdateOrder,
    k: usize,
    opts: &SolverOptions,
) -> Result<(State, TraceRecord), EngineError> {
    p.check_state(s)?;
    let seq = order.sequence(p.num_x(), k);
    let tol = opts.inner.at(k + 1);
    let mut st = s.clone();
    let mut eta = 0.0;
    let mut notes = Vec::new();
    let mut block_lagrangians = Vec::new();
    for &id in &seq {
        let out = solve_block(p, &st, id, tol, opts.inner.max_iters)?;
        *st.block_mut(id) = out.u;
        eta += out.report.eta;
        if let Some(n) = out.note {
            notes.push(n);
        }
        if opts.record_block_lagrangians {
            block_lagrangians.push(p.lagrangian_parts(&st.x, &st.y, &st.w, st.beta));
        }
    }
    let r = p.residual(&st.x, &st.y);
    let w_old = st.w.clone();
    st.w = &st.w + &r * st.beta;

    let delta_x = (0..p.num_x())
        .map(|i| p.map(BlockId::X(i)).apply(&(&st.x[i] - &s.x[i])).norm())
        .collect();
    let delta_y = p.b_map().apply(&(&st.y - &s.y)).norm();
    let y_spec = p.spec(BlockId::Y);
    let dual_identity_err = match y_spec.gradient(&st.y) {
        Some(mut g) => {
            if let Some(cg) = p.coupling().filter(|g| g.involves(BlockId::Y)) {
                g += cg.gradient(BlockId::Y, &st.x, &st.y);
            }
            (p.b_map().apply_transpose(&st.w) + g).norm()
        }
        None => f64::NAN,
    };
    let record = TraceRecord {
        k: k + 1,
        lagrangian: p.lagrangian_parts(&st.x, &st.y, &st.w, st.beta),
        primal_residual: r.norm(),
        delta_x,
        delta_y,
        dual_delta: (&st.w - &w_old).norm(),
        dual_identity_err,
        eta,
        order: seq,
        block_lagrangians,
        notes,
    };
    Ok((st, record))
}

/// Iterates until the primal residual and the block movement are both
/// below their thresholds, or `max_iters` is reached.
pub fn solve(
    p: &Problem,
    s0: State,
    order: &UpdateOrder,
    opts: &SolverOptions,
) -> Result<Solution, EngineError> {
    p.check_state(&s0)?;
    order.validate(p.num_x())?;
    let l0 = p.lagrangian_parts(&s0.x, &s0.y, &s0.w, s0.beta);
    let mut trace = Trace {
        initial_lagrangian: l0.is_finite().then_some(l0),
        ..Default::default()
    };
    if opts.record_states {
        trace.states.push(s0.clone());
    }
    let mut state = s0;
    let mut converged = false;
    for k in 0..opts.stop.max_iters {
        let (next, rec) = admm_step(p, &state, order, k, opts)?;
        let done =
            rec.primal_residual <= opts.stop.eps_primal && rec.max_change() <= opts.stop.eps_change;
        trace.records.push(rec);
        if opts.record_states {
            trace.states.push(next.clone());
        }
        state = next;
        if done {
            converged = true;
            break;
        }
    }
    let sol = Solution {
        state,
        trace,
        converged,
    };
    if converged {
        Ok(sol)
    } else {
        Err(EngineError::NotConverged(Box::new(sol)))
    }
}

/// Like [`solve`], but returns the solution whether or not it converged.
pub fn run(
    p: &Problem,
    s0: State,
    order: &UpdateOrder,
    opts: &SolverOptions,
) -> Result<Solution, EngineError> {
    match solve(p, s0, order, opts) {
        Err(EngineError::NotConverged(sol)) => Ok(*sol),
        other => other,
    }
}
