//! Acceptance suite: one PASS/FAIL line per criterion. Every check compares
//! the library against an oracle written out here, not against the
//! library's own helpers.

use nadmm::apps::{
    Application, CompactSet, CompactSetInstance, ComplementarityInstance, DecompositionInstance,
    RegressionInstance,
};
use nadmm::diagnostics::{
    beta_threshold, check_running_best_decay, check_subgradient_bound_trace,
    check_sufficient_descent, default_gamma_grid, probe_restricted_prox_regularity,
    running_best_rates,
};
use nadmm::gallery::{
    case_by_name, check_assumption, prop1_admm_case, prop1_alm_oracle, prop1_duality_gap,
    Assumption, CASE_NAMES,
};
use nadmm::prox::{
    proj_box_uniform, proj_complementarity, proj_finite_set, proj_sphere, proj_stiefel, Piece,
    PiecewiseLinear,
};
use nadmm::{run, Matrix, Problem, ProxHandle, Solution, SolverOptions, UpdateOrder, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Grid search over `[lo, hi]` plus extra candidate points, refined by
/// golden section around the best grid point.
fn argmin_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize, extra: &[f64]) -> (f64, f64) {
    let h = (hi - lo) / n as f64;
    let mut best = (lo, f(lo));
    let pts = (0..=n)
        .map(|i| lo + h * i as f64)
        .chain(extra.iter().copied().filter(|&e| e >= lo && e <= hi));
    for u in pts {
        let v = f(u);
        if v < best.1 {
            best = (u, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    for (u, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (u, v);
        }
    }
    best
}

fn with_states(mut opts: SolverOptions) -> SolverOptions {
    opts.record_states = true;
    opts
}

/// Finite convergence of ADMM on the two-variable example.
fn c1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_iters = 0;
    for beta_a in [2.0, 4.0, 16.0] {
        for _ in 0..100 {
            let y0: f64 = rng.random_range(-3.0..=3.0);
            let w0 = -2.0 * y0;
            let case = prop1_admm_case(2.0 * beta_a, y0, w0).map_err(|e| e.to_string())?;
            let mut opts = SolverOptions::default();
            opts.stop.max_iters = 10;
            opts.stop.eps_primal = 1e-14;
            opts.stop.eps_change = 1e-14;
            let sol = run(
                &case.problem,
                case.start.clone(),
                &case.order,
                &with_states(opts),
            )
            .map_err(|e| e.to_string())?;
            let hit = sol
                .trace
                .records
                .iter()
                .position(|r| r.primal_residual <= 1e-14);
            ensure(
                hit.is_some(),
                format!("beta_a={beta_a}, y0={y0}: residual above 1e-14 after 10 iterations"),
            )?;
            worst_iters = worst_iters.max(hit.unwrap() + 1);
            // Appendix recursion with penalty beta_a |x - y|^2.
            let (mut y, mut w) = (y0, w0);
            for s in &sol.trace.states[1..] {
                let x = (beta_a / (beta_a + 1.0) * (y - w / (2.0 * beta_a))).clamp(-1.0, 1.0);
                y = beta_a / (beta_a - 1.0) * (x + w / (2.0 * beta_a));
                w += 2.0 * beta_a * (x - y);
                let err = (s.x[0][0] - x)
                    .abs()
                    .max((s.y[0] - y).abs())
                    .max((s.w[0] - w).abs());
                ensure(
                    err <= 1e-12,
                    format!("beta_a={beta_a}, y0={y0}: engine differs from recursion by {err:.2e}"),
                )?;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 1.0, format!("runtime {secs:.2}s"))?;
    Ok(format!(
        "300 starts, at most {worst_iters} iterations, {secs:.3}s"
    ))
}

/// One method-of-multipliers step computed by direct minimization.
fn alm_step(beta: f64, tau: f64, w: f64) -> f64 {
    let ystar = |x: f64| (w + 2.0 * beta * x) / (2.0 * (beta - 1.0));
    let g = |x: f64| {
        let y = ystar(x);
        x * x - y * y + w * (x - y) + beta * (x - y) * (x - y)
    };
    let (x, _) = argmin_1d(&g, -1.0, 1.0, 2000, &[]);
    w + tau * (x - ystar(x))
}

/// The method of multipliers keeps oscillating on the same example.
fn c2() -> Outcome {
    let beta = 2.0;
    let mut summary = Vec::new();
    for tau in [0.5, 0.1, 0.01] {
        let ws = prop1_alm_oracle(beta, tau, 1.0, 10_000).map_err(|e| e.to_string())?;
        // The closed-form steps must match direct minimization away from the tie at w = 0.
        let mut prev: f64 = 1.0;
        for &w in ws.iter().take(200) {
            if prev.abs() > 1e-6 {
                let direct = alm_step(beta, tau, prev);
                ensure(
                    (direct - w).abs() <= 1e-6,
                    format!("tau={tau}: step from {prev} gives {w}, direct {direct}"),
                )?;
            }
            prev = w;
        }
        let flips = ws
            .windows(2)
            .filter(|p| p[0].signum() != p[1].signum())
            .count();
        let tail = &ws[ws.len() - 1000..];
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let amp = 0.5 * (hi - lo);
        let need = tau / (2.0 * (beta - 1.0));
        ensure(
            flips >= 100,
            format!("tau={tau}: only {flips} sign changes"),
        )?;
        ensure(
            amp >= need,
            format!("tau={tau}: amplitude {amp:.3e} below {need:.3e}"),
        )?;
        summary.push(format!("tau={tau}: {flips} flips, amplitude {amp:.4}"));
    }
    Ok(summary.join("; "))
}

/// Closed-form duality gap against a numeric sup-inf.
fn c3() -> Outcome {
    let mut summary = Vec::new();
    for beta in [2.0, 3.0, 5.0] {
        let mut sup = f64::NEG_INFINITY;
        for i in 0..=20_000 {
            let w = -10.0 + 1e-3 * i as f64;
            let g = |x: f64| {
                let y = (w + 2.0 * beta * x) / (2.0 * (beta - 1.0));
                x * x - y * y + w * (x - y) + beta * (x - y) * (x - y)
            };
            sup = sup.max(argmin_1d(&g, -1.0, 1.0, 200, &[]).1);
        }
        let closed = prop1_duality_gap(beta).map_err(|e| e.to_string())?;
        ensure(
            (sup - closed).abs() <= 1e-3,
            format!("beta={beta}: numeric {sup:.6}, closed form {closed:.6}"),
        )?;
        summary.push(format!("beta={beta}: {sup:.6} vs {closed:.6}"));
    }
    Ok(summary.join("; "))
}

/// Period-two cycle when the last block is nonsmooth.
fn c4() -> Outcome {
    for beta in [2.0, 4.0] {
        let case = case_by_name("neg-abs", Some(beta)).map_err(|e| e.to_string())?;
        let mut opts = SolverOptions::default();
        opts.stop.max_iters = 1000;
        let sol = run(
            &case.problem,
            case.start.clone(),
            &case.order,
            &with_states(opts),
        )
        .map_err(|e| e.to_string())?;
        ensure(
            sol.trace.records.len() == 1000,
            format!(
                "beta={beta}: stopped after {} iterations",
                sol.trace.records.len()
            ),
        )?;
        for (k, s) in sol.trace.states.iter().enumerate() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let want = (sign * 2.0 / beta, 0.0, sign);
            let err = (s.x[0][0] - want.0)
                .abs()
                .max((s.y[0] - want.1).abs())
                .max((s.w[0] - want.2).abs());
            ensure(
                err <= 1e-14,
                format!("beta={beta}, k={k}: off the cycle by {err:.2e}"),
            )?;
        }
    }
    Ok("1000 iterations at beta 2 and 4 on the cycle".into())
}

/// Alternating primal order oscillates; a fixed order converges.
fn c5() -> Outcome {
    let beta = 4.0;
    let al = 1.0 / beta;
    let case = case_by_name("order-alt", Some(beta)).map_err(|e| e.to_string())?;
    let mut opts = SolverOptions::default();
    opts.stop.max_iters = 1000;
    let sol = run(
        &case.problem,
        case.start.clone(),
        &case.order,
        &with_states(opts.clone()),
    )
    .map_err(|e| e.to_string())?;
    for (k, s) in sol.trace.states.iter().enumerate() {
        let want = if k % 2 == 1 {
            (2.0 * al * (al - 1.0), -al, al - 1.0)
        } else {
            (-al, 2.0 * al * (al - 1.0), -al)
        };
        let err = (s.x[0][0] - want.0)
            .abs()
            .max((s.y[0] - want.1).abs())
            .max((s.w[0] - want.2).abs());
        ensure(
            err <= 1e-12,
            format!("k={k}: off the printed iterates by {err:.2e}"),
        )?;
    }
    let fixed = run(
        &case.problem,
        case.start.clone(),
        &UpdateOrder::CyclicFixed,
        &opts,
    )
    .map_err(|e| e.to_string())?;
    let hit = fixed
        .trace
        .records
        .iter()
        .position(|r| r.primal_residual <= 1e-8);
    let k = hit
        .ok_or_else(|| "fixed order did not reach residual 1e-8 in 1000 iterations".to_string())?
        + 1;
    Ok(format!(
        "{} alternating iterations on the printed pair; fixed order reaches 1e-8 at k={k}",
        sol.trace.records.len()
    ))
}

/// Image inclusion decided by least squares on a pseudo-inverse.
fn feasible_by_least_squares(p: &Problem) -> bool {
    let b = p.b_map().to_dense();
    let pinv = b.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
    p.a_maps().iter().all(|a| {
        let a = a.to_dense();
        (0..a.ncols()).all(|j| {
            let col = a.column(j).into_owned();
            (&b * (&pinv * &col) - &col).norm() <= 1e-9 * (1.0 + col.norm())
        })
    })
}

fn shipped_apps() -> Vec<Box<dyn Application>> {
    vec![
        Box::new(lasso()),
        Box::new(sphere()),
        Box::new(complementarity()),
        Box::new(decomposition()),
    ]
}

fn lasso() -> RegressionInstance {
    RegressionInstance::synthetic_lasso(20, 10, 1, 0.1, 42).expect("lasso instance")
}

fn sphere() -> CompactSetInstance {
    CompactSetInstance::distance_to(
        Vector::from_vec(vec![3.0, -4.0, 1.0]),
        CompactSet::Sphere { dim: 3 },
    )
    .expect("sphere instance")
}

fn complementarity() -> ComplementarityInstance {
    ComplementarityInstance::nearest_pair(
        Vector::from_vec(vec![1.0, -0.5, 2.0]),
        Vector::from_vec(vec![0.5, 1.0, -1.0]),
    )
    .expect("complementarity instance")
}

fn decomposition() -> DecompositionInstance {
    let v = DecompositionInstance::rank_one(5, 4, 10.0, 0.1, 1);
    DecompositionInstance::schatten(v, 1.0, 0.5).expect("decomposition instance")
}

/// The feasibility checker against an independent least-squares test.
fn c6() -> Outcome {
    let mut rows = Vec::new();
    for &name in CASE_NAMES {
        let Ok(case) = case_by_name(name, None) else {
            continue;
        };
        rows.push((name.to_string(), case.problem, case.order));
    }
    for app in shipped_apps() {
        let p = app.build_problem().map_err(|e| e.to_string())?;
        rows.push((app.name().to_string(), p, app.order()));
    }
    let mut failing = Vec::new();
    for (name, p, order) in &rows {
        let checker = check_assumption(p, order, Assumption::Feasibility).passed;
        let oracle = feasible_by_least_squares(p);
        ensure(
            checker == oracle,
            format!("{name}: checker says {checker}, least squares says {oracle}"),
        )?;
        if !checker {
            failing.push(name.as_str());
        }
    }
    ensure(
        failing == ["chen", "li-pong"],
        format!("failing set {failing:?}"),
    )?;
    Ok(format!(
        "{} instances agree; only chen and li-pong fail",
        rows.len()
    ))
}

struct AppRun {
    name: &'static str,
    problem: Problem,
    sol: Solution,
    app: Box<dyn Application>,
}

fn run_apps() -> Result<Vec<AppRun>, String> {
    shipped_apps()
        .into_iter()
        .map(|app| {
            let sol = app
                .solve(&with_states(app.default_options()))
                .map_err(|e| e.to_string())?;
            let problem = app.build_problem().map_err(|e| e.to_string())?;
            Ok(AppRun {
                name: app.name(),
                problem,
                sol,
                app,
            })
        })
        .collect()
}

/// `B^T w + grad h(y)`, written out per application.
fn dual_identity_residual(name: &str, s: &nadmm::State) -> f64 {
    match name {
        "regression" => {
            let inst = lasso();
            let n = inst.dim();
            (0..inst.num_blocks())
                .map(|j| {
                    let (a, b) = (&inst.designs[j], &inst.targets[j]);
                    let z = s.y.rows(j * n, n).into_owned();
                    (s.w.rows(j * n, n) + a.tr_mul(&(a * z - b))).norm_squared()
                })
                .sum::<f64>()
                .sqrt()
        }
        "compact" => (-&s.w + (&s.y - Vector::from_vec(vec![3.0, -4.0, 1.0]))).norm(),
        "complementarity" => {
            let target = Vector::from_vec(vec![1.0, -0.5, 2.0, 0.5, 1.0, -1.0]);
            (-&s.w + (&s.y - target) * 2.0).norm()
        }
        "decomposition" => (&s.w + &s.y * 2.0).norm(),
        _ => f64::NAN,
    }
}

/// Dual identity at every iterate of the four application runs.
fn c7(runs: &[AppRun]) -> Outcome {
    let mut summary = Vec::new();
    for r in runs {
        let worst = r.sol.trace.states[1..]
            .iter()
            .map(|s| dual_identity_residual(r.name, s))
            .fold(0.0, f64::max);
        ensure(
            worst <= 1e-8,
            format!("{}: max residual {worst:.2e}", r.name),
        )?;
        summary.push(format!("{} {worst:.1e}", r.name));
    }
    Ok(summary.join(", "))
}

/// Descent and subgradient monitors at ten times the descent threshold.
fn c8(runs: &[AppRun]) -> Outcome {
    let mut summary = Vec::new();
    for r in runs {
        let c = r.app.constants();
        let want =
            10.0 * beta_threshold(&r.problem.b_map().to_dense(), &c).map_err(|e| e.to_string())?;
        let beta = r.sol.state.beta;
        ensure(
            (beta - want).abs() <= 1e-9 * want,
            format!("{}: beta {beta} is not ten times the threshold", r.name),
        )?;
        let p2 = check_sufficient_descent(&r.sol.trace, 1.0);
        let c1 = p2.value.unwrap_or(0.0);
        ensure(p2.passed && c1 > 0.0, format!("{}: {}", r.name, p2.message))?;
        // Independent estimate over clearly informative steps.
        let mut prev = r
            .sol
            .trace
            .initial_lagrangian
            .ok_or("no initial Lagrangian")?;
        let mut est = f64::INFINITY;
        for rec in &r.sol.trace.records {
            let m = rec.delta_y * rec.delta_y + rec.delta_x.iter().map(|d| d * d).sum::<f64>();
            let drop = prev - rec.lagrangian;
            let scale = prev.abs().max(rec.lagrangian.abs()).max(1.0);
            ensure(
                drop >= -1e-9 * scale,
                format!(
                    "{}: Lagrangian rises by {:.2e} at k={}",
                    r.name, -drop, rec.k
                ),
            )?;
            if m > 1e-8 * scale {
                est = est.min(drop / m);
            }
            prev = rec.lagrangian;
        }
        ensure(
            est > 0.0,
            format!("{}: direct descent estimate {est:.3e}", r.name),
        )?;
        let p3 = check_subgradient_bound_trace(&r.problem, &r.sol.trace, Some(&c))
            .map_err(|e| e.to_string())?;
        ensure(p3.passed, format!("{}: {}", r.name, p3.message))?;
        summary.push(format!("{} C1={c1:.3}", r.name));
    }
    Ok(summary.join(", "))
}

fn mcp(x: f64, gamma: f64, lambda: f64) -> f64 {
    let a = x.abs();
    let inner = lambda * a - a * a / (2.0 * lambda);
    let tail = 0.5 * gamma * lambda * lambda;
    if a < gamma * lambda {
        inner
    } else if a > gamma * lambda {
        tail
    } else {
        inner.min(tail)
    }
}

fn scad(x: f64, gamma: f64, lambda: f64) -> f64 {
    let a = x.abs();
    if a <= lambda {
        lambda * a
    } else if a <= gamma * lambda {
        (2.0 * gamma * lambda * a - a * a - lambda * lambda) / (2.0 * (gamma - 1.0))
    } else {
        0.5 * (gamma + 1.0) * lambda * lambda
    }
}

fn zigzag(x: f64) -> f64 {
    if x <= 0.0 {
        -x
    } else if x <= 1.0 {
        2.0 * x
    } else {
        3.0 - x
    }
}

fn zigzag_handle() -> ProxHandle {
    let m = |v: &[f64]| Matrix::from_column_slice(v.len(), 1, v);
    let v = |v: &[f64]| Vector::from_column_slice(v);
    let pieces = vec![
        Piece::new(m(&[1.0]), v(&[0.0]), v(&[-1.0]), 0.0),
        Piece::new(m(&[-1.0, 1.0]), v(&[0.0, 1.0]), v(&[2.0]), 0.0),
        Piece::new(m(&[-1.0]), v(&[-1.0]), v(&[-1.0]), 3.0),
    ];
    ProxHandle::piecewise_linear(PiecewiseLinear::new(1, pieces).expect("valid pieces"))
}

/// Scalar proxes against grid search, and exact idempotence of projections.
fn c9() -> Outcome {
    let t0 = Instant::now();
    let (gamma_mcp, gamma_scad, lambda) = (3.0, 3.7, 1.0);
    type Penalty = Box<dyn Fn(f64) -> f64>;
    let mut suite: Vec<(String, ProxHandle, Penalty, Vec<f64>)> = vec![
        (
            "l1".into(),
            ProxHandle::l1(lambda),
            Box::new(move |x: f64| lambda * x.abs()),
            vec![0.0],
        ),
        (
            "mcp".into(),
            ProxHandle::mcp(gamma_mcp, lambda).unwrap(),
            Box::new(move |x| mcp(x, gamma_mcp, lambda)),
            vec![0.0, gamma_mcp * lambda, -gamma_mcp * lambda],
        ),
        (
            "scad".into(),
            ProxHandle::scad(gamma_scad, lambda).unwrap(),
            Box::new(move |x| scad(x, gamma_scad, lambda)),
            vec![0.0],
        ),
        (
            "piecewise".into(),
            zigzag_handle(),
            Box::new(zigzag),
            vec![0.0, 1.0],
        ),
    ];
    for q in [0.3, 0.5, 0.8, 1.0] {
        suite.push((
            format!("lq q={q}"),
            ProxHandle::lq(lambda, q).unwrap(),
            Box::new(move |x: f64| lambda * x.abs().powf(q)),
            vec![0.0],
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ties = 0;
    for (name, handle, pen, kinks) in &suite {
        for _ in 0..1000 {
            let v: f64 = rng.random_range(-5.0..5.0);
            let t: f64 = rng.random_range(0.05..2.0);
            let obj = |u: f64| pen(u) + (u - v) * (u - v) / (2.0 * t);
            let r = v.abs() + 5.0 * t + 5.0;
            let mut extra = kinks.clone();
            extra.push(v);
            let (u_grid, f_grid) = argmin_1d(&obj, -r, r, 20_000, &extra);
            let u = handle.prox(&Vector::from_element(1, v), t)[0];
            let f_prox = obj(u);
            if (u - u_grid).abs() <= 1e-6 {
                continue;
            }
            // Distinct minimizers with equal values are ties, where either answer is correct.
            if (f_prox - f_grid).abs() <= 1e-10 * (1.0 + f_grid.abs()) {
                ties += 1;
                continue;
            }
            return Err(format!(
                "{name}: v={v}, t={t}: prox {u} (value {f_prox}), grid {u_grid} (value {f_grid})"
            ));
        }
    }
    for _ in 0..1000 {
        let v = Vector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
        let b = proj_box_uniform(&v, -1.0, 1.0);
        ensure(
            proj_box_uniform(&b, -1.0, 1.0) == b,
            "box projection is not idempotent",
        )?;
        let s = proj_sphere(&v);
        ensure(proj_sphere(&s) == s, "sphere projection is not idempotent")?;
        let c = proj_complementarity(&v);
        ensure(
            proj_complementarity(&c) == c,
            "complementarity projection is not idempotent",
        )?;
        let pts: Vec<Vector> = (0..4)
            .map(|i| Vector::from_element(6, i as f64 - 1.5))
            .collect();
        let f = proj_finite_set(&v, &pts);
        ensure(
            proj_finite_set(&f, &pts) == f,
            "finite-set projection is not idempotent",
        )?;
        let m = Matrix::from_fn(5, 3, |_, _| rng.random_range(-3.0..3.0));
        let st = proj_stiefel(&m);
        let err = (proj_stiefel(&st) - &st).abs().max();
        ensure(
            err <= 1e-12,
            format!("Stiefel projection moves by {err:.2e}"),
        )?;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("runtime {secs:.1}s"))?;
    Ok(format!(
        "{} proxes x 1000 inputs ({ties} ties), 5 projections idempotent, {secs:.2}s",
        suite.len()
    ))
}

/// LASSO objective against plain proximal gradient.
fn c10() -> Outcome {
    let t0 = Instant::now();
    let inst = lasso();
    let sol = inst
        .solve(&inst.default_options())
        .map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let (a, b, lam) = (&inst.designs[0], &inst.targets[0], 0.1);
    let f = |x: &Vector| 0.5 * (a * x - b).norm_squared() + lam * x.abs().sum();
    let h = a.tr_mul(a);
    let atb = a.tr_mul(b);
    let lip = h.clone().symmetric_eigen().eigenvalues.max();
    let mut x = Vector::zeros(inst.dim());
    for _ in 0..100_000 {
        let v = &x - (&h * &x - &atb) / lip;
        x = v.map(|c| c.signum() * (c.abs() - lam / lip).max(0.0));
    }
    let (fa, fr) = (f(&sol.state.x[0]), f(&x));
    ensure(sol.converged, "ADMM did not converge")?;
    ensure(
        (fa - fr).abs() <= 1e-6,
        format!("ADMM {fa:.10}, reference {fr:.10}"),
    )?;
    ensure(secs < 5.0, format!("ADMM runtime {secs:.2}s"))?;
    Ok(format!(
        "objective {fa:.10} vs {fr:.10} in {} iterations, {secs:.2}s",
        sol.trace.records.len()
    ))
}

/// Running-best rate of the squared movement on the LASSO trace.
fn c11(runs: &[AppRun]) -> Outcome {
    let r = runs
        .iter()
        .find(|r| r.name == "regression")
        .ok_or("no LASSO run")?;
    let mut best = f64::INFINITY;
    let kb: Vec<f64> = r
        .sol
        .trace
        .records
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let a =
                rec.delta_y * rec.delta_y + rec.delta_x.iter().skip(1).map(|d| d * d).sum::<f64>();
            best = best.min(a);
            (i + 1) as f64 * best
        })
        .collect();
    ensure(
        kb.len() >= 1000,
        format!("trace has only {} records", kb.len()),
    )?;
    let lib = running_best_rates(&r.sol.trace, None).movement;
    let lib_check = check_running_best_decay(&lib, 10, 1000, 10.0);
    ensure(
        lib[9] == kb[9] && lib[999] == kb[999],
        "library rate sequence differs from direct computation",
    )?;
    let ratio = kb[9] / kb[999];
    ensure(
        ratio >= 10.0 && lib_check.passed,
        format!("k b_k drops only {ratio:.2}x"),
    )?;
    Ok(format!(
        "k b_k: {:.3e} at k=10, {:.3e} at k=1000 ({ratio:.1}x)",
        kb[9], kb[999]
    ))
}

/// Prox-regularity probe, with the returned gamma verified over all pairs.
fn c12() -> Outcome {
    let grid = default_gamma_grid();
    let line: Vec<Vector> = (0..10_000)
        .map(|i| Vector::from_element(1, -2.0 + 4.0 * i as f64 / 9999.0))
        .collect();
    let abs = probe_restricted_prox_regularity(&ProxHandle::l1(1.0), &line, 10.0, &grid)
        .map_err(|e| e.to_string())?;
    let g_abs = abs.value.ok_or("no gamma for |x|")?;
    ensure(g_abs.abs() <= 1e-9, format!("gamma for |x| is {g_abs}"))?;
    let m = 10.0;
    let rep = probe_restricted_prox_regularity(&ProxHandle::lq(1.0, 0.5).unwrap(), &line, m, &grid)
        .map_err(|e| e.to_string())?;
    let gamma = rep
        .value
        .filter(|g| g.is_finite())
        .ok_or_else(|| format!("no finite gamma: {}", rep.message))?;
    let xs: Vec<f64> = line.iter().map(|v| v[0]).collect();
    let f = |x: f64| x.abs().sqrt();
    let mut violations = 0usize;
    for &x in &xs {
        let d = 0.5 * x.signum() / x.abs().sqrt();
        if x == 0.0 || d.abs() > m {
            continue;
        }
        for &y in &xs {
            let slack = f(y) - f(x) - d * (y - x) + 0.5 * gamma * (y - x) * (y - x);
            if slack < -1e-12 * (1.0 + f(x) + f(y) + (d * (y - x)).abs()) {
                violations += 1;
            }
        }
    }
    ensure(
        violations == 0,
        format!("{violations} pairs violate the inequality at gamma {gamma:.3e}"),
    )?;
    Ok(format!(
        "|x|: gamma 0; sqrt|x|: gamma {gamma:.3e}, all 10^8 pairs satisfied"
    ))
}

fn main() {
    let report = |id: usize, title: &str, out: Outcome| -> bool {
        match out {
            Ok(msg) => {
                println!("PASS C{id:<2} {title}: {msg}");
                true
            }
            Err(msg) => {
                println!("FAIL C{id:<2} {title}: {msg}");
                false
            }
        }
    };
    let mut ok = true;
    ok &= report(
        1,
        "finite ADMM convergence on the two-variable example",
        c1(),
    );
    ok &= report(
        2,
        "multiplier oscillation of the method of multipliers",
        c2(),
    );
    ok &= report(3, "duality gap", c3());
    ok &= report(4, "period-two cycle with a nonsmooth last block", c4());
    ok &= report(5, "update-order sensitivity", c5());
    ok &= report(6, "feasibility checker", c6());
    match run_apps() {
        Ok(runs) => {
            ok &= report(7, "dual identity on the applications", c7(&runs));
            ok &= report(8, "descent and subgradient monitors", c8(&runs));
            ok &= report(9, "prox oracle suite", c9());
            ok &= report(10, "LASSO against proximal gradient", c10());
            ok &= report(11, "running-best rate on LASSO", c11(&runs));
        }
        Err(e) => {
            for (id, title) in [
                (7, "dual identity"),
                (8, "monitors"),
                (11, "running-best rate"),
            ] {
                ok &= report(id, title, Err(format!("application runs failed: {e}")));
            }
            ok &= report(9, "prox oracle suite", c9());
            ok &= report(10, "LASSO against proximal gradient", c10());
        }
    }
    ok &= report(12, "restricted prox-regularity probe", c12());
    if !ok {
        std::process::exit(1);
    }
}
