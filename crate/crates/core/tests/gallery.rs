use nadmm::gallery::{case_by_name, default_beta, two_abs_case, GalleryError, CASE_NAMES};
use nadmm::{run, SolverOptions, State, UpdateOrder};

fn opts(iters: usize) -> SolverOptions {
    let mut o = SolverOptions {
        record_states: true,
        ..Default::default()
    };
    o.stop.max_iters = iters;
    o
}

fn gap(a: &State, b: &State) -> f64 {
    let mut d = (&a.y - &b.y).amax().max((&a.w - &b.w).amax());
    for (u, v) in a.x.iter().zip(&b.x) {
        d = d.max((u - v).amax());
    }
    d
}

#[test]
fn engine_matches_every_oracle_for_100_iterations() {
    for &name in CASE_NAMES {
        let Ok(case) = case_by_name(name, None) else {
            continue;
        };
        let Some(oracle) = case.oracle.clone() else {
            continue;
        };
        let sol = run(&case.problem, case.start.clone(), &case.order, &opts(100)).unwrap();
        let want = oracle(sol.trace.records.len());
        for (k, (got, exp)) in sol.trace.states[1..].iter().zip(&want).enumerate() {
            assert!(
                gap(got, exp) <= 1e-12,
                "{name}: iterate {} off by {:.2e}",
                k + 1,
                gap(got, exp)
            );
        }
    }
}

#[test]
fn cycles_do_not_converge() {
    for name in ["neg-abs", "order-alt", "two-abs"] {
        let case = case_by_name(name, None).unwrap();
        let sol = run(&case.problem, case.start.clone(), &case.order, &opts(1000)).unwrap();
        assert!(!sol.converged, "{name}");
        let min_res = sol
            .trace
            .records
            .iter()
            .map(|r| r.primal_residual)
            .fold(f64::INFINITY, f64::min);
        assert!(min_res > 0.1, "{name}: residual reached {min_res}");
    }
}

#[test]
fn fixed_order_resolves_order_sensitive_cases() {
    for name in ["order-alt", "two-abs"] {
        let case = case_by_name(name, None).unwrap();
        let sol = run(
            &case.problem,
            case.start.clone(),
            &UpdateOrder::CyclicFixed,
            &opts(1000),
        )
        .unwrap();
        assert!(sol.converged, "{name}");
    }
    let case = two_abs_case(2.0).unwrap();
    let sol = run(
        &case.problem,
        case.start.clone(),
        &UpdateOrder::CyclicFixed,
        &opts(1000),
    )
    .unwrap();
    for v in [sol.state.x[0][0], sol.state.y[0], sol.state.w[0]] {
        assert!((v - 1.0).abs() < 1e-8, "{:?}", sol.state);
    }
}

#[test]
fn infeasible_cases_stay_infeasible() {
    let chen = case_by_name("chen", None).unwrap();
    let sol = run(&chen.problem, chen.start.clone(), &chen.order, &opts(1000)).unwrap();
    let min_res = sol
        .trace
        .records
        .iter()
        .map(|r| r.primal_residual)
        .fold(f64::INFINITY, f64::min);
    assert!(min_res >= 1e-3, "chen residual dropped to {min_res}");
    assert!(
        sol.trace.records.last().unwrap().primal_residual > 1e3,
        "chen should blow up"
    );

    let lp = case_by_name("li-pong", None).unwrap();
    let sol = run(&lp.problem, lp.start.clone(), &lp.order, &opts(1000)).unwrap();
    assert!(!sol.converged);
    assert!(sol.trace.records.iter().all(|r| r.primal_residual >= 0.5));
}

#[test]
fn prop1_converges_in_two_steps_at_default_beta() {
    let case = case_by_name("prop1-admm", None).unwrap();
    let sol = run(&case.problem, case.start.clone(), &case.order, &opts(100)).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.trace.records.len(), 2);
    assert!((sol.state.x[0][0] - 5.0 / 6.0).abs() < 1e-14);
}

#[test]
fn case_lookup_errors() {
    assert!(matches!(
        case_by_name("prop1-alm", None),
        Err(GalleryError::OracleOnly(_))
    ));
    assert!(matches!(
        case_by_name("nope", None),
        Err(GalleryError::UnknownCase(_))
    ));
    assert!(matches!(
        case_by_name("prop1-admm", Some(2.0)),
        Err(GalleryError::InvalidBeta(_))
    ));
    assert!(matches!(
        two_abs_case(0.5),
        Err(GalleryError::InvalidBeta(_))
    ));
    assert!(CASE_NAMES.iter().all(|n| default_beta(n).is_some()));
}
