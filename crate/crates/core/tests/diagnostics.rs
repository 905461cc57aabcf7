use nadmm::diagnostics::{
    beta_threshold, check_dual_control, check_dual_identity, check_running_best_decay,
    check_subgradient_bound, check_subgradient_bound_trace, check_sufficient_descent,
    default_gamma_grid, dual_control_constant, probe_restricted_prox_regularity, running_best,
    running_best_rates, ConstantsDecl, DiagnosticsError,
};
use nadmm::gallery::{case_by_name, prop1_admm_case};
use nadmm::prox::FunctionClass;
use nadmm::{run, Matrix, ProxHandle, SolverOptions, Vector};

fn recorded(iters: usize) -> SolverOptions {
    let mut o = SolverOptions {
        record_states: true,
        ..Default::default()
    };
    o.stop.max_iters = iters;
    o
}

#[test]
fn cycle_fails_sufficient_descent() {
    let case = case_by_name("neg-abs", None).unwrap();
    let sol = run(
        &case.problem,
        case.start.clone(),
        &case.order,
        &recorded(50),
    )
    .unwrap();
    let rep = check_sufficient_descent(&sol.trace, 1.0);
    assert!(!rep.passed, "{}", rep.message);
    assert!(!rep.details.is_empty());
}

#[test]
fn prop1_passes_both_monitors() {
    let case = prop1_admm_case(8.0, 1.5, -3.0).unwrap();
    let sol = run(
        &case.problem,
        case.start.clone(),
        &case.order,
        &recorded(20),
    )
    .unwrap();
    assert!(check_sufficient_descent(&sol.trace, 1.0).passed);
    let c = ConstantsDecl::new(0.0, 2.0, 1.0);
    let rep = check_subgradient_bound_trace(&case.problem, &sol.trace, Some(&c)).unwrap();
    assert!(rep.passed, "{}", rep.message);
    for s in &sol.trace.states[1..] {
        assert!(check_dual_identity(&case.problem, s, 1e-12).passed);
    }
}

#[test]
fn subgradient_bound_needs_constants_and_states() {
    let case = prop1_admm_case(8.0, 1.5, -3.0).unwrap();
    let sol = run(&case.problem, case.start.clone(), &case.order, &recorded(5)).unwrap();
    let (s0, s1) = (&sol.trace.states[0], &sol.trace.states[1]);
    let err =
        check_subgradient_bound(&case.problem, s0, s1, &sol.trace.records[0], None).unwrap_err();
    assert!(matches!(err, DiagnosticsError::MissingConstants(_)));
    let mut trimmed = sol.trace.clone();
    trimmed.states.clear();
    let c = ConstantsDecl::new(0.0, 2.0, 1.0);
    assert!(matches!(
        check_subgradient_bound_trace(&case.problem, &trimmed, Some(&c)),
        Err(DiagnosticsError::InvalidInput(_))
    ));
}

#[test]
fn beta_threshold_scales_with_curvature() {
    let b = Matrix::identity(2, 2);
    let lo = beta_threshold(&b, &ConstantsDecl::new(0.0, 1.0, 1.0)).unwrap();
    let hi = beta_threshold(&b, &ConstantsDecl::new(0.0, 4.0, 1.0)).unwrap();
    assert!(lo > 0.0 && hi > lo);
    assert!(matches!(
        beta_threshold(&Matrix::zeros(2, 2), &ConstantsDecl::new(0.0, 1.0, 1.0)),
        Err(DiagnosticsError::DegenerateB)
    ));
}

#[test]
fn dual_control_holds_on_prop1() {
    let case = prop1_admm_case(8.0, 2.5, -5.0).unwrap();
    let sol = run(
        &case.problem,
        case.start.clone(),
        &case.order,
        &recorded(20),
    )
    .unwrap();
    let c = dual_control_constant(
        &case.problem.b_map().to_dense(),
        &ConstantsDecl::new(0.0, 2.0, 1.0),
    )
    .unwrap();
    let rep = check_dual_control(&sol.trace, c, 1e-12);
    assert!(rep.passed, "{}", rep.message);
}

#[test]
fn running_best_sequences() {
    assert_eq!(
        running_best(&[3.0, 1.0, 2.0, 0.5]),
        vec![3.0, 1.0, 1.0, 0.5]
    );
    let seq: Vec<f64> = (1..=1000).map(|k| 1.0 / (k as f64).sqrt()).collect();
    assert!(check_running_best_decay(&seq, 10, 1000, 9.0).passed);
    assert!(!check_running_best_decay(&seq, 10, 1000, 11.0).passed);
    assert!(!check_running_best_decay(&seq, 10, 2000, 2.0).passed);

    let case = prop1_admm_case(8.0, 1.5, -3.0).unwrap();
    let sol = run(
        &case.problem,
        case.start.clone(),
        &case.order,
        &recorded(20),
    )
    .unwrap();
    let rates = running_best_rates(&sol.trace, Some(&case.problem));
    assert_eq!(rates.movement.len(), sol.trace.records.len());
    assert_eq!(rates.subgradient.len(), sol.trace.records.len());
    assert!(running_best_rates(&sol.trace, None).subgradient.is_empty());
}

#[test]
fn probe_needs_a_subgradient_sampler() {
    let f = ProxHandle::from_fn(
        "opaque",
        FunctionClass::LowerSemicontinuous,
        |u: &Vector| u.norm(),
        |v: &Vector, _| v.clone(),
    );
    let samples = vec![Vector::zeros(1), Vector::from_element(1, 1.0)];
    let err =
        probe_restricted_prox_regularity(&f, &samples, 1.0, &default_gamma_grid()).unwrap_err();
    assert!(matches!(err, DiagnosticsError::NoSubgradientSampler(_)));
    assert!(probe_restricted_prox_regularity(
        &ProxHandle::l1(1.0),
        &[],
        1.0,
        &default_gamma_grid()
    )
    .is_err());
}

#[test]
fn smaller_bound_never_needs_larger_gamma() {
    let f = ProxHandle::lq(1.0, 0.5).unwrap();
    let samples: Vec<Vector> = (0..400)
        .map(|i| Vector::from_element(1, -2.0 + 4.0 * i as f64 / 399.0))
        .collect();
    let g = |m: f64| {
        probe_restricted_prox_regularity(&f, &samples, m, &default_gamma_grid())
            .unwrap()
            .value
            .unwrap()
    };
    assert!(g(2.0) <= g(10.0));
}
