use crate::config::RunConfig;
use crate::trace_csv::{read_trace, write_trace_file};
use crate::CliError;
use nadmm::diagnostics::{
    check_dual_control, check_running_best_decay, check_subgradient_bound_trace,
    check_sufficient_descent, running_best_rates, ConstantsDecl, DiagnosticReport,
};
use nadmm::gallery::{case_by_name, default_beta, prop1_alm_oracle, ExpectedBehavior};
use nadmm::linalg::lambda_min_positive;
use nadmm::{run, SolverOptions, State, UpdateOrder};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Reads `NADMM_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var("NADMM_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::InvalidSeed(s)),
        Err(_) => Ok(None),
    }
}

fn line(out: &mut dyn Write, text: String) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub beta: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_primal_residual: f64,
    pub final_lagrangian: f64,
    /// Declared constants in the form `diagnose --constants` reads.
    pub constants: Option<DiagnoseConstants>,
    pub checks: Vec<DiagnosticReport>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs a config: writes the trace CSV and a JSON summary with the
/// descent check and, when constants are known, the subgradient check.
pub fn cmd_run(
    config_path: &Path,
    seed_override: Option<u64>,
    out: &mut dyn Write,
) -> Result<RunOutcome, CliError> {
    let cfg = RunConfig::load(config_path)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let prep = cfg.prepare(seed)?;
    let opts = SolverOptions {
        record_states: prep.constants.is_some(),
        ..prep.options.clone()
    };
    let sol = run(&prep.problem, prep.start.clone(), &prep.order, &opts)?;
    let (trace_path, summary_path) = cfg.output_paths(config_path);
    write_trace_file(&trace_path, &prep.problem, &prep.start, &sol.trace)?;

    let mut checks = vec![check_sufficient_descent(&sol.trace, 1.0)];
    if let Some(c) = &prep.constants {
        checks.push(check_subgradient_bound_trace(
            &prep.problem,
            &sol.trace,
            Some(c),
        )?);
    }
    let last = sol.trace.records.last();
    let summary = RunSummary {
        name: prep.name,
        seed,
        beta: prep.start.beta,
        converged: sol.converged,
        iterations: sol.trace.records.len(),
        final_primal_residual: last.map_or(f64::NAN, |r| r.primal_residual),
        final_lagrangian: last.map_or(f64::NAN, |r| r.lagrangian),
        constants: prep.constants.map(|c| DiagnoseConstants {
            l_g: c.l_g,
            l_h: c.l_h,
            mbar: c.mbar,
            sigma_min_b: lambda_min_positive(&prep.problem.b_map().to_dense()).map(f64::sqrt),
        }),
        checks,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Json(e.to_string()))?;
    std::fs::write(&summary_path, json + "\n").map_err(|e| CliError::io(&summary_path, e))?;

    line(
        out,
        format!(
            "{}: {} after {} iterations (beta = {}, residual {:.3e})",
            summary.name,
            if summary.converged {
                "converged"
            } else {
                "not converged"
            },
            summary.iterations,
            summary.beta,
            summary.final_primal_residual
        ),
    )?;
    for c in &summary.checks {
        line(
            out,
            format!("{} {}: {}", status(c.passed), c.check_name, c.message),
        )?;
    }
    line(out, format!("trace: {}", trace_path.display()))?;
    line(out, format!("summary: {}", summary_path.display()))?;
    Ok(RunOutcome {
        summary,
        trace_path,
        summary_path,
    })
}

fn max_deviation(a: &State, b: &State) -> f64 {
    let mut d = (&a.y - &b.y).amax().max((&a.w - &b.w).amax());
    for (u, v) in a.x.iter().zip(&b.x) {
        d = d.max((u - v).amax());
    }
    d
}

/// Runs a gallery case, compares it with its oracle, and reports the
/// assumption checks. Order-sensitive cases are also run with the fixed order.
pub fn cmd_gallery(
    name: &str,
    beta: Option<f64>,
    iters: usize,
    trace: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if name == "prop1-alm" {
        let b = beta.or(default_beta(name)).unwrap_or(2.0);
        let tau = 0.1;
        let ws = prop1_alm_oracle(b, tau, 1.0, iters)?;
        let flips = ws
            .windows(2)
            .filter(|p| p[0].signum() != p[1].signum())
            .count();
        let tail = &ws[ws.len().saturating_sub(1000)..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &w| {
                (l.min(w), h.max(w))
            });
        line(
            out,
            format!(
                "{name}: closed-form multiplier sequence only (beta = {b}, tau = {tau}, w0 = 1)"
            ),
        )?;
        line(out, format!("sign changes: {flips} in {iters} iterations"))?;
        line(out, format!("tail range: [{lo:.6}, {hi:.6}]"))?;
        return Ok(());
    }
    let case = case_by_name(name, beta)?;
    let mut opts = SolverOptions {
        record_states: case.oracle.is_some(),
        ..Default::default()
    };
    opts.stop.max_iters = iters;
    let sol = run(&case.problem, case.start.clone(), &case.order, &opts)?;
    let min_res = sol
        .trace
        .records
        .iter()
        .map(|r| r.primal_residual)
        .fold(f64::INFINITY, f64::min);
    let last_res = sol
        .trace
        .records
        .last()
        .map_or(f64::NAN, |r| r.primal_residual);
    line(
        out,
        format!(
            "{}: beta = {}, expected {:?}",
            case.name, case.start.beta, case.expected
        ),
    )?;
    line(
        out,
        format!(
            "engine: {} after {} iterations, final residual {last_res:.3e}, smallest residual {min_res:.3e}",
            if sol.converged { "converged" } else { "not converged" },
            sol.trace.records.len()
        ),
    )?;
    if let Some(oracle) = &case.oracle {
        let want = oracle(sol.trace.records.len());
        let dev = sol.trace.states[1..]
            .iter()
            .zip(&want)
            .map(|(a, b)| max_deviation(a, b))
            .fold(0.0, f64::max);
        line(
            out,
            format!("oracle: max componentwise deviation {dev:.3e}"),
        )?;
    }
    for (a, rep) in case.check_assumptions() {
        let verdict = if rep.passed { "holds" } else { "violated" };
        let msg = if rep.message.is_empty() {
            String::new()
        } else {
            format!(" ({})", rep.message)
        };
        line(out, format!("assumption {a}: {verdict}{msg}"))?;
    }
    if case.expected == ExpectedBehavior::OrderSensitive {
        let mut fixed_opts = SolverOptions::default();
        fixed_opts.stop.max_iters = iters;
        let fixed = run(
            &case.problem,
            case.start.clone(),
            &UpdateOrder::CyclicFixed,
            &fixed_opts,
        )?;
        line(
            out,
            format!(
                "fixed order: {} after {} iterations, final residual {:.3e}",
                if fixed.converged {
                    "converged"
                } else {
                    "not converged"
                },
                fixed.trace.records.len(),
                fixed
                    .trace
                    .records
                    .last()
                    .map_or(f64::NAN, |r| r.primal_residual)
            ),
        )?;
    }
    if let Some(path) = trace {
        write_trace_file(path, &case.problem, &case.start, &sol.trace)?;
        line(out, format!("trace: {}", path.display()))?;
    }
    Ok(())
}

/// Constants file for `diagnose`: the declared constants plus the smallest
/// positive singular value of `B`, which the dual-control check needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConstants {
    #[serde(default)]
    pub l_g: f64,
    pub l_h: f64,
    pub mbar: f64,
    pub sigma_min_b: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnoseOptions {
    /// Fraction of the trace, counted from the end, for the descent check.
    pub window: f64,
    pub rate_lo: usize,
    pub rate_hi: usize,
    pub rate_factor: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            window: 1.0,
            rate_lo: 10,
            rate_hi: 1000,
            rate_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagnoseOutcome {
    pub reports: Vec<DiagnosticReport>,
    pub report_path: PathBuf,
}

impl DiagnoseOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

/// Post-hoc checks on a CSV trace; the reports are written as JSON.
pub fn cmd_diagnose(
    trace_path: &Path,
    constants_path: Option<&Path>,
    report_path: Option<&Path>,
    opts: DiagnoseOptions,
    out: &mut dyn Write,
) -> Result<DiagnoseOutcome, CliError> {
    let trace = read_trace(trace_path)?;
    let mut reports = vec![check_sufficient_descent(&trace, opts.window)];
    let movement = running_best_rates(&trace, None).movement;
    if movement.len() >= opts.rate_hi {
        reports.push(check_running_best_decay(
            &movement,
            opts.rate_lo,
            opts.rate_hi,
            opts.rate_factor,
        ));
    } else {
        line(
            out,
            format!(
                "SKIP running_best_rate: {} iterations, fewer than {}",
                movement.len(),
                opts.rate_hi
            ),
        )?;
    }
    if let Some(path) = constants_path {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let c: DiagnoseConstants =
            toml::from_str(&text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        let decl = ConstantsDecl::new(c.l_g, c.l_h, c.mbar);
        decl.validate()?;
        let sigma = c.sigma_min_b.ok_or_else(|| {
            nadmm::diagnostics::DiagnosticsError::MissingConstants(
                "sigma_min_b (needed for dual control)".into(),
            )
        })?;
        if !(sigma > 0.0) {
            return Err(CliError::InvalidConfig(format!(
                "sigma_min_b must be positive, got {sigma}"
            )));
        }
        reports.push(check_dual_control(&trace, c.l_h * c.mbar / sigma, 1e-9));
    }
    let report_path = report_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| trace_path.with_extension("report.json"));
    let json = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Json(e.to_string()))?;
    std::fs::write(&report_path, json + "\n").map_err(|e| CliError::io(&report_path, e))?;
    for r in &reports {
        line(
            out,
            format!("{} {}: {}", status(r.passed), r.check_name, r.message),
        )?;
    }
    line(out, format!("report: {}", report_path.display()))?;
    Ok(DiagnoseOutcome {
        reports,
        report_path,
    })
}
