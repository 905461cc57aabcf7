use super::{dual_control_constant, ConstantsDecl, DiagnosticReport, DiagnosticsError};
use crate::engine::{Trace, TraceRecord};
use crate::linalg::Vector;
use crate::problem::{BlockId, Problem, State};

/// Squared movement of every primal block, `x_0` included.
fn full_movement(r: &TraceRecord) -> f64 {
    r.delta_x.iter().map(|d| d * d).sum::<f64>() + r.delta_y * r.delta_y
}

/// Movement measure of the subgradient bound: `|B dy| + sum_{i>=1} |A_i dx_i|`.
fn tail_movement(r: &TraceRecord) -> f64 {
    r.delta_y + r.delta_x.iter().skip(1).sum::<f64>()
}

/// Smallest squared movement, relative to the Lagrangian scale, at which a
/// step enters the descent-constant estimate. The rounding allowance
/// subtracted from each Lagrangian difference then lowers the estimate by
/// at most about `0.09`.
const INFORMATIVE: f64 = 1e-14;

/// Sufficient descent over the trailing `window` fraction of the trace.
///
/// For every step with non-negligible movement `m_k` the ratio
/// `(L_{k-1} - L_k + eta_k - rounding) / m_k` is formed and the smallest
/// one is reported as the estimate of `C_1`. Steps with negligible
/// movement must not increase the Lagrangian beyond rounding. The movement
/// includes `x_0`, so a cycle that keeps the Lagrangian flat while the
/// first block moves is caught.
pub fn check_sufficient_descent(trace: &Trace, window: f64) -> DiagnosticReport {
    const NAME: &str = "sufficient_descent";
    let recs = &trace.records;
    let n = recs.len();
    if n == 0 {
        return DiagnosticReport::new(NAME, 0.0, 0.0).with_message("empty trace: vacuous");
    }
    let take = ((window.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
    let start = n - take;
    let mut c1 = f64::INFINITY;
    let mut flat_violation = f64::INFINITY;
    let mut offenders = Vec::new();
    for k in start..n {
        let prev = if k == 0 {
            trace.initial_lagrangian
        } else {
            Some(recs[k - 1].lagrangian)
        };
        let Some(prev) = prev else { continue };
        let cur = recs[k].lagrangian;
        if !prev.is_finite() || !cur.is_finite() {
            offenders.push(recs[k].k);
            c1 = f64::NEG_INFINITY;
            continue;
        }
        let scale = 1f64.max(prev.abs()).max(cur.abs());
        let drop = prev - cur + recs[k].eta;
        let m = full_movement(&recs[k]);
        if m >= INFORMATIVE * scale {
            let ratio = (drop - 4.0 * f64::EPSILON * scale) / m;
            if ratio < 1e-12 {
                offenders.push(recs[k].k);
            }
            c1 = c1.min(ratio);
        } else {
            let slack = drop + 1e-9 * scale;
            if slack < 0.0 {
                offenders.push(recs[k].k);
            }
            flat_violation = flat_violation.min(slack);
        }
    }
    let vacuous = c1 == f64::INFINITY;
    let margin = if vacuous { 0.0 } else { c1 - 1e-12 }.min(if flat_violation < 0.0 {
        flat_violation
    } else {
        f64::INFINITY
    });
    let mut rep = DiagnosticReport::new(NAME, margin, 0.0).with_details(offenders);
    if vacuous {
        rep = rep.with_message("no step with non-negligible movement in the window");
    } else {
        rep = rep.with_value(c1).with_message(format!(
            "estimated C1 = {c1:.6e} over the last {take} iterations"
        ));
    }
    rep
}

/// Applies the per-block formula for a subgradient of the augmented
/// Lagrangian at `next`, valid when every block was minimized exactly:
/// for block `s`, `A_s^T (w+ - w) + beta A_s^T sum_{j after s} A_j dx_j`
/// plus the change of the coupling gradient, and `(w+ - w)/beta` for the
/// multiplier.
pub fn subgradient_norm(p: &Problem, prev: &State, next: &State, order: &[BlockId]) -> f64 {
    let beta = next.beta;
    let dw = &next.w - &prev.w;
    let mut total = (&dw / beta).norm_squared();
    for (i, &s) in order.iter().enumerate() {
        let map = p.map(s);
        let mut later = Vector::zeros(p.rows());
        for &j in &order[i + 1..] {
            later += p.map(j).apply(&(next.block(j) - prev.block(j)));
        }
        let mut d = map.apply_transpose(&(&dw + later * beta));
        if let Some(g) = p.coupling().filter(|g| g.involves(s)) {
            let mut mixed = prev.clone();
            for &j in &order[..=i] {
                *mixed.block_mut(j) = next.block(j).clone();
            }
            d += g.gradient(s, &next.x, &next.y) - g.gradient(s, &mixed.x, &mixed.y);
        }
        total += d.norm_squared();
    }
    total.sqrt()
}

/// `C_2 = sum_s (sigma_s beta + L_h mbar + sigma_s C + L_g mbar) + L_h mbar + C / beta`.
pub fn subgradient_bound_constant(
    p: &Problem,
    c: &ConstantsDecl,
    beta: f64,
) -> Result<f64, DiagnosticsError> {
    let cc = dual_control_constant(&p.b_map().to_dense(), c)?;
    let per_block: f64 = p
        .a_maps()
        .iter()
        .map(|a| {
            let s = a.sigma_max();
            s * beta + c.l_h * c.mbar + s * cc + c.l_g * c.mbar
        })
        .sum();
    Ok(per_block + c.l_h * c.mbar + cc / beta)
}

fn rounding_allowance(p: &Problem, s: &State) -> f64 {
    let size = 1.0 + s.w.norm() + s.y.norm() + s.x.iter().map(|x| x.norm()).sum::<f64>();
    let sig: f64 =
        1.0 + p.b_map().sigma_max() + p.a_maps().iter().map(|a| a.sigma_max()).sum::<f64>();
    64.0 * f64::EPSILON * s.beta.max(1.0) * size * sig
}

/// Subgradient bound for one step.
pub fn check_subgradient_bound(
    p: &Problem,
    prev: &State,
    next: &State,
    record: &TraceRecord,
    constants: Option<&ConstantsDecl>,
) -> Result<DiagnosticReport, DiagnosticsError> {
    let c = constants.ok_or_else(|| {
        DiagnosticsError::MissingConstants("subgradient bound needs L_h and mbar".into())
    })?;
    let c2 = subgradient_bound_constant(p, c, next.beta)?;
    let d = subgradient_norm(p, prev, next, &record.order);
    let rhs = c2 * tail_movement(record) + record.eta;
    Ok(
        DiagnosticReport::new("subgradient_bound", rhs - d, rounding_allowance(p, next))
            .with_value(d)
            .with_message(format!("|d| = {d:.6e}, bound = {rhs:.6e}, C2 = {c2:.6e}")),
    )
}

/// Subgradient bound at every iteration of a trace recorded with states.
pub fn check_subgradient_bound_trace(
    p: &Problem,
    trace: &Trace,
    constants: Option<&ConstantsDecl>,
) -> Result<DiagnosticReport, DiagnosticsError> {
    let c = constants.ok_or_else(|| {
        DiagnosticsError::MissingConstants("subgradient bound needs L_h and mbar".into())
    })?;
    if trace.states.len() != trace.records.len() + 1 {
        return Err(DiagnosticsError::InvalidInput(
            "trace was recorded without states".into(),
        ));
    }
    let mut worst = f64::INFINITY;
    let mut worst_tol = 0.0;
    let mut offenders = Vec::new();
    let mut c2 = 0.0;
    for (i, rec) in trace.records.iter().enumerate() {
        let rep = check_subgradient_bound(p, &trace.states[i], &trace.states[i + 1], rec, Some(c))?;
        if !rep.passed {
            offenders.push(rec.k);
        }
        if rep.margin + rep.tolerance < worst + worst_tol {
            worst = rep.margin;
            worst_tol = rep.tolerance;
        }
        c2 = subgradient_bound_constant(p, c, trace.states[i + 1].beta)?;
    }
    if trace.records.is_empty() {
        worst = 0.0;
    }
    let mut rep = DiagnosticReport::new("subgradient_bound", worst, worst_tol)
        .with_value(c2)
        .with_details(offenders);
    rep.passed = rep.details.is_empty();
    Ok(rep.with_message(format!(
        "C2 = {c2:.6e}, {} iterations checked",
        trace.records.len()
    )))
}

/// `b_k = min_{i<=k} a_i`.
pub fn running_best(a: &[f64]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    a.iter()
        .map(|&v| {
            best = best.min(v);
            best
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunningBestRates {
    /// `k * b_k` for the squared movement `|B dy|^2 + sum_{i>=1} |A_i dx_i|^2`.
    pub movement: Vec<f64>,
    /// `sqrt(k) * b_k` for the subgradient norm; empty without states.
    pub subgradient: Vec<f64>,
}

pub fn running_best_rates(trace: &Trace, problem: Option<&Problem>) -> RunningBestRates {
    let a: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.delta_y * r.delta_y + r.delta_x.iter().skip(1).map(|d| d * d).sum::<f64>())
        .collect();
    let movement = running_best(&a)
        .iter()
        .enumerate()
        .map(|(i, b)| (i + 1) as f64 * b)
        .collect();
    let subgradient = match problem {
        Some(p) if trace.states.len() == trace.records.len() + 1 => {
            let d: Vec<f64> = trace
                .records
                .iter()
                .enumerate()
                .map(|(i, r)| subgradient_norm(p, &trace.states[i], &trace.states[i + 1], &r.order))
                .collect();
            running_best(&d)
                .iter()
                .enumerate()
                .map(|(i, b)| ((i + 1) as f64).sqrt() * b)
                .collect()
        }
        _ => Vec::new(),
    };
    RunningBestRates {
        movement,
        subgradient,
    }
}

/// Passes when the scaled sequence drops by `factor` between the 1-based
/// indices `k_lo` and `k_hi` (or reaches exactly zero).
pub fn check_running_best_decay(
    seq: &[f64],
    k_lo: usize,
    k_hi: usize,
    factor: f64,
) -> DiagnosticReport {
    const NAME: &str = "running_best_rate";
    if seq.is_empty() || k_lo == 0 || k_hi > seq.len() || k_lo > k_hi {
        return DiagnosticReport::new(NAME, f64::NEG_INFINITY, 0.0)
            .with_message("sequence too short");
    }
    let (lo, hi) = (seq[k_lo - 1], seq[k_hi - 1]);
    let margin = if hi == 0.0 { 0.0 } else { lo / factor - hi };
    let ratio = if hi == 0.0 { f64::INFINITY } else { lo / hi };
    DiagnosticReport::new(NAME, margin, 0.0)
        .with_value(ratio)
        .with_message(format!("k*b_k: {lo:.3e} at k={k_lo}, {hi:.3e} at k={k_hi}"))
}

/// `|w^{k+1} - w^k| <= C |B (y^{k+1} - y^k)|` at every iteration.
pub fn check_dual_control(trace: &Trace, c: f64, tol: f64) -> DiagnosticReport {
    let mut worst = f64::INFINITY;
    let mut offenders = Vec::new();
    for r in &trace.records {
        let m = c * r.delta_y + tol - r.dual_delta;
        if m < 0.0 {
            offenders.push(r.k);
        }
        worst = worst.min(m);
    }
    if trace.records.is_empty() {
        worst = 0.0;
    }
    let msg = format!(
        "C = {c:.6e}, worst margin {worst:.3e}, {} of {} iterations violate",
        offenders.len(),
        trace.records.len()
    );
    DiagnosticReport::new("dual_control", worst, 0.0)
        .with_value(c)
        .with_details(offenders)
        .with_message(msg)
}
