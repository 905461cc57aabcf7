//! CSV traces. Row `k = 0` describes the start point; rows `k >= 1` are
//! engine iterations. The `delta_x_i` columns are numbered from 1, so
//! `delta_x_1` is the first block `x_0`. Floats carry 17 significant digits
//! and round-trip exactly.

use crate::CliError;
use nadmm::diagnostics::check_dual_identity;
use nadmm::{Problem, State, Trace, TraceRecord};
use std::io::Write;
use std::path::Path;

pub fn header(num_x: usize) -> Vec<String> {
    let mut h: Vec<String> = ["k", "L_beta", "primal_residual", "delta_y"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=num_x).map(|i| format!("delta_x_{i}")));
    h.extend(
        ["dual_delta", "dual_identity_err", "eta_k"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(rec: &TraceRecord) -> Vec<String> {
    let mut r = vec![
        rec.k.to_string(),
        fmt(rec.lagrangian),
        fmt(rec.primal_residual),
        fmt(rec.delta_y),
    ];
    r.extend(rec.delta_x.iter().map(|&d| fmt(d)));
    r.extend([
        fmt(rec.dual_delta),
        fmt(rec.dual_identity_err),
        fmt(rec.eta),
    ]);
    r
}

/// The start point as a `k = 0` record with zero movement.
pub fn start_record(p: &Problem, s: &State, trace: &Trace) -> TraceRecord {
    let dual = check_dual_identity(p, s, 0.0).value.unwrap_or(f64::NAN);
    TraceRecord {
        k: 0,
        lagrangian: trace.initial_lagrangian.unwrap_or(f64::NAN),
        primal_residual: p.residual(&s.x, &s.y).norm(),
        delta_x: vec![0.0; p.num_x()],
        delta_y: 0.0,
        dual_delta: 0.0,
        dual_identity_err: dual,
        eta: 0.0,
        order: Vec::new(),
        block_lagrangians: Vec::new(),
        notes: Vec::new(),
    }
}

pub fn write_trace<W: Write>(
    out: W,
    p: &Problem,
    start: &State,
    trace: &Trace,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Csv(e.to_string());
    w.write_record(header(p.num_x())).map_err(csv_err)?;
    w.write_record(row(&start_record(p, start, trace)))
        .map_err(csv_err)?;
    for rec in &trace.records {
        w.write_record(row(rec)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Csv(e.to_string()))
}

pub fn write_trace_file(
    path: &Path,
    p: &Problem,
    start: &State,
    trace: &Trace,
) -> Result<(), CliError> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_trace(std::io::BufWriter::new(f), p, start, trace)
}

/// Reads a trace back. The `k = 0` row, when present, supplies the initial
/// Lagrangian. A trace without iteration rows is an error.
pub fn read_trace(path: &Path) -> Result<Trace, CliError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::io(path, std::io::Error::other(e.to_string())),
        _ => CliError::Csv(e.to_string()),
    })?;
    let head = rd
        .headers()
        .map_err(|e| CliError::Csv(e.to_string()))?
        .clone();
    let ncols = head.len();
    if ncols < 8
        || head
            .iter()
            .take(4)
            .ne(["k", "L_beta", "primal_residual", "delta_y"])
    {
        return Err(CliError::Csv(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let num_x = ncols - 7;
    if head.iter().collect::<Vec<_>>() != header(num_x) {
        return Err(CliError::Csv(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut trace = Trace::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Csv(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::Csv(format!("row {}: column {i}: {e}", line + 2)))
        };
        let k: usize = rec[0]
            .trim()
            .parse()
            .map_err(|e| CliError::Csv(format!("row {}: k: {e}", line + 2)))?;
        let r = TraceRecord {
            k,
            lagrangian: num(1)?,
            primal_residual: num(2)?,
            delta_y: num(3)?,
            delta_x: (0..num_x).map(|i| num(4 + i)).collect::<Result<_, _>>()?,
            dual_delta: num(4 + num_x)?,
            dual_identity_err: num(5 + num_x)?,
            eta: num(6 + num_x)?,
            order: Vec::new(),
            block_lagrangians: Vec::new(),
            notes: Vec::new(),
        };
        if k == 0 {
            trace.initial_lagrangian = r.lagrangian.is_finite().then_some(r.lagrangian);
        } else {
            trace.records.push(r);
        }
    }
    if trace.records.is_empty() {
        return Err(CliError::EmptyTrace(path.to_path_buf()));
    }
    Ok(trace)
}
