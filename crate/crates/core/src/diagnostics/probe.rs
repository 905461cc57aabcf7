use super::{DiagnosticReport, DiagnosticsError};
use crate::linalg::Vector;
use crate::prox::ProxHandle;

/// `0` followed by a geometric grid from `1e-6` to `1e8`, four points per decade.
pub fn default_gamma_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((0..=56).map(|i| 10f64.powf(-6.0 + i as f64 * 0.25)));
    g
}

/// Budget of `(x, y)` pairs; every sample is paired with at least 100 others.
const MAX_PAIRS: usize = 100_000_000;

/// Empirical restricted prox-regularity probe.
///
/// For every sample `x` with a subgradient `d` of norm at most `m`, and for
/// partner samples `y` (all of them when the pair budget allows, otherwise
/// a deterministic stride through the list), the smallest `gamma` with
/// `f(y) >= f(x) + <d, y - x> - gamma/2 |y - x|^2` is computed. The result
/// is the smallest grid value covering the largest requirement. Samples
/// whose subgradient set within the bound is empty are excluded, which is
/// how the restriction to bounded subgradients enters.
pub fn probe_restricted_prox_regularity(
    f: &ProxHandle,
    samples: &[Vector],
    m: f64,
    gamma_grid: &[f64],
) -> Result<DiagnosticReport, DiagnosticsError> {
    const NAME: &str = "prox_regularity";
    if samples.is_empty() || gamma_grid.is_empty() {
        return Err(DiagnosticsError::InvalidInput(
            "probe needs samples and a gamma grid".into(),
        ));
    }
    let n = samples.len();
    let partners = (MAX_PAIRS / n).clamp(100.min(n), n);
    let stride = n.div_ceil(partners).max(1);
    let fvals: Vec<f64> = samples.iter().map(|y| f.value(y)).collect();
    let mut required = 0.0f64;
    let mut worst_pair = (0usize, 0usize);
    let mut used = 0usize;
    for (i, x) in samples.iter().enumerate() {
        let fx = fvals[i];
        if !fx.is_finite() {
            continue;
        }
        let subgrads = f
            .bounded_subgradients(x, m)
            .ok_or_else(|| DiagnosticsError::NoSubgradientSampler(f.name()))?;
        if subgrads.is_empty() {
            continue;
        }
        used += 1;
        // Offset the stride by the sample index so each x sees different partners.
        for j in (0..partners).map(|t| (i + 1 + t * stride) % n) {
            if j == i {
                continue;
            }
            let y = &samples[j];
            let fy = fvals[j];
            if !fy.is_finite() {
                continue;
            }
            let diff = y - x;
            let dist2 = diff.norm_squared();
            if dist2 == 0.0 {
                continue;
            }
            for d in &subgrads {
                let lin = d.dot(&diff);
                let num = fx + lin - fy;
                let noise = 8.0 * f64::EPSILON * (fx.abs() + fy.abs() + d.norm() * diff.norm());
                if num <= noise {
                    continue;
                }
                let req = 2.0 * num / dist2;
                if req > required {
                    required = req;
                    worst_pair = (i, j);
                }
            }
        }
    }
    let chosen = gamma_grid
        .iter()
        .copied()
        .filter(|&g| g >= required)
        .fold(f64::INFINITY, f64::min);
    let base = DiagnosticReport::new(NAME, if chosen.is_finite() { 0.0 } else { -required }, 0.0)
        .with_details(vec![worst_pair.0, worst_pair.1]);
    Ok(if chosen.is_finite() {
        base.with_value(chosen)
            .with_message(format!("gamma = {chosen:.3e} (required {required:.3e}, {used} points with bounded subgradients)"))
    } else {
        base.with_message(format!("required gamma {required:.3e} exceeds the grid"))
    })
}
