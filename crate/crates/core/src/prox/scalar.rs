//! Separable scalar proximal maps: l1, l_q (0 < q <= 1), MCP and SCAD.
//!
//! The nonconvex maps are computed by finite candidate enumeration: every
//! branch contributes its stationary point (clamped to the branch) and its
//! endpoints, zero is always a candidate, and the candidate with the lowest
//! prox objective wins. Because each penalty is even, the minimizer for
//! `v` is `sign(v)` times the minimizer for `|v|`.

use super::ProxError;
use crate::linalg::Vector;

pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

/// Elementwise soft-thresholding at `t * lambda`.
pub fn prox_l1(v: &Vector, t: f64, lambda: f64) -> Vector {
    assert!(t > 0.0, "prox step must be positive");
    v.map(|vi| soft_threshold(vi, t * lambda))
}

pub fn lq_value(x: f64, lambda: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        lambda * x.abs().powf(q)
    }
}

/// Global minimizer of `lambda |u|^q + (u - v)^2 / (2t)`.
///
/// On `u > 0` the stationarity equation `u + t lambda q u^(q-1) = |v|` has
/// its left side convex with a single minimum at
/// `u* = (t lambda q (1 - q))^(1/(2-q))`; the larger root (the local
/// minimizer) lies in `[u*, |v|]` and is found by safeguarded Newton.
/// It is then compared against `u = 0`; exact ties resolve to 0.
pub fn prox_lq_scalar(v: f64, t: f64, lambda: f64, q: f64) -> f64 {
    assert!(t > 0.0, "prox step must be positive");
    assert!(q > 0.0 && q <= 1.0, "q must lie in (0, 1]");
    if v == 0.0 || lambda == 0.0 {
        return v;
    }
    if q == 1.0 {
        return soft_threshold(v, t * lambda);
    }
    let a = v.abs();
    let kappa = t * lambda * q;
    let phi = |u: f64| u + kappa * u.powf(q - 1.0) - a;
    let dphi = |u: f64| 1.0 + kappa * (q - 1.0) * u.powf(q - 2.0);
    let u_star = (kappa * (1.0 - q)).powf(1.0 / (2.0 - q));
    if u_star >= a || phi(u_star) > 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (u_star, a);
    let mut u = a;
    for _ in 0..200 {
        let f = phi(u);
        if f > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = f / dphi(u);
        let mut next = u - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 4.0 * f64::EPSILON * u.max(f64::MIN_POSITIVE) {
            u = next;
            break;
        }
        u = next;
    }
    let obj_root = lambda * u.powf(q) + (u - a).powi(2) / (2.0 * t);
    let obj_zero = a * a / (2.0 * t);
    if obj_root < obj_zero {
        u.copysign(v)
    } else {
        0.0
    }
}

pub fn prox_lq(v: &Vector, t: f64, lambda: f64, q: f64) -> Vector {
    v.map(|vi| prox_lq_scalar(vi, t, lambda, q))
}

fn check_mcp(gamma: f64, lambda: f64) -> Result<(), ProxError> {
    if !(gamma > 0.0 && lambda > 0.0) || !gamma.is_finite() || !lambda.is_finite() {
        return Err(ProxError::InvalidParameter(format!(
            "MCP needs gamma > 0 and lambda > 0 (got gamma={gamma}, lambda={lambda})"
        )));
    }
    Ok(())
}

fn check_scad(gamma: f64, lambda: f64) -> Result<(), ProxError> {
    if !(gamma > 2.0 && lambda > 0.0) || !gamma.is_finite() || !lambda.is_finite() {
        return Err(ProxError::InvalidParameter(format!(
            "SCAD needs gamma > 2 and lambda > 0 (got gamma={gamma}, lambda={lambda})"
        )));
    }
    Ok(())
}

/// The minimax concave penalty in the form
/// `lambda |x| - x^2 / (2 lambda)` for `|x| <= gamma lambda` and
/// `gamma lambda^2 / 2` beyond.
///
/// Note the quadratic term divides by `2 lambda`; the usual literature MCP
/// divides by `2 gamma`. The two branches only meet continuously when
/// `gamma == lambda`, so at `|x| = gamma lambda` the lower of the two branch
/// values is used (the lower semicontinuous closure).
pub fn mcp_value(x: f64, gamma: f64, lambda: f64) -> f64 {
    let ax = x.abs();
    let edge = gamma * lambda;
    let inner = lambda * ax - ax * ax / (2.0 * lambda);
    let tail = 0.5 * gamma * lambda * lambda;
    if ax < edge {
        inner
    } else if ax > edge {
        tail
    } else {
        inner.min(tail)
    }
}

/// Smoothly clipped absolute deviation penalty (continuous form).
pub fn scad_value(x: f64, gamma: f64, lambda: f64) -> f64 {
    let ax = x.abs();
    if ax <= lambda {
        lambda * ax
    } else if ax <= gamma * lambda {
        (2.0 * gamma * lambda * ax - ax * ax - lambda * lambda) / (2.0 * (gamma - 1.0))
    } else {
        0.5 * (gamma + 1.0) * lambda * lambda
    }
}

/// Picks the candidate with the lowest objective; ties go to the smaller
/// magnitude.
fn best_candidate(a: f64, t: f64, penalty: impl Fn(f64) -> f64, candidates: &[f64]) -> f64 {
    let mut best = 0.0;
    let mut best_obj = penalty(0.0) + a * a / (2.0 * t);
    for &u in candidates {
        if !u.is_finite() || u < 0.0 {
            continue;
        }
        let obj = penalty(u) + (u - a).powi(2) / (2.0 * t);
        if obj < best_obj || (obj == best_obj && u < best) {
            best = u;
            best_obj = obj;
        }
    }
    best
}

pub fn prox_mcp_scalar(v: f64, t: f64, gamma: f64, lambda: f64) -> Result<f64, ProxError> {
    check_mcp(gamma, lambda)?;
    assert!(t > 0.0, "prox step must be positive");
    let a = v.abs();
    let edge = gamma * lambda;
    let mut cands = vec![edge, a.max(edge)];
    // inner branch: lambda - u/lambda + (u - a)/t = 0
    let denom = 1.0 - t / lambda;
    if denom != 0.0 {
        cands.push(((a - t * lambda) / denom).clamp(0.0, edge));
    }
    let u = best_candidate(a, t, |u| mcp_value(u, gamma, lambda), &cands);
    Ok(if u == 0.0 { 0.0 } else { u.copysign(v) })
}

pub fn prox_scad_scalar(v: f64, t: f64, gamma: f64, lambda: f64) -> Result<f64, ProxError> {
    check_scad(gamma, lambda)?;
    assert!(t > 0.0, "prox step must be positive");
    let a = v.abs();
    let edge = gamma * lambda;
    let mut cands = vec![
        (a - t * lambda).clamp(0.0, lambda),
        lambda,
        edge,
        a.max(edge),
    ];
    // middle branch: (gamma lambda - u)/(gamma - 1) + (u - a)/t = 0
    let denom = 1.0 / t - 1.0 / (gamma - 1.0);
    if denom != 0.0 {
        let u = (a / t - edge / (gamma - 1.0)) / denom;
        cands.push(u.clamp(lambda, edge));
    }
    let u = best_candidate(a, t, |u| scad_value(u, gamma, lambda), &cands);
    Ok(if u == 0.0 { 0.0 } else { u.copysign(v) })
}

pub fn prox_mcp(v: &Vector, t: f64, gamma: f64, lambda: f64) -> Result<Vector, ProxError> {
    check_mcp(gamma, lambda)?;
    let mut out = v.clone();
    for x in out.iter_mut() {
        *x = prox_mcp_scalar(*x, t, gamma, lambda)?;
    }
    Ok(out)
}

pub fn prox_scad(v: &Vector, t: f64, gamma: f64, lambda: f64) -> Result<Vector, ProxError> {
    check_scad(gamma, lambda)?;
    let mut out = v.clone();
    for x in out.iter_mut() {
        *x = prox_scad_scalar(*x, t, gamma, lambda)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense grid over `[-r, r]` followed by golden-section refinement
    /// around the best grid point.
    fn grid_oracle(v: f64, t: f64, penalty: impl Fn(f64) -> f64) -> f64 {
        let obj = |u: f64| penalty(u) + (u - v).powi(2) / (2.0 * t);
        let r = 2.0 * v.abs() + 1.0;
        let n: usize = 4001;
        let h = 2.0 * r / (n - 1) as f64;
        let mut best = 0.0;
        let mut best_obj = obj(0.0);
        let mut best_i = (n - 1) / 2;
        for i in 0..n {
            let u = -r + h * i as f64;
            let o = obj(u);
            if o < best_obj {
                best = u;
                best_obj = o;
                best_i = i;
            }
        }
        let (mut lo, mut hi) = (
            -r + h * best_i.saturating_sub(1) as f64,
            -r + h * (best_i + 1) as f64,
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if obj(m1) <= obj(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        for u in [lo, hi, 0.5 * (lo + hi)] {
            if obj(u) < best_obj {
                best = u;
                best_obj = obj(u);
            }
        }
        best
    }

    #[test]
    fn l1_examples() {
        let p = |v: f64| prox_l1(&Vector::from_element(1, v), 1.0, 1.0)[0];
        assert_eq!(p(3.0), 2.0);
        assert_eq!(p(0.5), 0.0);
        assert_eq!(prox_l1(&Vector::zeros(3), 0.7, 2.0), Vector::zeros(3));
        let oracle = grid_oracle(3.0, 1.0, |u| u.abs());
        assert!((oracle - 2.0).abs() < 1e-6);
        assert!(grid_oracle(0.5, 1.0, |u| u.abs()).abs() < 1e-6);
    }

    #[test]
    fn lq_reduces_to_l1_and_zero() {
        assert_eq!(prox_lq_scalar(3.0, 1.0, 1.0, 1.0), 2.0);
        assert_eq!(prox_lq_scalar(0.0, 0.3, 2.0, 0.5), 0.0);
    }

    #[test]
    fn lq_half_matches_fine_grid() {
        // exhaustive grid over [0, 2] at step 1e-7
        let obj = |u: f64| u.sqrt() + (u - 2.0).powi(2) / 2.0;
        let mut best = 0.0;
        let mut best_obj = obj(0.0);
        let n = 20_000_000usize;
        for i in 0..=n {
            let u = 2.0 * i as f64 / n as f64;
            let o = obj(u);
            if o < best_obj {
                best_obj = o;
                best = u;
            }
        }
        let p = prox_lq_scalar(2.0, 1.0, 1.0, 0.5);
        assert!((p - best).abs() <= 1e-6, "prox {p} vs grid {best}");
    }

    #[test]
    fn mcp_scad_examples() {
        assert_eq!(prox_mcp_scalar(0.0, 1.0, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(prox_scad_scalar(0.0, 1.0, 3.7, 1.0).unwrap(), 0.0);
        assert_eq!(prox_mcp_scalar(10.0, 1.0, 2.0, 1.0).unwrap(), 10.0);
        assert_eq!(prox_scad_scalar(10.0, 1.0, 3.7, 1.0).unwrap(), 10.0);
        let o = grid_oracle(10.0, 1.0, |u| mcp_value(u, 2.0, 1.0));
        assert!((o - 10.0).abs() < 1e-6);
        let o = grid_oracle(10.0, 1.0, |u| scad_value(u, 3.7, 1.0));
        assert!((o - 10.0).abs() < 1e-6);
    }

    #[test]
    fn mcp_jump_breaks_flat_tail_when_gamma_exceeds_lambda() {
        // gamma=2, lambda=1: the inner branch reaches 0 at |x|=2 while the
        // tail sits at 1, so v = gamma*lambda + t*lambda = 3 is pulled to 2.
        assert_eq!(prox_mcp_scalar(3.0, 1.0, 2.0, 1.0).unwrap(), 2.0);
        let o = grid_oracle(3.0, 1.0, |u| mcp_value(u, 2.0, 1.0));
        assert!((o - 2.0).abs() < 1e-6);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            prox_mcp_scalar(1.0, 1.0, 0.0, 1.0),
            Err(ProxError::InvalidParameter(_))
        ));
        assert!(matches!(
            prox_mcp_scalar(1.0, 1.0, 1.0, -1.0),
            Err(ProxError::InvalidParameter(_))
        ));
        assert!(matches!(
            prox_scad_scalar(1.0, 1.0, 2.0, 1.0),
            Err(ProxError::InvalidParameter(_))
        ));
        assert!(matches!(
            prox_scad(&Vector::zeros(2), 1.0, 3.0, 0.0),
            Err(ProxError::InvalidParameter(_))
        ));
    }

    #[test]
    fn negative_inputs_are_mirrored() {
        for &v in &[-3.0, -0.7, -10.0] {
            assert_eq!(
                prox_lq_scalar(v, 0.8, 1.0, 0.5),
                -prox_lq_scalar(-v, 0.8, 1.0, 0.5)
            );
            assert_eq!(
                prox_scad_scalar(v, 0.5, 3.7, 1.0).unwrap(),
                -prox_scad_scalar(-v, 0.5, 3.7, 1.0).unwrap()
            );
            assert_eq!(
                prox_mcp_scalar(v, 0.5, 2.0, 1.0).unwrap(),
                -prox_mcp_scalar(-v, 0.5, 2.0, 1.0).unwrap()
            );
        }
    }
}
