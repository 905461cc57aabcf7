use super::{SmoothHandle, SubsolveReport};
use crate::linalg::Vector;

/// Gradient descent with backtracking from `u0` until the gradient norm
/// drops below `tol`, the step collapses, or `max_iters` is reached.
///
/// The trial step doubles after every accepted step and halves until the
/// Armijo condition holds. The reported inexactness is
/// `|grad| * |u - u0|`, the first-order error this block contributes to
/// the change in the augmented Lagrangian.
pub fn smooth_block_descent(
    obj: &SmoothHandle,
    u0: &Vector,
    tol: f64,
    max_iters: usize,
) -> (Vector, SubsolveReport) {
    descend_with(
        |u| obj.value(u),
        |u| obj.gradient(u),
        obj.lipschitz(),
        u0,
        tol,
        max_iters,
    )
}

/// [`smooth_block_descent`] over borrowed closures.
pub fn descend_with(
    value: impl Fn(&Vector) -> f64,
    gradient: impl Fn(&Vector) -> Vector,
    lipschitz: f64,
    u0: &Vector,
    tol: f64,
    max_iters: usize,
) -> (Vector, SubsolveReport) {
    let l = lipschitz;
    let mut step = if l > 0.0 && l.is_finite() {
        1.0 / l
    } else {
        1.0
    };
    let mut u = u0.clone();
    let mut f = value(&u);
    let mut g = gradient(&u);
    let mut iters = 0;
    let mut converged = g.norm() <= tol;
    while !converged && iters < max_iters {
        iters += 1;
        let gn2 = g.norm_squared();
        let mut trial = step * 2.0;
        let mut accepted = None;
        // below this the value comparison is rounding noise
        let noise = 8.0 * f64::EPSILON * (1.0 + f.abs());
        for _ in 0..60 {
            let cand = &u - &g * trial;
            let fc = value(&cand);
            if fc <= f - 1e-4 * trial * gn2 {
                accepted = Some((cand, fc, None));
                break;
            }
            if fc <= f + noise {
                let gc = gradient(&cand);
                if gc.norm_squared() < gn2 {
                    accepted = Some((cand, fc, Some(gc)));
                    break;
                }
            }
            trial *= 0.5;
        }
        let Some((next, fnext, gnext)) = accepted else {
            break;
        };
        let moved = (&next - &u).amax();
        u = next;
        f = fnext;
        step = trial;
        g = gnext.unwrap_or_else(|| gradient(&u));
        converged = g.norm() <= tol;
        if moved == 0.0 {
            break;
        }
    }
    let grad_norm = g.norm();
    let report = SubsolveReport {
        achieved: grad_norm,
        iterations: iters,
        eta: grad_norm * (&u - u0).norm(),
        converged,
    };
    (u, report)
}
