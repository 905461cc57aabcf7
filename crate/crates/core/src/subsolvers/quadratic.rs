use super::SubsolverError;
use crate::linalg::{Matrix, Vector};

/// Minimizer of `0.5 u^T Q u + c^T u` for symmetric positive semidefinite
/// `Q`. Positive definite systems go through Cholesky; singular ones fall
/// back to the minimum-norm solution from a symmetric eigendecomposition.
///
/// The second return value is `true` when `Q` was singular, i.e. the
/// returned point is one of many minimizers.
pub fn solve_quadratic_block_detailed(
    q: &Matrix,
    c: &Vector,
) -> Result<(Vector, bool), SubsolverError> {
    let n = q.nrows();
    if q.ncols() != n || c.len() != n {
        return Err(SubsolverError::NumericalBreakdown(format!(
            "shape mismatch: Q is {}x{}, c has length {}",
            q.nrows(),
            q.ncols(),
            c.len()
        )));
    }
    if n == 0 {
        return Ok((Vector::zeros(0), false));
    }
    let scale = q.amax().max(f64::MIN_POSITIVE);
    if (q - q.transpose()).amax() > 1e-10 * scale {
        return Err(SubsolverError::NumericalBreakdown(
            "Q is not symmetric".into(),
        ));
    }
    if let Some(chol) = q.clone().cholesky() {
        let l = chol.l_dirty();
        let diag: Vec<f64> = (0..n).map(|i| l[(i, i)]).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmin > 1e-7 * dmax {
            return Ok((chol.solve(&(-c)), false));
        }
    }
    let eig = q.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = 1e-12 * lmax.max(f64::MIN_POSITIVE);
    let mut u = Vector::zeros(n);
    let mut singular = false;
    for i in 0..n {
        let l = eig.eigenvalues[i];
        let vi = eig.eigenvectors.column(i);
        let coef = vi.dot(c);
        if l < -1e-10 * lmax.max(1.0) {
            return Err(SubsolverError::NumericalBreakdown(format!(
                "Q is indefinite (eigenvalue {l:.3e})"
            )));
        }
        if l <= cutoff {
            singular = true;
            if coef.abs() > 1e-9 * (1.0 + c.norm()) {
                return Err(SubsolverError::NumericalBreakdown(
                    "objective is unbounded below along a null direction of Q".into(),
                ));
            }
            continue;
        }
        u -= vi * (coef / l);
    }
    Ok((u, singular))
}

pub fn solve_quadratic_block(q: &Matrix, c: &Vector) -> Result<Vector, SubsolverError> {
    solve_quadratic_block_detailed(q, c).map(|(u, _)| u)
}
