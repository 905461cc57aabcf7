//! Matrix proximal maps acting on singular values.

use super::scalar::prox_lq_scalar;
use crate::linalg::{Matrix, Vector};

/// Nearest matrix with orthonormal columns (`n x p`, `p <= n`): the polar
/// factor `U V^T` of the thin SVD. Directions belonging to zero singular
/// values are completed deterministically by Gram-Schmidt on the standard
/// basis, so rank-deficient inputs still land on the manifold.
pub fn proj_stiefel(m: &Matrix) -> Matrix {
    let (n, p) = m.shape();
    assert!(
        p <= n,
        "Stiefel projection needs at least as many rows as columns"
    );
    if p == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut q = Matrix::zeros(n, p);
    let mut filled = vec![false; p];
    let mut count = 0;
    for i in 0..p {
        if smax > 0.0 && svd.singular_values[i] > 1e-12 * smax {
            let mut c = u.column(i).clone_owned();
            for j in 0..count {
                let qj = q.column(j).clone_owned();
                c -= &qj * qj.dot(&c);
            }
            let nc = c.norm();
            if nc > 1e-8 {
                q.set_column(count, &(c / nc));
                filled[i] = true;
                count += 1;
            }
        }
    }
    // complete with standard basis vectors orthogonalized against the rest
    let mut e = 0;
    while count < p {
        let mut c = Vector::zeros(n);
        c[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for j in 0..count {
                let qj = q.column(j).clone_owned();
                c -= &qj * qj.dot(&c);
            }
        }
        let nc = c.norm();
        if nc > 1e-8 {
            q.set_column(count, &(c / nc));
            count += 1;
        }
    }
    // the kept columns came first; reorder V^T rows to match
    let mut order: Vec<usize> = (0..p).filter(|&i| filled[i]).collect();
    order.extend((0..p).filter(|&i| !filled[i]));
    let mut vt_sorted = Matrix::zeros(p, p);
    for (r, &i) in order.iter().enumerate() {
        vt_sorted.set_row(r, &vt.row(i));
    }
    q * vt_sorted
}

/// Prox of `lambda * sum_i sigma_i(X)^q`: the scalar l_q prox applied to
/// each singular value.
pub fn prox_schatten_q(m: &Matrix, t: f64, lambda: f64, q: f64) -> Matrix {
    if m.iter().all(|&x| x == 0.0) {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let s = svd.singular_values.map(|s| prox_lq_scalar(s, t, lambda, q));
    u * Matrix::from_diagonal(&s) * vt
}

/// `lambda * sum_i sigma_i(X)^q`. Singular values below the numerical-rank
/// cutoff `max(rows, cols) * eps * sigma_max` count as zero: for `q < 1` the
/// rounding noise left in a reconstructed low-rank matrix would otherwise add
/// terms of order `sqrt(eps)`.
pub fn schatten_q_value(m: &Matrix, lambda: f64, q: f64) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let cutoff = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * s.max();
    lambda
        * s.iter()
            .filter(|&&x| x > cutoff)
            .map(|x| x.powf(q))
            .sum::<f64>()
}
