//! Euclidean projections onto the constraint sets used by the examples.

use crate::linalg::Vector;

pub fn proj_box(v: &Vector, lo: &Vector, hi: &Vector) -> Vector {
    Vector::from_fn(v.len(), |i, _| v[i].clamp(lo[i], hi[i]))
}

pub fn proj_box_uniform(v: &Vector, lo: f64, hi: f64) -> Vector {
    v.map(|x| x.clamp(lo, hi))
}

/// Projection onto the unit sphere. Points already on the sphere (to a few
/// ulps) are returned unchanged so that the map is exactly idempotent; the
/// origin, where every sphere point is nearest, maps to `e_1`.
pub fn proj_sphere(v: &Vector) -> Vector {
    let n = v.norm();
    if n == 0.0 {
        let mut e = Vector::zeros(v.len());
        if !e.is_empty() {
            e[0] = 1.0;
        }
        return e;
    }
    if (n - 1.0).abs() <= 4.0 * v.len().max(1) as f64 * f64::EPSILON {
        return v.clone();
    }
    v / n
}

/// Projection onto `{(x, y) : x >= 0, y >= 0, x_i y_i = 0}` for the
/// stacked vector `[x; y]`. Per coordinate the nearest of `(x+, 0)` and
/// `(0, y+)` is chosen; ties keep `x`.
pub fn proj_complementarity(v: &Vector) -> Vector {
    assert!(v.len() % 2 == 0, "complementarity vectors stack two halves");
    let n = v.len() / 2;
    let mut out = Vector::zeros(2 * n);
    for i in 0..n {
        let (a, b) = (v[i], v[n + i]);
        let keep_x = (a.max(0.0) - a).powi(2) + b * b;
        let keep_y = a * a + (b.max(0.0) - b).powi(2);
        if keep_x <= keep_y {
            out[i] = a.max(0.0);
        } else {
            out[n + i] = b.max(0.0);
        }
    }
    out
}

/// Pairwise form of [`proj_complementarity`].
pub fn proj_complementarity_pair(a: &Vector, b: &Vector) -> (Vector, Vector) {
    assert_eq!(
        a.len(),
        b.len(),
        "complementarity halves must have equal length"
    );
    let n = a.len();
    let mut stacked = Vector::zeros(2 * n);
    stacked.rows_mut(0, n).copy_from(a);
    stacked.rows_mut(n, n).copy_from(b);
    let p = proj_complementarity(&stacked);
    (p.rows(0, n).into_owned(), p.rows(n, n).into_owned())
}

/// Nearest point of a finite set; ties go to the lowest index.
pub fn proj_finite_set(v: &Vector, points: &[Vector]) -> Vector {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (p - v).norm_squared();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    points[best].clone()
}
