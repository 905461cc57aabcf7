//! Dense linear algebra helpers and structured coupling maps.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A coupling matrix `A_i` (or `B`) with cheap special cases for the
/// identity-like maps that show up in consensus and splitting problems.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearMap {
    /// `scale * I` acting on `dim`-vectors.
    ScaledIdentity {
        dim: usize,
        scale: f64,
    },
    /// `scale * [I; I; ...; I]`: `copies` stacked identities of size `dim`.
    Stacked {
        dim: usize,
        copies: usize,
        scale: f64,
    },
    Dense(Matrix),
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        LinearMap::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn neg_identity(dim: usize) -> Self {
        LinearMap::ScaledIdentity { dim, scale: -1.0 }
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearMap::ScaledIdentity { dim, .. } => *dim,
            LinearMap::Stacked { dim, copies, .. } => dim * copies,
            LinearMap::Dense(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearMap::ScaledIdentity { dim, .. } | LinearMap::Stacked { dim, .. } => *dim,
            LinearMap::Dense(m) => m.ncols(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        match self {
            LinearMap::ScaledIdentity { scale, .. } => x * *scale,
            LinearMap::Stacked { dim, copies, scale } => {
                let mut out = Vector::zeros(dim * copies);
                for c in 0..*copies {
                    out.rows_mut(c * dim, *dim).copy_from(&(x * *scale));
                }
                out
            }
            LinearMap::Dense(m) => m * x,
        }
    }

    pub fn apply_transpose(&self, r: &Vector) -> Vector {
        match self {
            LinearMap::ScaledIdentity { scale, .. } => r * *scale,
            LinearMap::Stacked { dim, copies, scale } => {
                let mut out = Vector::zeros(*dim);
                for c in 0..*copies {
                    out += r.rows(c * dim, *dim);
                }
                out * *scale
            }
            LinearMap::Dense(m) => m.tr_mul(r),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            LinearMap::ScaledIdentity { dim, scale } => Matrix::identity(*dim, *dim) * *scale,
            LinearMap::Stacked { dim, copies, scale } => {
                let mut m = Matrix::zeros(dim * copies, *dim);
                for c in 0..*copies {
                    for j in 0..*dim {
                        m[(c * dim + j, j)] = *scale;
                    }
                }
                m
            }
            LinearMap::Dense(m) => m.clone(),
        }
    }

    /// `A^T A` as a dense matrix.
    pub fn gram(&self) -> Matrix {
        match self {
            LinearMap::ScaledIdentity { dim, scale } => {
                Matrix::identity(*dim, *dim) * (scale * scale)
            }
            LinearMap::Stacked { dim, copies, scale } => {
                Matrix::identity(*dim, *dim) * (scale * scale * *copies as f64)
            }
            LinearMap::Dense(m) => m.tr_mul(m),
        }
    }

    /// Returns `alpha > 0` when `A^T A = alpha I`, in which case a block
    /// subproblem with this coupling reduces to a proximal map.
    pub fn gram_scalar(&self) -> Option<f64> {
        match self {
            LinearMap::ScaledIdentity { scale, .. } if *scale != 0.0 => Some(scale * scale),
            LinearMap::Stacked { copies, scale, .. } if *scale != 0.0 && *copies > 0 => {
                Some(scale * scale * *copies as f64)
            }
            LinearMap::Dense(m) => {
                let g = m.tr_mul(m);
                let n = g.nrows();
                if n == 0 {
                    return None;
                }
                let alpha = g.diagonal().mean();
                if alpha <= 0.0 {
                    return None;
                }
                let dev = (g - Matrix::identity(n, n) * alpha).amax();
                (dev <= 1e-12 * alpha).then_some(alpha)
            }
            _ => None,
        }
    }

    pub fn sigma_max(&self) -> f64 {
        match self {
            LinearMap::ScaledIdentity { scale, .. } => scale.abs(),
            LinearMap::Stacked { copies, scale, .. } => scale.abs() * (*copies as f64).sqrt(),
            LinearMap::Dense(m) => singular_values(m).iter().cloned().fold(0.0, f64::max),
        }
    }
}

impl From<Matrix> for LinearMap {
    fn from(m: Matrix) -> Self {
        LinearMap::Dense(m)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with a singular-value threshold `rel_tol * sigma_max`.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Orthonormal basis of the column space, from the SVD.
pub fn range_basis(m: &Matrix, rel_tol: f64) -> Matrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Matrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut basis = Matrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &u.column(i));
    }
    basis
}

/// Residual of the least-squares projection of `b` onto `Im(m)`.
pub fn range_residual(m: &Matrix, b: &Vector) -> f64 {
    let basis = range_basis(m, 1e-12);
    let proj = &basis * basis.tr_mul(b);
    (b - proj).norm()
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Smallest strictly positive eigenvalue of `B^T B` (threshold
/// `1e-12 * lambda_max`), or `None` when `B = 0`.
pub fn lambda_min_positive(b: &Matrix) -> Option<f64> {
    let ev = sym_eigenvalues(&b.tr_mul(b));
    let lmax = ev.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return None;
    }
    ev.into_iter().find(|&l| l > 1e-12 * lmax)
}

/// Column-major reshape of a vector into a `rows x cols` matrix.
pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

pub fn vec_of(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stacked_matches_dense() {
        let e = LinearMap::Stacked {
            dim: 3,
            copies: 2,
            scale: -1.0,
        };
        let d = LinearMap::Dense(e.to_dense());
        let x = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(e.apply(&x), d.apply(&x));
        let r = Vector::from_fn(6, |i, _| i as f64);
        assert_eq!(e.apply_transpose(&r), d.apply_transpose(&r));
        assert_eq!(e.gram_scalar(), Some(2.0));
        assert!((d.gram_scalar().unwrap() - 2.0).abs() < 1e-15);
        assert!((e.sigma_max() - d.sigma_max()).abs() < 1e-12);
    }

    #[test]
    fn gram_scalar_rejects_non_orthogonal() {
        let a = LinearMap::Dense(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        assert_eq!(a.gram_scalar(), None);
        let col = LinearMap::Dense(Matrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]));
        assert!((col.gram_scalar().unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rank_and_range() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(rank(&m, 1e-10), 1);
        let b = Vector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(range_residual(&m, &b) < 1e-12);
        let off = Vector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(range_residual(&m, &off) > 0.1);
    }

    #[test]
    fn lambda_min_positive_skips_null_space() {
        let b = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(lambda_min_positive(&b), Some(4.0));
        assert_eq!(lambda_min_positive(&Matrix::zeros(2, 2)), None);
    }
}
