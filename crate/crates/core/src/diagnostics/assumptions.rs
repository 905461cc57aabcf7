use super::{ConstantsDecl, DiagnosticReport, DiagnosticsError};
use crate::engine::UpdateOrder;
use crate::linalg::{lambda_min_positive, singular_values, Matrix};
use crate::problem::{BlockId, Problem, State};

fn normalized_columns(m: &Matrix) -> Vec<Vec<f64>> {
    m.column_iter()
        .filter_map(|c| {
            let n = c.norm();
            (n > 0.0).then(|| c.iter().map(|v| v / n).collect())
        })
        .collect()
}

/// Image inclusion `Im(A) ⊆ Im(B)`: passes when appending the columns of
/// every `A_i` to `B` does not raise the numerical rank. Columns are
/// normalized first so the decision does not depend on column scaling.
pub fn check_im_subset(a: &[Matrix], b: &Matrix, tol: f64) -> DiagnosticReport {
    let m = b.nrows();
    if let Some(i) = a.iter().position(|ai| ai.nrows() != m) {
        return DiagnosticReport::new("im_subset", -1.0, 0.0)
            .with_details(vec![i])
            .with_message(format!("A_{i} has {} rows, B has {m}", a[i].nrows()));
    }
    let b_cols = normalized_columns(b);
    let mut all_cols = b_cols.clone();
    for ai in a {
        all_cols.extend(normalized_columns(ai));
    }
    let to_matrix = |cols: &[Vec<f64>]| Matrix::from_fn(m, cols.len(), |r, c| cols[c][r]);
    let sb = singular_values(&to_matrix(&b_cols));
    let sab = singular_values(&to_matrix(&all_cols));
    let rank_of = |s: &[f64]| {
        let smax = s.first().copied().unwrap_or(0.0);
        s.iter().filter(|&&v| smax > 0.0 && v > tol * smax).count()
    };
    let (rb, rab) = (rank_of(&sb), rank_of(&sab));
    let smax = sab.first().copied().unwrap_or(0.0);
    let next = sab.get(rb).copied().unwrap_or(0.0);
    let margin = if rb == rab {
        (tol * smax - next).max(0.0)
    } else {
        tol * smax - next
    };
    DiagnosticReport::new("im_subset", margin, 0.0)
        .with_value((rab - rb) as f64)
        .with_message(format!("rank(B) = {rb}, rank([B | A]) = {rab}"))
}

/// The dual-control constant `L_h * mbar / sqrt(lambda_min_positive(B^T B))`.
pub fn dual_control_constant(b: &Matrix, c: &ConstantsDecl) -> Result<f64, DiagnosticsError> {
    c.validate()?;
    let lam = lambda_min_positive(b).ok_or(DiagnosticsError::DegenerateB)?;
    Ok(c.l_h * c.mbar / lam.sqrt())
}

/// Penalty threshold `2 (L_h mbar^2 + 1 + C)` above which the augmented
/// Lagrangian decreases monotonically.
pub fn beta_threshold(b: &Matrix, c: &ConstantsDecl) -> Result<f64, DiagnosticsError> {
    let cc = dual_control_constant(b, c)?;
    Ok(2.0 * (c.l_h * c.mbar * c.mbar + 1.0 + cc))
}

/// `|B^T w + grad h(y)| <= tol` at the given state.
pub fn check_dual_identity(p: &Problem, s: &State, tol: f64) -> DiagnosticReport {
    let spec = p.spec(BlockId::Y);
    let Some(mut g) = spec.gradient(&s.y) else {
        return DiagnosticReport::new("dual_identity", f64::NEG_INFINITY, tol)
            .with_message("the last block objective is not smooth");
    };
    if let Some(cg) = p.coupling().filter(|g| g.involves(BlockId::Y)) {
        g += cg.gradient(BlockId::Y, &s.x, &s.y);
    }
    let err = (p.b_map().apply_transpose(&s.w) + g).norm();
    DiagnosticReport::new("dual_identity", tol - err, 0.0).with_value(err)
}

/// The last primal block must have a smooth (or zero) objective.
pub fn check_y_smooth(p: &Problem) -> DiagnosticReport {
    let smooth = p.spec(BlockId::Y).is_smooth();
    DiagnosticReport::new("y_smooth", if smooth { 0.0 } else { -1.0 }, 0.0).with_message(
        if smooth {
            "last block objective is smooth".to_string()
        } else {
            format!("last block objective is {:?}", p.spec(BlockId::Y).class)
        },
    )
}

/// `x_0` first and `y` last in every iteration.
pub fn check_update_order(order: &UpdateOrder) -> DiagnosticReport {
    let safe = order.is_safe();
    DiagnosticReport::new("update_order", if safe { 0.0 } else { -1.0 }, 0.0).with_message(
        if safe {
            "x0 first and y last in every iteration"
        } else {
            "some iteration does not update x0 first and y last"
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let c = ConstantsDecl::new(0.0, 1.0, 1.0);
        assert!((beta_threshold(&Matrix::identity(2, 2), &c).unwrap() - 6.0).abs() < 1e-12);
        assert!((beta_threshold(&(Matrix::identity(2, 2) * 2.0), &c).unwrap() - 5.0).abs() < 1e-12);
        let tiny = ConstantsDecl::new(0.0, 1e-12, 1.0);
        assert!((beta_threshold(&Matrix::identity(2, 2), &tiny).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(
            beta_threshold(&Matrix::zeros(2, 2), &c),
            Err(DiagnosticsError::DegenerateB)
        );
    }

    #[test]
    fn im_subset_examples() {
        let eye = Matrix::identity(3, 3);
        let a = Matrix::from_row_slice(3, 2, &[1.0, 5.0, -2.0, 0.0, 3.0, 1.0]);
        assert!(check_im_subset(std::slice::from_ref(&a), &eye, 1e-10).passed);
        let chen_a = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        let chen_b = Matrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let r = check_im_subset(&[chen_a], &chen_b, 1e-10);
        assert!(!r.passed);
        assert_eq!(r.value, Some(2.0));
    }

    #[test]
    fn im_subset_scale_invariant() {
        let b = Matrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let a = Matrix::from_column_slice(3, 1, &[2.0, 4.0, 4.0]);
        assert!(check_im_subset(&[a.clone() * 1e-9], &(b.clone() * 1e6), 1e-10).passed);
        assert!(check_im_subset(&[a], &b, 1e-10).passed);
    }
}
