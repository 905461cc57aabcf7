use crate::linalg::{sym_eigenvalues, Matrix, Vector};
use std::fmt;
use std::sync::Arc;

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// A differentiable function with a declared gradient Lipschitz constant.
/// Quadratics also carry their (constant) Hessian so block updates can be
/// solved in closed form.
#[derive(Clone)]
pub struct SmoothHandle {
    value: ValueFn,
    gradient: GradFn,
    lipschitz: f64,
    hessian: Option<Arc<Matrix>>,
}

impl fmt::Debug for SmoothHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothHandle")
            .field("lipschitz", &self.lipschitz)
            .field("quadratic", &self.hessian.is_some())
            .finish()
    }
}

impl SmoothHandle {
    pub fn new(
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Self {
        SmoothHandle {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            lipschitz,
            hessian: None,
        }
    }

    /// `0.5 u^T Q u + c^T u + c0` with `Q` symmetric.
    pub fn quadratic(q: Matrix, c: Vector, c0: f64) -> Self {
        let ev = sym_eigenvalues(&q);
        let lipschitz = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let (qv, cv) = (q.clone(), c.clone());
        let (qg, cg) = (q.clone(), c);
        SmoothHandle {
            value: Arc::new(move |u| 0.5 * u.dot(&(&qv * u)) + cv.dot(u) + c0),
            gradient: Arc::new(move |u| &qg * u + &cg),
            lipschitz,
            hessian: Some(Arc::new(q)),
        }
    }

    /// `0.5 |A u - b|^2`.
    pub fn least_squares(a: &Matrix, b: &Vector) -> Self {
        let q = a.tr_mul(a);
        let c = -a.tr_mul(b);
        Self::quadratic(q, c, 0.5 * b.norm_squared())
    }

    pub fn zero(dim: usize) -> Self {
        Self::quadratic(Matrix::zeros(dim, dim), Vector::zeros(dim), 0.0)
    }

    /// The same function with its Hessian hidden, which forces the engine
    /// onto the iterative block solver.
    pub fn without_hessian(&self) -> Self {
        SmoothHandle {
            hessian: None,
            ..self.clone()
        }
    }

    pub fn value(&self, u: &Vector) -> f64 {
        (self.value)(u)
    }

    pub fn gradient(&self, u: &Vector) -> Vector {
        (self.gradient)(u)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn hessian(&self) -> Option<&Matrix> {
        self.hessian.as_deref()
    }

    /// Largest relative disagreement between the gradient and central
    /// differences over the given points.
    pub fn gradient_check(&self, points: &[Vector], step: f64) -> f64 {
        let mut worst = 0.0f64;
        for u in points {
            let g = self.gradient(u);
            for i in 0..u.len() {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i] += step;
                dn[i] -= step;
                let fd = (self.value(&up) - self.value(&dn)) / (2.0 * step);
                worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_gradient_matches_differences() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let b = Vector::from_vec(vec![1.0, 0.0, -2.0]);
        let h = SmoothHandle::least_squares(&a, &b);
        let pts = vec![
            Vector::from_vec(vec![0.3, -0.7]),
            Vector::from_vec(vec![2.0, 1.0]),
        ];
        assert!(h.gradient_check(&pts, 1e-5) < 1e-7);
        let u = Vector::from_vec(vec![0.3, -0.7]);
        assert!((h.value(&u) - 0.5 * (&a * &u - &b).norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_lipschitz_is_spectral_radius() {
        let q = Matrix::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            SmoothHandle::quadratic(q, Vector::zeros(2), 0.0).lipschitz(),
            3.0
        );
    }
}
