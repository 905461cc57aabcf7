//! Proximal operators and the handle type the engine dispatches on.

mod piecewise;
mod projections;
mod scalar;
mod spectral;

pub use piecewise::{project_polyhedron, Piece, PiecewiseLinear};
pub use projections::{
    proj_box, proj_box_uniform, proj_complementarity, proj_complementarity_pair, proj_finite_set,
    proj_sphere,
};
pub use scalar::{
    lq_value, mcp_value, prox_l1, prox_lq, prox_lq_scalar, prox_mcp, prox_mcp_scalar, prox_scad,
    prox_scad_scalar, scad_value, soft_threshold,
};
pub use spectral::{proj_stiefel, prox_schatten_q, schatten_q_value};

use crate::linalg::{unvec, vec_of, Vector};
use crate::subsolvers::{ColumnTv, SubsolveReport};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProxError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid piecewise-linear specification: {0}")]
    InvalidSpec(String),
}

/// Regularity class a block function is declared to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionClass {
    Smooth,
    RestrictedProxRegular,
    PiecewiseLinear,
    LowerSemicontinuous,
}

/// A proper lower semicontinuous function with a computable prox.
pub trait ProxFunction: Send + Sync {
    fn name(&self) -> String;

    fn value(&self, u: &Vector) -> f64;

    /// A global minimizer of `f(u) + |u - v|^2 / (2t)`.
    fn prox(&self, v: &Vector, t: f64) -> Vector;

    /// Inexact variant for iterative proxes; `warm` is a starting point.
    fn prox_inexact(
        &self,
        v: &Vector,
        t: f64,
        _tol: f64,
        _warm: &Vector,
    ) -> (Vector, SubsolveReport) {
        (self.prox(v, t), SubsolveReport::exact())
    }

    fn is_exact(&self) -> bool {
        true
    }

    /// How ties between several global minimizers are broken.
    fn tie_rule(&self) -> &'static str {
        "unique minimizer"
    }

    /// A finite sample of subgradients at `x` with norm at most `bound`.
    /// `None` means the function offers no sampler; an empty list means
    /// `x` has no such subgradient.
    fn bounded_subgradients(&self, _x: &Vector, _bound: f64) -> Option<Vec<Vector>> {
        None
    }
}

#[derive(Clone)]
pub struct ProxHandle {
    inner: Arc<dyn ProxFunction>,
    class: FunctionClass,
}

impl fmt::Debug for ProxHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProxHandle({}, {:?})", self.inner.name(), self.class)
    }
}

impl ProxHandle {
    pub fn new(f: impl ProxFunction + 'static, class: FunctionClass) -> Self {
        ProxHandle {
            inner: Arc::new(f),
            class,
        }
    }

    pub fn name(&self) -> String {
        self.inner.name()
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    pub fn value(&self, u: &Vector) -> f64 {
        self.inner.value(u)
    }

    pub fn prox(&self, v: &Vector, t: f64) -> Vector {
        self.inner.prox(v, t)
    }

    pub fn prox_inexact(
        &self,
        v: &Vector,
        t: f64,
        tol: f64,
        warm: &Vector,
    ) -> (Vector, SubsolveReport) {
        self.inner.prox_inexact(v, t, tol, warm)
    }

    pub fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    pub fn tie_rule(&self) -> &'static str {
        self.inner.tie_rule()
    }

    pub fn bounded_subgradients(&self, x: &Vector, bound: f64) -> Option<Vec<Vector>> {
        self.inner.bounded_subgradients(x, bound)
    }

    pub fn zero() -> Self {
        Self::new(Zero, FunctionClass::Smooth)
    }

    pub fn l1(lambda: f64) -> Self {
        Self::new(L1 { lambda }, FunctionClass::RestrictedProxRegular)
    }

    pub fn lq(lambda: f64, q: f64) -> Result<Self, ProxError> {
        if !(q > 0.0 && q <= 1.0) || lambda < 0.0 {
            return Err(ProxError::InvalidParameter(format!(
                "l_q needs 0 < q <= 1, lambda >= 0 (q={q}, lambda={lambda})"
            )));
        }
        Ok(Self::new(
            Lq { lambda, q },
            FunctionClass::RestrictedProxRegular,
        ))
    }

    pub fn mcp(gamma: f64, lambda: f64) -> Result<Self, ProxError> {
        prox_mcp_scalar(0.0, 1.0, gamma, lambda)?;
        Ok(Self::new(
            Mcp { gamma, lambda },
            FunctionClass::LowerSemicontinuous,
        ))
    }

    pub fn scad(gamma: f64, lambda: f64) -> Result<Self, ProxError> {
        prox_scad_scalar(0.0, 1.0, gamma, lambda)?;
        Ok(Self::new(
            Scad { gamma, lambda },
            FunctionClass::RestrictedProxRegular,
        ))
    }

    pub fn piecewise_linear(f: PiecewiseLinear) -> Self {
        Self::new(f, FunctionClass::PiecewiseLinear)
    }

    pub fn box_set(lo: Vector, hi: Vector) -> Self {
        Self::new(
            BoxQuadratic {
                lo,
                hi,
                curvature: 0.0,
            },
            FunctionClass::RestrictedProxRegular,
        )
    }

    /// `curvature * |u|^2` restricted to a box.
    pub fn box_quadratic(lo: Vector, hi: Vector, curvature: f64) -> Self {
        assert!(curvature >= 0.0);
        Self::new(
            BoxQuadratic { lo, hi, curvature },
            FunctionClass::RestrictedProxRegular,
        )
    }

    pub fn sphere() -> Self {
        Self::new(Sphere, FunctionClass::RestrictedProxRegular)
    }

    pub fn stiefel(rows: usize, cols: usize) -> Self {
        Self::new(Stiefel { rows, cols }, FunctionClass::RestrictedProxRegular)
    }

    pub fn complementarity() -> Self {
        Self::new(Complementarity, FunctionClass::LowerSemicontinuous)
    }

    pub fn schatten_q(rows: usize, cols: usize, lambda: f64, q: f64) -> Result<Self, ProxError> {
        if !(q > 0.0 && q <= 1.0) || lambda < 0.0 {
            return Err(ProxError::InvalidParameter(format!(
                "Schatten-q needs 0 < q <= 1 (q={q})"
            )));
        }
        Ok(Self::new(
            SchattenQ {
                rows,
                cols,
                lambda,
                q,
            },
            FunctionClass::RestrictedProxRegular,
        ))
    }

    pub fn finite_set(points: Vec<Vector>) -> Self {
        assert!(!points.is_empty());
        Self::new(FiniteSet { points }, FunctionClass::LowerSemicontinuous)
    }

    pub fn column_tv(rows: usize, cols: usize) -> Self {
        Self::new(
            ColumnTv::new(rows, cols),
            FunctionClass::RestrictedProxRegular,
        )
    }

    /// A handle built from closures, for one-off functions.
    pub fn from_fn(
        name: &str,
        class: FunctionClass,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        prox: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self::new(
            FnProx {
                name: name.to_string(),
                value: Box::new(value),
                prox: Box::new(prox),
            },
            class,
        )
    }
}

struct Zero;

impl ProxFunction for Zero {
    fn name(&self) -> String {
        "zero".into()
    }
    fn value(&self, _u: &Vector) -> f64 {
        0.0
    }
    fn prox(&self, v: &Vector, _t: f64) -> Vector {
        v.clone()
    }
    fn bounded_subgradients(&self, x: &Vector, _bound: f64) -> Option<Vec<Vector>> {
        Some(vec![Vector::zeros(x.len())])
    }
}

/// Spreads a remaining norm budget over the kink coordinates of a
/// separable function with a few fixed sign patterns.
fn kink_samples(
    base: Vector,
    kinks: &[usize],
    per_coord_cap: Option<f64>,
    bound: f64,
) -> Vec<Vector> {
    let left = bound * bound - base.norm_squared();
    if left < 0.0 {
        return Vec::new();
    }
    if kinks.is_empty() {
        return vec![base];
    }
    let mut mag = left.sqrt() / (kinks.len() as f64).sqrt();
    if let Some(cap) = per_coord_cap {
        mag = mag.min(cap);
    }
    [-1.0, -0.5, 0.0, 0.5, 1.0]
        .iter()
        .map(|s| {
            let mut d = base.clone();
            for &i in kinks {
                d[i] = s * mag;
            }
            d
        })
        .collect()
}

struct L1 {
    lambda: f64,
}

impl ProxFunction for L1 {
    fn name(&self) -> String {
        format!("l1(lambda={})", self.lambda)
    }
    fn value(&self, u: &Vector) -> f64 {
        self.lambda * u.lp_norm(1)
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        prox_l1(v, t, self.lambda)
    }
    fn bounded_subgradients(&self, x: &Vector, bound: f64) -> Option<Vec<Vector>> {
        let base = x.map(|xi| {
            if xi == 0.0 {
                0.0
            } else {
                self.lambda * xi.signum()
            }
        });
        let kinks: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
        Some(kink_samples(base, &kinks, Some(self.lambda), bound))
    }
}

struct Lq {
    lambda: f64,
    q: f64,
}

impl ProxFunction for Lq {
    fn name(&self) -> String {
        format!("lq(lambda={}, q={})", self.lambda, self.q)
    }
    fn value(&self, u: &Vector) -> f64 {
        u.iter().map(|&x| lq_value(x, self.lambda, self.q)).sum()
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        prox_lq(v, t, self.lambda, self.q)
    }
    fn tie_rule(&self) -> &'static str {
        "ties between zero and the nonzero root resolve to zero"
    }
    fn bounded_subgradients(&self, x: &Vector, bound: f64) -> Option<Vec<Vector>> {
        let (l, q) = (self.lambda, self.q);
        let base = x.map(|xi| {
            if xi == 0.0 {
                0.0
            } else {
                l * q * xi.signum() * xi.abs().powf(q - 1.0)
            }
        });
        let kinks: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
        let cap = if q == 1.0 { Some(l) } else { None };
        Some(kink_samples(base, &kinks, cap, bound))
    }
}

struct Mcp {
    gamma: f64,
    lambda: f64,
}

impl ProxFunction for Mcp {
    fn name(&self) -> String {
        format!("mcp(gamma={}, lambda={})", self.gamma, self.lambda)
    }
    fn value(&self, u: &Vector) -> f64 {
        u.iter()
            .map(|&x| mcp_value(x, self.gamma, self.lambda))
            .sum()
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        prox_mcp(v, t, self.gamma, self.lambda).expect("parameters validated at construction")
    }
    fn tie_rule(&self) -> &'static str {
        "ties resolve to the smaller magnitude"
    }
}

struct Scad {
    gamma: f64,
    lambda: f64,
}

impl ProxFunction for Scad {
    fn name(&self) -> String {
        format!("scad(gamma={}, lambda={})", self.gamma, self.lambda)
    }
    fn value(&self, u: &Vector) -> f64 {
        u.iter()
            .map(|&x| scad_value(x, self.gamma, self.lambda))
            .sum()
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        prox_scad(v, t, self.gamma, self.lambda).expect("parameters validated at construction")
    }
    fn tie_rule(&self) -> &'static str {
        "ties resolve to the smaller magnitude"
    }
}

impl ProxFunction for PiecewiseLinear {
    fn name(&self) -> String {
        format!("piecewise-linear({} pieces)", self.pieces().len())
    }
    fn value(&self, u: &Vector) -> f64 {
        PiecewiseLinear::value(self, u)
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        PiecewiseLinear::prox(self, v, t)
    }
    fn tie_rule(&self) -> &'static str {
        "ties resolve to the lowest piece index"
    }
}

struct BoxQuadratic {
    lo: Vector,
    hi: Vector,
    curvature: f64,
}

impl ProxFunction for BoxQuadratic {
    fn name(&self) -> String {
        if self.curvature == 0.0 {
            "box".into()
        } else {
            format!("{}|u|^2 on box", self.curvature)
        }
    }
    fn value(&self, u: &Vector) -> f64 {
        let inside = (0..u.len()).all(|i| u[i] >= self.lo[i] && u[i] <= self.hi[i]);
        if inside {
            self.curvature * u.norm_squared()
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        proj_box(&(v / (1.0 + 2.0 * t * self.curvature)), &self.lo, &self.hi)
    }
}

struct Sphere;

const SET_TOL: f64 = 1e-9;

impl ProxFunction for Sphere {
    fn name(&self) -> String {
        "unit sphere".into()
    }
    fn value(&self, u: &Vector) -> f64 {
        if (u.norm() - 1.0).abs() <= SET_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, v: &Vector, _t: f64) -> Vector {
        proj_sphere(v)
    }
    fn tie_rule(&self) -> &'static str {
        "the origin maps to the first basis vector"
    }
    fn bounded_subgradients(&self, x: &Vector, bound: f64) -> Option<Vec<Vector>> {
        let n = x.norm();
        if (n - 1.0).abs() > SET_TOL {
            return Some(Vec::new());
        }
        Some(
            [-1.0, -0.5, 0.0, 0.5, 1.0]
                .iter()
                .map(|s| x * (s * bound / n))
                .collect(),
        )
    }
}

struct Stiefel {
    rows: usize,
    cols: usize,
}

impl ProxFunction for Stiefel {
    fn name(&self) -> String {
        format!("Stiefel({}x{})", self.rows, self.cols)
    }
    fn value(&self, u: &Vector) -> f64 {
        let m = unvec(u, self.rows, self.cols);
        let err = (m.tr_mul(&m) - crate::linalg::Matrix::identity(self.cols, self.cols)).amax();
        if err <= SET_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, v: &Vector, _t: f64) -> Vector {
        vec_of(&proj_stiefel(&unvec(v, self.rows, self.cols)))
    }
    fn tie_rule(&self) -> &'static str {
        "rank-deficient inputs are completed by Gram-Schmidt on the standard basis"
    }
}

struct Complementarity;

impl ProxFunction for Complementarity {
    fn name(&self) -> String {
        "complementarity set".into()
    }
    fn value(&self, u: &Vector) -> f64 {
        let n = u.len() / 2;
        let ok = (0..n).all(|i| u[i] >= 0.0 && u[n + i] >= 0.0 && u[i] * u[n + i] == 0.0);
        if ok {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, v: &Vector, _t: f64) -> Vector {
        proj_complementarity(v)
    }
    fn tie_rule(&self) -> &'static str {
        "equidistant coordinates keep the first half"
    }
}

struct SchattenQ {
    rows: usize,
    cols: usize,
    lambda: f64,
    q: f64,
}

impl ProxFunction for SchattenQ {
    fn name(&self) -> String {
        format!("Schatten-{}({}x{})", self.q, self.rows, self.cols)
    }
    fn value(&self, u: &Vector) -> f64 {
        schatten_q_value(&unvec(u, self.rows, self.cols), self.lambda, self.q)
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        vec_of(&prox_schatten_q(
            &unvec(v, self.rows, self.cols),
            t,
            self.lambda,
            self.q,
        ))
    }
    fn tie_rule(&self) -> &'static str {
        "each singular value follows the scalar l_q tie rule"
    }
}

struct FiniteSet {
    points: Vec<Vector>,
}

impl ProxFunction for FiniteSet {
    fn name(&self) -> String {
        format!("finite set ({} points)", self.points.len())
    }
    fn value(&self, u: &Vector) -> f64 {
        if self.points.iter().any(|p| (p - u).amax() <= SET_TOL) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, v: &Vector, _t: f64) -> Vector {
        proj_finite_set(v, &self.points)
    }
    fn tie_rule(&self) -> &'static str {
        "ties resolve to the lowest point index"
    }
}

type ValueFn = Box<dyn Fn(&Vector) -> f64 + Send + Sync>;
type ProxFn = Box<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;

struct FnProx {
    name: String,
    value: ValueFn,
    prox: ProxFn,
}

impl ProxFunction for FnProx {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn value(&self, u: &Vector) -> f64 {
        (self.value)(u)
    }
    fn prox(&self, v: &Vector, t: f64) -> Vector {
        (self.prox)(v, t)
    }
}
