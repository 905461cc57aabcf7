//! Continuous piecewise-linear functions over polyhedral pieces.

use super::ProxError;
use crate::linalg::{rank, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed polyhedron `{u : G u <= h}` carrying the affine function
/// `slope . u + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub g: Matrix,
    pub h: Vector,
    pub slope: Vector,
    pub intercept: f64,
}

impl Piece {
    pub fn new(g: Matrix, h: Vector, slope: Vector, intercept: f64) -> Self {
        Piece {
            g,
            h,
            slope,
            intercept,
        }
    }

    pub fn contains(&self, u: &Vector, tol: f64) -> bool {
        if self.g.nrows() == 0 {
            return true;
        }
        let lhs = &self.g * u;
        lhs.iter()
            .zip(self.h.iter())
            .all(|(l, h)| *l <= h + tol * (1.0 + h.abs()))
    }

    pub fn eval(&self, u: &Vector) -> f64 {
        self.slope.dot(u) + self.intercept
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    dim: usize,
    pieces: Vec<Piece>,
}

const MEMBERSHIP_TOL: f64 = 1e-9;
const MAX_CONSTRAINTS: usize = 16;

impl PiecewiseLinear {
    /// Validates dimensions, then checks continuity across shared facets
    /// and coverage of the space on a deterministic sample of points.
    pub fn new(dim: usize, pieces: Vec<Piece>) -> Result<Self, ProxError> {
        if pieces.is_empty() {
            return Err(ProxError::InvalidSpec("no pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.slope.len() != dim
                || (p.g.nrows() > 0 && p.g.ncols() != dim)
                || p.g.nrows() != p.h.len()
            {
                return Err(ProxError::InvalidSpec(format!(
                    "piece {i} has inconsistent dimensions"
                )));
            }
            if p.g.nrows() > MAX_CONSTRAINTS {
                return Err(ProxError::InvalidSpec(format!(
                    "piece {i} has {} constraints (at most {MAX_CONSTRAINTS} supported)",
                    p.g.nrows()
                )));
            }
        }
        let f = PiecewiseLinear { dim, pieces };
        f.check_coverage()?;
        f.check_continuity()?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value from the lowest-index piece containing `u`; `+inf` if none does.
    pub fn value(&self, u: &Vector) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.contains(u, MEMBERSHIP_TOL))
            .map(|p| p.eval(u))
            .unwrap_or(f64::INFINITY)
    }

    /// Minimizes over each piece separately (a projection onto the piece's
    /// polyhedron) and keeps the best; ties go to the lowest piece index.
    pub fn prox(&self, v: &Vector, t: f64) -> Vector {
        assert!(t > 0.0, "prox step must be positive");
        let mut best: Option<(f64, Vector)> = None;
        for p in &self.pieces {
            let z = v - &p.slope * t;
            let Some(u) = project_polyhedron(&p.g, &p.h, &z) else {
                continue;
            };
            let obj = p.eval(&u) + (&u - v).norm_squared() / (2.0 * t);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, u));
            }
        }
        best.map(|(_, u)| u)
            .expect("coverage was validated at construction")
    }

    fn sample_points(&self, seed: u64, count: usize, spread: f64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Vector::from_fn(self.dim, |_, _| spread * (2.0 * rng.random::<f64>() - 1.0)))
            .collect()
    }

    fn check_coverage(&self) -> Result<(), ProxError> {
        for spread in [1.0, 10.0, 1e3] {
            for u in self.sample_points(7, 64, spread) {
                if !self.pieces.iter().any(|p| p.contains(&u, MEMBERSHIP_TOL)) {
                    return Err(ProxError::InvalidSpec(format!(
                        "point {:?} is not covered",
                        u.as_slice()
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_continuity(&self) -> Result<(), ProxError> {
        let probes = self.sample_points(11, 8, 10.0);
        for (i, p) in self.pieces.iter().enumerate() {
            for j in 0..p.g.nrows() {
                // facet j of piece i: add the reversed inequality
                let mut g = p.g.clone().insert_row(p.g.nrows(), 0.0);
                let gj = p.g.row(j).clone_owned();
                g.row_mut(p.g.nrows()).copy_from(&(-gj));
                let mut h = p.h.clone().insert_row(p.h.len(), 0.0);
                h[p.h.len()] = -p.h[j];
                for z in &probes {
                    let Some(x) = project_polyhedron(&g, &h, z) else {
                        continue;
                    };
                    let fi = p.eval(&x);
                    for (k, other) in self.pieces.iter().enumerate() {
                        if k == i || !other.contains(&x, MEMBERSHIP_TOL) {
                            continue;
                        }
                        let fk = other.eval(&x);
                        if (fi - fk).abs() > 1e-8 * (1.0 + fi.abs()) {
                            return Err(ProxError::InvalidSpec(format!(
                                "pieces {i} and {k} disagree at {:?}: {fi} vs {fk}",
                                x.as_slice()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Euclidean projection onto `{u : G u <= h}` by active-set enumeration.
///
/// Subsets of constraints are tried by increasing size; the first subset
/// with independent rows whose KKT point is primal and dual feasible gives
/// the (unique) projection. Returns `None` for an empty polyhedron.
pub fn project_polyhedron(g: &Matrix, h: &Vector, z: &Vector) -> Option<Vector> {
    let m = g.nrows();
    let feasible = |u: &Vector| {
        m == 0
            || (g * u)
                .iter()
                .zip(h.iter())
                .all(|(l, hi)| *l <= hi + 1e-10 * (1.0 + hi.abs()))
    };
    if feasible(z) {
        return Some(z.clone());
    }
    let n = z.len();
    let mut subsets: Vec<u32> = (1..(1u32 << m)).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    for s in subsets {
        let k = s.count_ones() as usize;
        if k > n {
            break;
        }
        let idx: Vec<usize> = (0..m).filter(|i| s & (1 << i) != 0).collect();
        let gs = Matrix::from_fn(k, n, |r, c| g[(idx[r], c)]);
        if rank(&gs, 1e-10) < k {
            continue;
        }
        let hs = Vector::from_fn(k, |r, _| h[idx[r]]);
        let gram = &gs * gs.transpose();
        let Some(chol) = gram.cholesky() else {
            continue;
        };
        let lambda = chol.solve(&(&gs * z - hs));
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let u = z - gs.tr_mul(&lambda);
        if feasible(&u) {
            return Some(u);
        }
    }
    None
}
