//! TOML run configuration and its translation into an engine run.

use crate::CliError;
use nadmm::apps::{
    Application, CompactSet, CompactSetInstance, ComplementarityInstance, DecompositionInstance,
    RegressionInstance,
};
use nadmm::diagnostics::ConstantsDecl;
use nadmm::gallery::{case_by_name, GalleryError, CASE_NAMES};
use nadmm::{Matrix, Problem, ProxHandle, SolverOptions, State, UpdateOrder, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for synthetic data and permuted orders; `NADMM_SEED` overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Penalty parameter; defaults to the instance's own choice.
    pub beta: Option<f64>,
    #[serde(default)]
    pub order: OrderPolicy,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub stop: StopOverrides,
    /// Constants for the post-run subgradient check. Applications fall back
    /// to their own declaration.
    pub constants: Option<ConstantsDecl>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// The gallery case's own order, or the cyclic order for applications.
    #[default]
    Default,
    Fixed,
    /// Seeded random permutation of the middle blocks.
    Permuted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Gallery {
        case: String,
    },
    /// Consensus regression with an `l1` (`q = 1`) or `l_q` regularizer.
    Lasso {
        n: usize,
        m: usize,
        #[serde(default = "one")]
        blocks: usize,
        lambda: f64,
        #[serde(default = "one_f")]
        q: f64,
    },
    /// Nearest point on the unit sphere to a seeded Gaussian target.
    Sphere {
        dim: usize,
    },
    /// Nearest matrix with orthonormal columns to a seeded Gaussian target.
    Stiefel {
        rows: usize,
        cols: usize,
    },
    /// Nearest complementary pair to seeded Gaussian targets.
    Complementarity {
        n: usize,
    },
    /// Low-rank plus column-TV plus noise split of a seeded rank-one matrix.
    Decomposition {
        rows: usize,
        cols: usize,
        #[serde(default = "ten")]
        sigma: f64,
        #[serde(default = "tenth")]
        noise: f64,
        #[serde(default = "one_f")]
        lambda: f64,
        #[serde(default = "one_f")]
        q: f64,
    },
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn tenth() -> f64 {
    0.1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopOverrides {
    pub max_iters: Option<usize>,
    pub eps_primal: Option<f64>,
    pub eps_change: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths are taken from the config file's directory.
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

/// Everything needed for one engine run.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub name: String,
    pub problem: Problem,
    pub start: State,
    pub order: UpdateOrder,
    pub options: SolverOptions,
    pub constants: Option<ConstantsDecl>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::InvalidConfig(m));
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("beta must be positive and finite, got {b}"));
            }
        }
        if let Some(c) = &self.constants {
            c.validate()?;
        }
        match &self.problem {
            ProblemConfig::Gallery { case } => {
                if !CASE_NAMES.contains(&case.as_str()) {
                    return Err(GalleryError::UnknownCase(case.clone()).into());
                }
            }
            ProblemConfig::Lasso {
                n,
                m,
                blocks,
                lambda,
                q,
            } => {
                if *n == 0 || *m == 0 || *blocks == 0 {
                    return bad("lasso dimensions must be positive".into());
                }
                if !(*lambda >= 0.0) || !(*q > 0.0 && *q <= 1.0) {
                    return bad(format!(
                        "lasso needs lambda >= 0 and q in (0, 1], got {lambda}, {q}"
                    ));
                }
            }
            ProblemConfig::Sphere { dim } if *dim == 0 => {
                return bad("sphere dimension must be positive".into())
            }
            ProblemConfig::Stiefel { rows, cols } if *cols == 0 || rows < cols => {
                return bad(format!(
                    "Stiefel needs rows >= cols > 0, got {rows} x {cols}"
                ))
            }
            ProblemConfig::Complementarity { n } if *n == 0 => {
                return bad("complementarity size must be positive".into())
            }
            ProblemConfig::Decomposition { rows, cols, q, .. } => {
                if *rows == 0 || *cols < 2 {
                    return bad("decomposition needs at least one row and two columns".into());
                }
                if !(*q > 0.0 && *q <= 1.0) {
                    return bad(format!("decomposition needs q in (0, 1], got {q}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Output paths, resolved against `base` (the config file's directory).
    /// Defaults are `<stem>.trace.csv` and `<stem>.summary.json`.
    pub fn output_paths(&self, config_path: &Path) -> (PathBuf, PathBuf) {
        let base = config_path.parent().unwrap_or(Path::new("."));
        let stem = config_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("run");
        let resolve = |p: &Option<PathBuf>, default: String| {
            let p = p.clone().unwrap_or_else(|| PathBuf::from(default));
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        (
            resolve(&self.output.trace, format!("{stem}.trace.csv")),
            resolve(&self.output.summary, format!("{stem}.summary.json")),
        )
    }

    pub fn prepare(&self, seed: u64) -> Result<Prepared, CliError> {
        let mut prepared = match &self.problem {
            ProblemConfig::Gallery { case } => {
                let c = case_by_name(case, self.beta)?;
                Prepared {
                    name: c.name,
                    problem: c.problem,
                    start: c.start,
                    order: c.order,
                    options: SolverOptions::default(),
                    constants: None,
                }
            }
            other => prepare_app(build_app(other, self.beta, seed)?)?,
        };
        match self.order {
            OrderPolicy::Default => {}
            OrderPolicy::Fixed => prepared.order = UpdateOrder::CyclicFixed,
            OrderPolicy::Permuted => prepared.order = UpdateOrder::PermutedMiddle { seed },
        }
        let stop = &mut prepared.options.stop;
        stop.max_iters = self.stop.max_iters.unwrap_or(stop.max_iters);
        stop.eps_primal = self.stop.eps_primal.unwrap_or(stop.eps_primal);
        stop.eps_change = self.stop.eps_change.unwrap_or(stop.eps_change);
        if self.constants.is_some() {
            prepared.constants = self.constants;
        }
        Ok(prepared)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

fn build_app(
    p: &ProblemConfig,
    beta: Option<f64>,
    seed: u64,
) -> Result<Box<dyn Application>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    macro_rules! with_beta {
        ($inst:expr) => {{
            let mut inst = $inst;
            if let Some(b) = beta {
                inst.beta = b;
            }
            Box::new(inst) as Box<dyn Application>
        }};
    }
    Ok(match *p {
        ProblemConfig::Lasso {
            n,
            m,
            blocks,
            lambda,
            q,
        } => {
            let base = RegressionInstance::synthetic_lasso(n, m, blocks, lambda, seed)?;
            if q < 1.0 {
                let reg = ProxHandle::lq(lambda, q)?;
                with_beta!(RegressionInstance::new(base.designs, base.targets, reg)?)
            } else {
                with_beta!(base)
            }
        }
        ProblemConfig::Sphere { dim } => {
            let target = Vector::from_fn(dim, |_, _| gaussian(&mut rng));
            with_beta!(CompactSetInstance::distance_to(
                target,
                CompactSet::Sphere { dim }
            )?)
        }
        ProblemConfig::Stiefel { rows, cols } => {
            let target = Vector::from_fn(rows * cols, |_, _| gaussian(&mut rng));
            with_beta!(CompactSetInstance::distance_to(
                target,
                CompactSet::Stiefel { rows, cols }
            )?)
        }
        ProblemConfig::Complementarity { n } => {
            let a = Vector::from_fn(n, |_, _| gaussian(&mut rng));
            let b = Vector::from_fn(n, |_, _| gaussian(&mut rng));
            with_beta!(ComplementarityInstance::nearest_pair(a, b)?)
        }
        ProblemConfig::Decomposition {
            rows,
            cols,
            sigma,
            noise,
            lambda,
            q,
        } => {
            let v: Matrix = DecompositionInstance::rank_one(rows, cols, sigma, noise, seed);
            with_beta!(DecompositionInstance::schatten(v, lambda, q)?)
        }
        ProblemConfig::Gallery { .. } => unreachable!("gallery cases are not applications"),
    })
}

fn prepare_app(app: Box<dyn Application>) -> Result<Prepared, CliError> {
    Ok(Prepared {
        name: app.name().to_string(),
        problem: app.build_problem()?,
        start: app.initial_state()?,
        order: app.order(),
        options: app.default_options(),
        constants: Some(app.constants()),
    })
}
