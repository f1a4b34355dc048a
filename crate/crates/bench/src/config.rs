//! JSON experiment configuration.

use grnewton::data::{load_libsvm, synthetic_dataset, DataError, Dataset};
use grnewton::objectives::{
    ChebyshevResidual, LinearResidual, LogSumExp, Logistic, Objective, ObjectiveError, PNorm,
    PowerResidual, Quadratic, ResidualOperator, RosenbrockResidual,
};
use grnewton::{Matrix, NormPair, Vector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("dataset: {0}")]
    Data(#[from] DataError),
    #[error("objective: {0}")]
    Objective(#[from] ObjectiveError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub methods: Vec<MethodEntry>,
    #[serde(default)]
    pub x0: X0Spec,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    /// Directory that relative dataset paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Logsumexp {
        mu: f64,
        dataset: DatasetSpec,
    },
    Logistic {
        dataset: DatasetSpec,
    },
    PowerResidual {
        operator: OperatorSpec,
        p: f64,
        /// Row-major `G`; identity when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<Vec<Vec<f64>>>,
    },
    Pnorm {
        p: f64,
        dim: usize,
    },
    Quadratic {
        diag: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Linear { dataset: DatasetSpec },
    Rosenbrock,
    Chebyshev { d: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        rows: usize,
        cols: usize,
        /// Falls back to the experiment seed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Libsvm {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_features: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum X0Spec {
    #[default]
    Zeros,
    Constant {
        value: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
    /// `steps × steps` starting points on `[lo, hi]²`; 2-D problems only.
    Grid {
        lo: f64,
        hi: f64,
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default = "StopSpec::default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "StopSpec::default_max_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_oracle_calls: Option<usize>,
}

impl StopSpec {
    fn default_grad_tol() -> f64 {
        1e-8
    }

    fn default_max_iters() -> usize {
        1000
    }
}

impl Default for StopSpec {
    fn default() -> Self {
        Self {
            grad_tol: Self::default_grad_tol(),
            max_iters: Self::default_max_iters(),
            f_target: None,
            max_oracle_calls: None,
        }
    }
}

/// Either a preset name or a fully spelled-out method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodEntry {
    Preset(Preset),
    Custom(CustomMethod),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Exact Hessian, function-value search.
    ExactFuncSearch,
    /// Problem-specific approximation, function-value search.
    InexactFuncSearch,
    /// Exact Hessian, gradient-condition search with `γ = 1/M`.
    ExactGradSearchInvM,
    /// Exact Hessian, gradient-condition search with `γ = ‖∇f‖*/M`.
    ExactGradSearchGradOverM,
    /// `H = 0`, `B = I`.
    GradientMethod,
    /// `H = 0`, `B = AᵀA`.
    GaussNewton,
    /// Rank-one Fisher term of the power-residual Hessian with `B = AᵀA`.
    FisherTerm,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::ExactFuncSearch,
        Preset::InexactFuncSearch,
        Preset::ExactGradSearchInvM,
        Preset::ExactGradSearchGradOverM,
        Preset::GradientMethod,
        Preset::GaussNewton,
        Preset::FisherTerm,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            Preset::ExactFuncSearch => "exact-func-search",
            Preset::InexactFuncSearch => "inexact-func-search",
            Preset::ExactGradSearchInvM => "exact-grad-search-inv-m",
            Preset::ExactGradSearchGradOverM => "exact-grad-search-grad-over-m",
            Preset::GradientMethod => "gradient-method",
            Preset::GaussNewton => "gauss-newton",
            Preset::FisherTerm => "fisher-term",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMethod {
    pub name: String,
    pub strategy: StrategySpec,
    pub rule: RuleSpec,
    #[serde(default)]
    pub norm: NormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_backtracks: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategySpec {
    Exact,
    Zero,
    Fisher,
    /// `AᵀA` of the problem's design matrix.
    GaussNewtonConstant,
    WeightedGaussNewton,
    NonlinearPowerFull,
    FisherRankOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleSpec {
    FuncSearch {
        #[serde(default = "one")]
        gamma0: f64,
    },
    GradSearch {
        l: f64,
        #[serde(default = "one")]
        m0: f64,
    },
    Fixed {
        gamma: f64,
    },
    /// `γ = π(‖∇f‖*)` from `(M, α)` pairs.
    Theoretical {
        terms: Vec<(f64, f64)>,
    },
    /// Sampling estimate of `γ` at every iterate; small problems only.
    EmpiricalGns {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_dirs: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_radii: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormSpec {
    #[default]
    Identity,
    /// `B = AᵀA` of the problem's design matrix.
    Gram,
}

/// Constants for the `predict` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    /// `(M, α)` pairs of the bound `π`.
    pub terms: Vec<(f64, f64)>,
    pub diameter: f64,
    #[serde(default)]
    pub f_star: f64,
    /// `f(x₀) − f*`; computed at the first starting point when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
    /// `‖∇f(x₀)‖*` in the identity norm; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominance: Option<DominanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inexactness: Option<InexactnessSpec>,
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominanceSpec {
    pub c: f64,
    pub d_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InexactnessSpec {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
}

/// Settings for `gamma-probe` and `inexactness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Probe every `every`-th iterate; default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_radii: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Exponent `β` of the inexactness envelope; default 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::Invalid("at least one method is required".into()));
        }
        if !(self.stop.grad_tol >= 0.0) {
            return Err(ConfigError::Invalid(format!("grad_tol {} must be >= 0", self.stop.grad_tol)));
        }
        if let X0Spec::Grid { lo, hi, steps } = self.x0 {
            if !(lo < hi) || steps < 2 {
                return Err(ConfigError::Invalid("grid needs lo < hi and steps >= 2".into()));
            }
        }
        Ok(())
    }

    fn resolve_dataset(&self, spec: &DatasetSpec) -> Result<Dataset, ConfigError> {
        match spec {
            DatasetSpec::Synthetic { rows, cols, seed } => {
                if *rows == 0 || *cols == 0 {
                    return Err(ConfigError::Invalid("synthetic dataset needs rows, cols > 0".into()));
                }
                Ok(synthetic_dataset(*rows, *cols, seed.unwrap_or(self.seed)))
            }
            DatasetSpec::Libsvm { path, n_features } => {
                let full = if path.is_absolute() { path.clone() } else { self.base_dir.join(path) };
                Ok(load_libsvm(&full, *n_features)?)
            }
        }
    }

    /// Builds the objective and, where one exists, its design matrix.
    pub fn build_problem(&self) -> Result<Problem, ConfigError> {
        let (objective, design, family): (Box<dyn Objective>, Option<Matrix>, ProblemFamily) = match &self.problem {
            ProblemSpec::Logsumexp { mu, dataset } => {
                let data = self.resolve_dataset(dataset)?;
                let obj = LogSumExp::new(&data, *mu)?;
                (Box::new(obj), Some(data.a), ProblemFamily::SoftMax)
            }
            ProblemSpec::Logistic { dataset } => {
                let data = self.resolve_dataset(dataset)?;
                let obj = Logistic::new(&data)?;
                (Box::new(obj), Some(data.a), ProblemFamily::Separable)
            }
            ProblemSpec::PowerResidual { operator, p, metric } => {
                let (op, design): (Box<dyn ResidualOperator>, Option<Matrix>) = match operator {
                    OperatorSpec::Linear { dataset } => {
                        let data = self.resolve_dataset(dataset)?;
                        let a = data.a.clone();
                        (Box::new(LinearResidual::new(&data)?), Some(a))
                    }
                    OperatorSpec::Rosenbrock => (Box::new(RosenbrockResidual), None),
                    OperatorSpec::Chebyshev { d } => (Box::new(ChebyshevResidual::new(*d)?), None),
                };
                let metric = match metric {
                    Some(rows) => Some(matrix_from_rows(rows)?),
                    None => None,
                };
                let obj = PowerResidual::new(op, *p, metric)?;
                (Box::new(obj), design, ProblemFamily::PowerResidual)
            }
            ProblemSpec::Pnorm { p, dim } => {
                let obj = PNorm::new(*p, NormPair::identity(*dim))?;
                (Box::new(obj), None, ProblemFamily::Other)
            }
            ProblemSpec::Quadratic { diag, center } => {
                let n = diag.len();
                let c = match center {
                    Some(c) => Vector::from_column_slice(c),
                    None => Vector::zeros(n),
                };
                let obj = Quadratic::new(Matrix::from_diagonal(&Vector::from_column_slice(diag)), c)?;
                (Box::new(obj), None, ProblemFamily::Other)
            }
        };
        Ok(Problem {
            objective,
            design,
            family,
        })
    }

    /// Starting points in run order.
    pub fn starting_points(&self, dim: usize) -> Result<Vec<Vector>, ConfigError> {
        match &self.x0 {
            X0Spec::Zeros => Ok(vec![Vector::zeros(dim)]),
            X0Spec::Constant { value } => Ok(vec![Vector::from_element(dim, *value)]),
            X0Spec::Explicit { values } => {
                if values.len() != dim {
                    return Err(ConfigError::Invalid(format!(
                        "x0 has {} entries, problem dimension is {dim}",
                        values.len()
                    )));
                }
                Ok(vec![Vector::from_column_slice(values)])
            }
            X0Spec::Grid { lo, hi, steps } => {
                if dim != 2 {
                    return Err(ConfigError::Invalid(format!("grid x0 needs a 2-D problem, got {dim}")));
                }
                Ok(grid_points(*lo, *hi, *steps))
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.x0, X0Spec::Grid { .. })
    }
}

/// Row-major grid over `[lo, hi]²`: `x1` varies slowest.
pub fn grid_points(lo: f64, hi: f64, steps: usize) -> Vec<Vector> {
    let h = (hi - lo) / (steps - 1) as f64;
    let mut out = Vec::with_capacity(steps * steps);
    for i in 0..steps {
        for j in 0..steps {
            out.push(Vector::from_vec(vec![lo + h * i as f64, lo + h * j as f64]));
        }
    }
    out
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix, ConfigError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError::Invalid("metric must be a square matrix".into()));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Which inexact strategy the `inexact-func-search` preset uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemFamily {
    SoftMax,
    Separable,
    PowerResidual,
    Other,
}

pub struct Problem {
    pub objective: Box<dyn Objective>,
    pub design: Option<Matrix>,
    pub family: ProblemFamily,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("objective", &self.objective.name())
            .field("family", &self.family)
            .finish()
    }
}
