//! Hessian approximations `H(x) ⪰ 0` and inexactness diagnostics.

use crate::linalg::{Matrix, NormPair, PsdOperator, Vector};
use crate::objectives::Objective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HessianError {
    #[error("objective '{0}' does not provide an exact Hessian")]
    NoHessian(String),
    #[error("strategy '{strategy}' needs {what}, which objective '{objective}' does not expose")]
    MissingStructure {
        strategy: &'static str,
        what: &'static str,
        objective: String,
    },
    #[error("residual vanishes at this point; rank-one coefficient (p-2)/|u|^p is undefined")]
    ZeroResidual,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no sample points given")]
    NoPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HessianStrategy {
    Exact,
    Zero,
    /// `Σᵢ ∇fᵢ∇fᵢᵀ` from per-term gradients.
    Fisher,
    /// A fixed matrix such as `AᵀA`.
    GaussNewtonConstant(Matrix),
    /// `(1/μ)AᵀDiag(softmax)A` for soft-maximum objectives.
    WeightedGaussNewton,
    /// `‖u‖^{p−2}JᵀGJ + ((p−2)/‖u‖ᵖ)∇f∇fᵀ` for power residuals.
    NonlinearPowerFull,
    /// `((p−2)/‖u‖ᵖ)∇f∇fᵀ` alone, solved by Sherman–Morrison.
    FisherRankOne,
}

impl HessianStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            HessianStrategy::Exact => "exact",
            HessianStrategy::Zero => "zero",
            HessianStrategy::Fisher => "fisher",
            HessianStrategy::GaussNewtonConstant(_) => "gauss_newton_constant",
            HessianStrategy::WeightedGaussNewton => "weighted_gauss_newton",
            HessianStrategy::NonlinearPowerFull => "nonlinear_power_full",
            HessianStrategy::FisherRankOne => "nonlinear_power_fisher_rank_one",
        }
    }

    /// Whether the operator changes with `x`.
    pub fn is_constant(&self) -> bool {
        matches!(self, HessianStrategy::Zero | HessianStrategy::GaussNewtonConstant(_))
    }

    /// Builds `H(x)`. `grad` is `∇f(x)` when the caller already has it.
    pub fn evaluate(
        &self,
        obj: &dyn Objective,
        x: &Vector,
        grad: Option<&Vector>,
    ) -> Result<StrategyOutput, HessianError> {
        let n = obj.dim();
        if x.len() != n {
            return Err(HessianError::DimensionMismatch { expected: n, got: x.len() });
        }
        let missing = |what| HessianError::MissingStructure {
            strategy: self.label(),
            what,
            objective: obj.name(),
        };
        let gradient = || grad.cloned().unwrap_or_else(|| obj.gradient(x));
        let plain = |operator| Ok(StrategyOutput { operator, degenerate: false });
        match self {
            HessianStrategy::Exact => {
                let h = obj.hessian(x).ok_or_else(|| HessianError::NoHessian(obj.name()))?;
                plain(PsdOperator::Dense(h))
            }
            HessianStrategy::Zero => plain(PsdOperator::Zero(n)),
            HessianStrategy::GaussNewtonConstant(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(HessianError::DimensionMismatch { expected: n, got: m.nrows() });
                }
                plain(PsdOperator::ConstantDense(m.clone()))
            }
            HessianStrategy::Fisher => {
                let s = obj.structure(x).ok_or_else(|| missing("per-term gradients"))?;
                let rows = s.per_term_gradients.ok_or_else(|| missing("per-term gradients"))?;
                plain(PsdOperator::Dense(symmetrize(rows.tr_mul(&rows))))
            }
            HessianStrategy::WeightedGaussNewton => {
                let s = obj.structure(x).ok_or_else(|| missing("softmax weights"))?;
                let (Some(w), Some(a), Some(mu)) = (s.softmax, s.design, s.smoothing_mu) else {
                    return Err(missing("softmax weights, design matrix and smoothing"));
                };
                plain(PsdOperator::Dense(weighted_gram(&a, &w) / mu))
            }
            HessianStrategy::NonlinearPowerFull | HessianStrategy::FisherRankOne => {
                let s = obj.structure(x).ok_or_else(|| missing("residuals and Jacobian"))?;
                let (Some(u), Some(j), Some(p)) = (s.residuals, s.jacobian, s.power_p) else {
                    return Err(missing("residuals, Jacobian and power"));
                };
                let gu = match &s.metric {
                    Some(g) => g * &u,
                    None => u.clone(),
                };
                let r = gu.dot(&u).max(0.0).sqrt();
                let full = matches!(self, HessianStrategy::NonlinearPowerFull);
                if p == 2.0 {
                    if full {
                        return plain(PsdOperator::Dense(metric_gram(&j, s.metric.as_ref())));
                    }
                    return plain(PsdOperator::Zero(n));
                }
                if r == 0.0 {
                    if full {
                        return Ok(StrategyOutput {
                            operator: PsdOperator::Zero(n),
                            degenerate: true,
                        });
                    }
                    return Err(HessianError::ZeroResidual);
                }
                let g = gradient();
                let coef = (p - 2.0) / r.powf(p);
                if full {
                    let mut h = metric_gram(&j, s.metric.as_ref()) * r.powf(p - 2.0);
                    h += &g * g.transpose() * coef;
                    plain(PsdOperator::Dense(symmetrize(h)))
                } else {
                    plain(PsdOperator::RankOnePlusBase {
                        coef,
                        v: g,
                        base_scale: 0.0,
                    })
                }
            }
        }
    }
}

/// Operator produced by a strategy at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutput {
    pub operator: PsdOperator,
    /// Set when the formula is singular at this point and a zero operator
    /// was substituted.
    pub degenerate: bool,
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// `AᵀDiag(w)A`.
pub fn weighted_gram(a: &Matrix, w: &Vector) -> Matrix {
    let mut scaled = a.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= w[i];
    }
    symmetrize(a.tr_mul(&scaled))
}

fn metric_gram(j: &Matrix, metric: Option<&Matrix>) -> Matrix {
    match metric {
        Some(g) => symmetrize(j.tr_mul(&(g * j))),
        None => symmetrize(j.tr_mul(j)),
    }
}

/// Smallest Rayleigh quotient `⟨Hh,h⟩/‖h‖²` over seeded random directions.
pub fn min_rayleigh_quotient(op: &PsdOperator, np: &NormPair, n_dirs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dim();
    let mut best = f64::INFINITY;
    for _ in 0..n_dirs {
        let h = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let nn = h.norm_squared();
        if nn == 0.0 {
            continue;
        }
        let q = op.apply(&h, np).expect("dimensions agree").dot(&h) / nn;
        best = best.min(q);
    }
    best
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm_sym(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// `C₁, C₂ ≥ 0` and `β` in `‖∇²f − H‖ ≤ C₁ + C₂‖∇f‖*^{1−β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InexactnessBound {
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
}

impl InexactnessBound {
    pub fn zero() -> Self {
        Self { c1: 0.0, c2: 0.0, beta: 0.0 }
    }

    pub fn envelope(&self, grad_norm: f64) -> f64 {
        self.c1 + self.c2 * grad_norm.powf(1.0 - self.beta)
    }
}

#[derive(Debug, Clone)]
pub struct InexactnessReport {
    pub bound: InexactnessBound,
    /// `e(x)` at each sample point.
    pub residuals: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// Least-squares slope of `log e` against `log ‖∇f‖*`, when at least two
    /// points have positive residual and distinct gradient norms.
    pub log_slope: Option<f64>,
    /// Whether user-supplied bounds dominate every residual.
    pub majorized: Option<bool>,
}

/// `e(x) = ‖L⁻¹(∇²f(x) − H(x))L⁻ᵀ‖₂` with `B = LLᵀ`.
pub fn inexactness_at(
    obj: &dyn Objective,
    strategy: &HessianStrategy,
    x: &Vector,
    np: &NormPair,
) -> Result<f64, HessianError> {
    let exact = obj.hessian(x).ok_or_else(|| HessianError::NoHessian(obj.name()))?;
    let out = strategy.evaluate(obj, x, None)?;
    let approx = out
        .operator
        .to_dense(np)
        .map_err(|_| HessianError::DimensionMismatch { expected: np.dim(), got: obj.dim() })?;
    let w = np
        .whiten(&(exact - approx))
        .map_err(|_| HessianError::DimensionMismatch { expected: np.dim(), got: obj.dim() })?;
    Ok(spectral_norm_sym(&w))
}

/// Measures `e(x)` at every point and fits the envelope for the given `β`.
///
/// `majorants[i]`, when given, is a theoretical upper bound for `e` at
/// `points[i]`; the report records whether all of them hold (with a 1e-10
/// absolute slack).
pub fn measure_inexactness(
    obj: &dyn Objective,
    strategy: &HessianStrategy,
    points: &[Vector],
    np: &NormPair,
    beta: f64,
    majorants: Option<&[f64]>,
) -> Result<InexactnessReport, HessianError> {
    if points.is_empty() {
        return Err(HessianError::NoPoints);
    }
    let mut residuals = Vec::with_capacity(points.len());
    let mut grad_norms = Vec::with_capacity(points.len());
    for x in points {
        residuals.push(inexactness_at(obj, strategy, x, np)?);
        let g = obj.gradient(x);
        grad_norms.push(
            np.dual_norm(&g)
                .map_err(|_| HessianError::DimensionMismatch { expected: np.dim(), got: g.len() })?,
        );
    }
    let bound = fit_envelope(&residuals, &grad_norms, beta);
    let majorized = majorants.map(|m| {
        m.iter()
            .zip(&residuals)
            .all(|(bound, e)| *e <= *bound + 1e-10)
    });
    Ok(InexactnessReport {
        bound,
        log_slope: log_slope(&residuals, &grad_norms),
        residuals,
        grad_norms,
        majorized,
    })
}

/// Smallest envelope `C₁ + C₂t` (`t = g^{1−β}`) lying above every sample,
/// where "smallest" means the least mean height over the sample. The
/// problem is a two-variable linear program, solved by enumerating vertices.
pub fn fit_envelope(residuals: &[f64], grad_norms: &[f64], beta: f64) -> InexactnessBound {
    let ts: Vec<f64> = grad_norms.iter().map(|g| g.powf(1.0 - beta)).collect();
    let es: Vec<f64> = residuals.iter().map(|e| e.max(0.0)).collect();
    let emax = es.iter().cloned().fold(0.0, f64::max);
    if emax == 0.0 {
        return InexactnessBound { c1: 0.0, c2: 0.0, beta };
    }
    let mean_t = ts.iter().sum::<f64>() / ts.len() as f64;
    let feasible = |c1: f64, c2: f64| {
        c1 >= 0.0
            && c2 >= 0.0
            && es
                .iter()
                .zip(&ts)
                .all(|(e, t)| c1 + c2 * t >= e * (1.0 - 1e-12) - 1e-300)
    };
    let mut best = (emax, 0.0);
    let mut best_cost = emax;
    let mut consider = |c1: f64, c2: f64| {
        if c1.is_finite() && c2.is_finite() && feasible(c1, c2) {
            let cost = c1 + c2 * mean_t;
            if cost < best_cost * (1.0 - 1e-12) {
                best = (c1, c2);
                best_cost = cost;
            }
        }
    };
    let ratio_max = es
        .iter()
        .zip(&ts)
        .filter(|(_, t)| **t > 0.0)
        .map(|(e, t)| e / t)
        .fold(0.0, f64::max);
    consider(0.0, ratio_max);
    for i in 0..es.len() {
        for j in (i + 1)..es.len() {
            let dt = ts[j] - ts[i];
            if dt.abs() <= 1e-300 {
                continue;
            }
            let c2 = (es[j] - es[i]) / dt;
            let c1 = es[i] - c2 * ts[i];
            consider(c1, c2);
        }
    }
    InexactnessBound { c1: best.0, c2: best.1, beta }
}

fn log_slope(residuals: &[f64], grad_norms: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = residuals
        .iter()
        .zip(grad_norms)
        .filter(|(e, g)| **e > 0.0 && **g > 0.0)
        .map(|(e, g)| (g.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
