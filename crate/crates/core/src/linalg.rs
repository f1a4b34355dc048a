//! Dense linear algebra shared by every step of the method.
//!
//! A run fixes a symmetric positive-definite matrix `B` which induces the
//! primal norm `‖h‖ = ⟨Bh, h⟩^{1/2}` on steps and the dual norm
//! `‖s‖* = ⟨s, B⁻¹s⟩^{1/2}` on gradients. Each iteration reduces to a solve
//! with `H + λB` where `H ⪰ 0` is the (approximate) Hessian.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Finite stand-in for `γ = +∞`.
pub const GAMMA_MAX: f64 = 1e12;

const SYMMETRY_RTOL: f64 = 1e-12;
const JITTER_SCALE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("regularized system is not positive definite even after jitter (λ = {lambda:e})")]
    FactorizationFailed { lambda: f64 },
    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
}

fn check_dim(expected: usize, got: usize) -> Result<(), LinalgError> {
    if expected != got {
        return Err(LinalgError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn relative_asymmetry(m: &Matrix) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

/// The fixed preconditioner `B` together with its cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct NormPair {
    b: Matrix,
    chol: Cholesky<f64, Dyn>,
}

impl NormPair {
    pub fn new(b: Matrix) -> Result<Self, LinalgError> {
        if !b.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: b.nrows(),
                got: b.ncols(),
            });
        }
        let asym = relative_asymmetry(&b);
        if asym > SYMMETRY_RTOL {
            return Err(LinalgError::NotSymmetric(asym));
        }
        let chol = Cholesky::new(b.clone()).ok_or(LinalgError::NotPositiveDefinite)?;
        Ok(Self { b, chol })
    }

    /// Euclidean geometry, `B = I`.
    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n, n)).expect("identity is positive definite")
    }

    /// `B = AᵀA`, the Gauss-Newton geometry of a design matrix.
    pub fn gram(a: &Matrix) -> Result<Self, LinalgError> {
        let mut b = a.tr_mul(a);
        // the product is symmetric up to roundoff; force it exactly
        b = (&b + b.transpose()) * 0.5;
        Self::new(b)
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    /// Lower-triangular `L` with `B = LLᵀ`.
    pub fn factor(&self) -> Matrix {
        self.chol.l()
    }

    pub fn apply_b(&self, v: &Vector) -> Result<Vector, LinalgError> {
        check_dim(self.dim(), v.len())?;
        Ok(&self.b * v)
    }

    /// `B⁻¹s` through two triangular solves with the cached factor.
    pub fn solve_b(&self, s: &Vector) -> Result<Vector, LinalgError> {
        check_dim(self.dim(), s.len())?;
        Ok(self.chol.solve(s))
    }

    pub fn primal_norm(&self, v: &Vector) -> Result<f64, LinalgError> {
        check_dim(self.dim(), v.len())?;
        Ok((&self.b * v).dot(v).max(0.0).sqrt())
    }

    pub fn dual_norm(&self, s: &Vector) -> Result<f64, LinalgError> {
        let binv_s = self.solve_b(s)?;
        Ok(binv_s.dot(s).max(0.0).sqrt())
    }

    /// `L⁻¹ M L⁻ᵀ`; its spectral norm is the operator norm of `M` viewed
    /// as a map from the primal to the dual space.
    pub fn whiten(&self, m: &Matrix) -> Result<Matrix, LinalgError> {
        check_dim(self.dim(), m.nrows())?;
        check_dim(self.dim(), m.ncols())?;
        let l = self.chol.l_dirty();
        let left = l
            .solve_lower_triangular(m)
            .ok_or(LinalgError::NotPositiveDefinite)?;
        let both = l
            .solve_lower_triangular(&left.transpose())
            .ok_or(LinalgError::NotPositiveDefinite)?;
        Ok((&both + both.transpose()) * 0.5)
    }
}

/// A positive-semidefinite linear operator standing in for the Hessian.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdOperator {
    /// A matrix recomputed at every point.
    Dense(Matrix),
    /// A matrix that does not depend on the point (e.g. `AᵀA`).
    ConstantDense(Matrix),
    /// `c·vvᵀ + s·B`, solved through Sherman–Morrison.
    RankOnePlusBase {
        coef: f64,
        v: Vector,
        base_scale: f64,
    },
    Zero(usize),
}

impl PsdOperator {
    pub fn dim(&self) -> usize {
        match self {
            PsdOperator::Dense(m) | PsdOperator::ConstantDense(m) => m.nrows(),
            PsdOperator::RankOnePlusBase { v, .. } => v.len(),
            PsdOperator::Zero(n) => *n,
        }
    }

    pub fn apply(&self, h: &Vector, np: &NormPair) -> Result<Vector, LinalgError> {
        check_dim(self.dim(), h.len())?;
        Ok(match self {
            PsdOperator::Dense(m) | PsdOperator::ConstantDense(m) => m * h,
            PsdOperator::RankOnePlusBase { coef, v, base_scale } => {
                let mut out = v * (coef * v.dot(h));
                if *base_scale != 0.0 {
                    out += np.apply_b(h)? * *base_scale;
                }
                out
            }
            PsdOperator::Zero(n) => Vector::zeros(*n),
        })
    }

    pub fn to_dense(&self, np: &NormPair) -> Result<Matrix, LinalgError> {
        check_dim(np.dim(), self.dim())?;
        Ok(match self {
            PsdOperator::Dense(m) | PsdOperator::ConstantDense(m) => m.clone(),
            PsdOperator::RankOnePlusBase { coef, v, base_scale } => {
                v * v.transpose() * *coef + np.matrix() * *base_scale
            }
            PsdOperator::Zero(n) => Matrix::zeros(*n, *n),
        })
    }

    /// Scale used for relative PSD tolerances.
    pub fn scale(&self, np: &NormPair) -> f64 {
        match self.to_dense(np) {
            Ok(m) => m.amax(),
            Err(_) => 0.0,
        }
    }
}

/// Solves `(H + λB)d = g`.
///
/// Dense operators are factored with Cholesky; a failed factorization is
/// retried once with `1e-12·trace` added to the diagonal and then reported.
/// Rank-one operators take the Sherman–Morrison path.
pub fn solve_regularized(
    op: &PsdOperator,
    np: &NormPair,
    lambda: f64,
    g: &Vector,
) -> Result<Vector, LinalgError> {
    if !(lambda > 0.0) {
        return Err(LinalgError::NonPositiveLambda(lambda));
    }
    check_dim(np.dim(), op.dim())?;
    check_dim(np.dim(), g.len())?;
    match op {
        PsdOperator::Zero(_) => Ok(np.solve_b(g)? / lambda),
        PsdOperator::RankOnePlusBase { coef, v, base_scale } => {
            solve_rank_one_regularized(*coef, v, lambda + base_scale, np, g)
        }
        PsdOperator::Dense(h) | PsdOperator::ConstantDense(h) => {
            let system = h + np.matrix() * lambda;
            if let Some(chol) = Cholesky::new(system.clone()) {
                return Ok(chol.solve(g));
            }
            let jitter = JITTER_SCALE * system.trace().abs();
            let mut jittered = system;
            for i in 0..jittered.nrows() {
                jittered[(i, i)] += jitter;
            }
            log::debug!("Cholesky of H + λB failed, retrying with jitter {jitter:e}");
            Cholesky::new(jittered)
                .map(|chol| chol.solve(g))
                .ok_or(LinalgError::FactorizationFailed { lambda })
        }
    }
}

/// Solves `(c·vvᵀ + λB)d = g` with the Sherman–Morrison formula:
///
/// `d = B⁻¹g/λ − (c/λ²)·⟨v, B⁻¹g⟩/(1 + (c/λ)⟨v, B⁻¹v⟩)·B⁻¹v`.
pub fn solve_rank_one_regularized(
    coef: f64,
    v: &Vector,
    lambda: f64,
    np: &NormPair,
    g: &Vector,
) -> Result<Vector, LinalgError> {
    if !(lambda > 0.0) {
        return Err(LinalgError::NonPositiveLambda(lambda));
    }
    check_dim(np.dim(), v.len())?;
    let binv_g = np.solve_b(g)?;
    if coef == 0.0 {
        return Ok(binv_g / lambda);
    }
    let binv_v = np.solve_b(v)?;
    let denom = 1.0 + coef / lambda * v.dot(&binv_v);
    let weight = coef / (lambda * lambda) * v.dot(&binv_g) / denom;
    Ok(binv_g / lambda - binv_v * weight)
}
