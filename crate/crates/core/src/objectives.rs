//! Benchmark objectives exposed as first- and second-order oracles.
//!
//! Every oracle is immutable after construction. Besides value, gradient
//! and (optionally) the exact Hessian, an oracle can expose structural data
//! (residuals, Jacobians, softmax weights, per-term gradients) from which
//! the approximate Hessians in [`crate::hessian`] are assembled.

use crate::data::Dataset;
use crate::linalg::{Matrix, NormPair, Vector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("smoothing parameter must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("power must satisfy p >= 2, got {0}")]
    InvalidPower(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric must be symmetric positive definite")]
    InvalidMetric,
    #[error("residual operator requires dimension >= 1")]
    InvalidOperatorDim,
}

/// Structure beyond value/gradient/Hessian that approximations rely on.
#[derive(Debug, Clone, Default)]
pub struct StructuralData {
    pub residuals: Option<Vector>,
    pub jacobian: Option<Matrix>,
    /// Row `i` holds `∇fᵢ(x)`.
    pub per_term_gradients: Option<Matrix>,
    /// Softmax weights of a soft-maximum objective.
    pub softmax: Option<Vector>,
    pub design: Option<Matrix>,
    pub smoothing_mu: Option<f64>,
    pub power_p: Option<f64>,
    pub metric: Option<Matrix>,
}

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }

    fn structure(&self, _x: &Vector) -> Option<StructuralData> {
        None
    }
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Stable `log(1 + eᵗ)`.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Stable logistic function `1/(1 + e⁻ᵗ)`.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

// ---------------------------------------------------------------------------
// LogSumExp

/// `f(x) = μ log Σᵢ exp((⟨aᵢ,x⟩ − bᵢ)/μ)`.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    a: Matrix,
    b: Vector,
    mu: f64,
}

impl LogSumExp {
    pub fn new(data: &Dataset, mu: f64) -> Result<Self, ObjectiveError> {
        if !(mu > 0.0) {
            return Err(ObjectiveError::NonPositiveMu(mu));
        }
        if data.rows() == 0 || data.cols() == 0 {
            return Err(ObjectiveError::EmptyDataset);
        }
        Ok(Self {
            a: data.a.clone(),
            b: data.b.clone(),
            mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn design(&self) -> &Matrix {
        &self.a
    }

    /// Returns `(f, softmax)` with max-subtraction.
    pub fn value_and_softmax(&self, x: &Vector) -> (f64, Vector) {
        let z = (&self.a * x - &self.b) / self.mu;
        let zmax = z.max();
        let mut w = z.map(|zi| (zi - zmax).exp());
        let total = w.sum();
        w /= total;
        (self.mu * (zmax + total.ln()), w)
    }
}

impl Objective for LogSumExp {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn name(&self) -> String {
        format!("logsumexp(mu={})", self.mu)
    }

    fn value(&self, x: &Vector) -> f64 {
        self.value_and_softmax(x).0
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&self.value_and_softmax(x).1)
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let (f, s) = self.value_and_softmax(x);
        (f, self.a.tr_mul(&s))
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        // Aᵀ(Diag s − ssᵀ)A = Σᵢ sᵢ(aᵢ − ∇f)(aᵢ − ∇f)ᵀ; the centered form
        // avoids cancellation when the softmax is nearly one-hot
        let (_, s) = self.value_and_softmax(x);
        let g = self.a.tr_mul(&s);
        let mut centered = self.a.clone();
        for mut row in centered.row_iter_mut() {
            row -= g.transpose();
        }
        let mut weighted = centered.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= s[i];
        }
        Some(symmetrize(centered.tr_mul(&weighted) / self.mu))
    }

    fn structure(&self, x: &Vector) -> Option<StructuralData> {
        let (_, s) = self.value_and_softmax(x);
        Some(StructuralData {
            softmax: Some(s),
            design: Some(self.a.clone()),
            smoothing_mu: Some(self.mu),
            ..Default::default()
        })
    }
}

// ---------------------------------------------------------------------------
// Logistic regression

/// `f(x) = Σᵢ log(1 + exp(⟨aᵢ,x⟩ − bᵢ))`.
#[derive(Debug, Clone)]
pub struct Logistic {
    a: Matrix,
    b: Vector,
}

impl Logistic {
    pub fn new(data: &Dataset) -> Result<Self, ObjectiveError> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(ObjectiveError::EmptyDataset);
        }
        Ok(Self {
            a: data.a.clone(),
            b: data.b.clone(),
        })
    }

    pub fn design(&self) -> &Matrix {
        &self.a
    }

    fn margins(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn name(&self) -> String {
        "logistic".into()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.margins(x).iter().map(|&t| softplus(t)).sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let s = self.margins(x).map(sigmoid);
        self.a.tr_mul(&s)
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let t = self.margins(x);
        let mut weighted = self.a.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= sigmoid(t[i]) * sigmoid(-t[i]);
        }
        Some(symmetrize(self.a.tr_mul(&weighted)))
    }

    fn structure(&self, x: &Vector) -> Option<StructuralData> {
        let t = self.margins(x);
        let mut per_term = self.a.clone();
        for (i, mut row) in per_term.row_iter_mut().enumerate() {
            row *= sigmoid(t[i]);
        }
        Some(StructuralData {
            per_term_gradients: Some(per_term),
            design: Some(self.a.clone()),
            ..Default::default()
        })
    }
}

// ---------------------------------------------------------------------------
// Residual operators and f = (1/p)‖u(x)‖_G^p

/// A smooth map `u : Rⁿ → Rᵈ`.
pub trait ResidualOperator: Send + Sync + std::fmt::Debug {
    /// `(d, n)`.
    fn dims(&self) -> (usize, usize);
    fn name(&self) -> String;
    fn residuals(&self, x: &Vector) -> Vector;
    /// `d × n` Jacobian.
    fn jacobian(&self, x: &Vector) -> Matrix;
    /// `∇²uᵢ(x)` for each component, when available.
    fn second_derivatives(&self, x: &Vector) -> Option<Vec<Matrix>>;
}

/// `u(x) = Ax − b`.
#[derive(Debug, Clone)]
pub struct LinearResidual {
    a: Matrix,
    b: Vector,
}

impl LinearResidual {
    pub fn new(data: &Dataset) -> Result<Self, ObjectiveError> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(ObjectiveError::EmptyDataset);
        }
        Ok(Self {
            a: data.a.clone(),
            b: data.b.clone(),
        })
    }

    pub fn design(&self) -> &Matrix {
        &self.a
    }
}

impl ResidualOperator for LinearResidual {
    fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.a.ncols())
    }

    fn name(&self) -> String {
        "linear".into()
    }

    fn residuals(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }

    fn jacobian(&self, _x: &Vector) -> Matrix {
        self.a.clone()
    }

    fn second_derivatives(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        let (d, n) = self.dims();
        Some(vec![Matrix::zeros(n, n); d])
    }
}

/// Two-dimensional Rosenbrock residuals `u(x) = (1 − x₁, 10(x₂ − x₁²))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RosenbrockResidual;

impl ResidualOperator for RosenbrockResidual {
    fn dims(&self) -> (usize, usize) {
        (2, 2)
    }

    fn name(&self) -> String {
        "rosenbrock".into()
    }

    fn residuals(&self, x: &Vector) -> Vector {
        Vector::from_vec(vec![1.0 - x[0], 10.0 * (x[1] - x[0] * x[0])])
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        Matrix::from_row_slice(2, 2, &[-1.0, 0.0, -20.0 * x[0], 10.0])
    }

    fn second_derivatives(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        let mut h2 = Matrix::zeros(2, 2);
        h2[(0, 0)] = -20.0;
        Some(vec![Matrix::zeros(2, 2), h2])
    }
}

/// Chebyshev-type residuals `u₁ = ½(1 − x₁)`, `uᵢ = xᵢ − (2x²ᵢ₋₁ − 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ChebyshevResidual {
    d: usize,
}

impl ChebyshevResidual {
    pub fn new(d: usize) -> Result<Self, ObjectiveError> {
        if d < 1 {
            return Err(ObjectiveError::InvalidOperatorDim);
        }
        Ok(Self { d })
    }
}

impl ResidualOperator for ChebyshevResidual {
    fn dims(&self) -> (usize, usize) {
        (self.d, self.d)
    }

    fn name(&self) -> String {
        format!("chebyshev(d={})", self.d)
    }

    fn residuals(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.d, |i, _| {
            if i == 0 {
                0.5 * (1.0 - x[0])
            } else {
                x[i] - (2.0 * x[i - 1] * x[i - 1] - 1.0)
            }
        })
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        let mut j = Matrix::zeros(self.d, self.d);
        j[(0, 0)] = -0.5;
        for i in 1..self.d {
            j[(i, i)] = 1.0;
            j[(i, i - 1)] = -4.0 * x[i - 1];
        }
        j
    }

    fn second_derivatives(&self, _x: &Vector) -> Option<Vec<Matrix>> {
        let mut out = Vec::with_capacity(self.d);
        out.push(Matrix::zeros(self.d, self.d));
        for i in 1..self.d {
            let mut m = Matrix::zeros(self.d, self.d);
            m[(i - 1, i - 1)] = -4.0;
            out.push(m);
        }
        Some(out)
    }
}

/// `f(x) = (1/p)⟨G u(x), u(x)⟩^{p/2}`.
#[derive(Debug)]
pub struct PowerResidual {
    op: Box<dyn ResidualOperator>,
    p: f64,
    metric: Option<Matrix>,
}

/// Evaluated pieces of a power-residual objective at one point.
#[derive(Debug, Clone)]
pub struct PowerPieces {
    pub u: Vector,
    pub jacobian: Matrix,
    /// `Gu` (or `u` when no metric is set).
    pub gu: Vector,
    /// `‖u‖_G`.
    pub r: f64,
}

impl PowerResidual {
    pub fn new(
        op: Box<dyn ResidualOperator>,
        p: f64,
        metric: Option<Matrix>,
    ) -> Result<Self, ObjectiveError> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(ObjectiveError::InvalidPower(p));
        }
        if let Some(g) = &metric {
            let d = op.dims().0;
            if g.nrows() != d || g.ncols() != d {
                return Err(ObjectiveError::DimensionMismatch {
                    expected: d,
                    got: g.nrows(),
                });
            }
            if NormPair::new(g.clone()).is_err() {
                return Err(ObjectiveError::InvalidMetric);
            }
        }
        Ok(Self { op, p, metric })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn operator(&self) -> &dyn ResidualOperator {
        self.op.as_ref()
    }

    pub fn pieces(&self, x: &Vector) -> PowerPieces {
        let u = self.op.residuals(x);
        let jacobian = self.op.jacobian(x);
        let gu = match &self.metric {
            Some(g) => g * &u,
            None => u.clone(),
        };
        let r = gu.dot(&u).max(0.0).sqrt();
        PowerPieces { u, jacobian, gu, r }
    }

    /// `JᵀGJ`.
    pub fn gauss_newton(&self, pieces: &PowerPieces) -> Matrix {
        let gj = match &self.metric {
            Some(g) => g * &pieces.jacobian,
            None => pieces.jacobian.clone(),
        };
        symmetrize(pieces.jacobian.tr_mul(&gj))
    }

    fn gradient_from(&self, pc: &PowerPieces) -> Vector {
        let n = self.dim();
        if pc.r == 0.0 {
            return Vector::zeros(n);
        }
        pc.jacobian.tr_mul(&pc.gu) * pc.r.powf(self.p - 2.0)
    }
}

impl Objective for PowerResidual {
    fn dim(&self) -> usize {
        self.op.dims().1
    }

    fn name(&self) -> String {
        format!("power_residual({}, p={})", self.op.name(), self.p)
    }

    fn value(&self, x: &Vector) -> f64 {
        let u = self.op.residuals(x);
        let sq = match &self.metric {
            Some(g) => (g * &u).dot(&u),
            None => u.norm_squared(),
        };
        sq.max(0.0).powf(self.p / 2.0) / self.p
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.gradient_from(&self.pieces(x))
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let pc = self.pieces(x);
        (pc.r.powf(self.p) / self.p, self.gradient_from(&pc))
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let pc = self.pieces(x);
        let n = self.dim();
        if pc.r == 0.0 {
            if self.p > 2.0 {
                return Some(Matrix::zeros(n, n));
            }
            // p = 2: JᵀGJ survives at a zero residual
            return Some(self.gauss_newton(&pc));
        }
        let mut inner = self.gauss_newton(&pc);
        let second = self.op.second_derivatives(x)?;
        for (i, m) in second.iter().enumerate() {
            if pc.gu[i] != 0.0 {
                inner += m * pc.gu[i];
            }
        }
        let mut h = inner * pc.r.powf(self.p - 2.0);
        if self.p != 2.0 {
            let jgu = pc.jacobian.tr_mul(&pc.gu);
            h += &jgu * jgu.transpose() * ((self.p - 2.0) * pc.r.powf(self.p - 4.0));
        }
        Some(symmetrize(h))
    }

    fn structure(&self, x: &Vector) -> Option<StructuralData> {
        let pc = self.pieces(x);
        Some(StructuralData {
            residuals: Some(pc.u),
            jacobian: Some(pc.jacobian),
            power_p: Some(self.p),
            metric: self.metric.clone(),
            ..Default::default()
        })
    }
}

// ---------------------------------------------------------------------------
// Small analytic objectives

/// `f(x) = (1/p)‖x‖_B^p`.
#[derive(Debug, Clone)]
pub struct PNorm {
    p: f64,
    np: NormPair,
}

impl PNorm {
    pub fn new(p: f64, np: NormPair) -> Result<Self, ObjectiveError> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(ObjectiveError::InvalidPower(p));
        }
        Ok(Self { p, np })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn bx_and_norm(&self, x: &Vector) -> (Vector, f64) {
        let bx = self.np.matrix() * x;
        let r = bx.dot(x).max(0.0).sqrt();
        (bx, r)
    }
}

impl Objective for PNorm {
    fn dim(&self) -> usize {
        self.np.dim()
    }

    fn name(&self) -> String {
        format!("pnorm(p={})", self.p)
    }

    fn value(&self, x: &Vector) -> f64 {
        self.bx_and_norm(x).1.powf(self.p) / self.p
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let (bx, r) = self.bx_and_norm(x);
        if r == 0.0 {
            return Vector::zeros(x.len());
        }
        bx * r.powf(self.p - 2.0)
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let (bx, r) = self.bx_and_norm(x);
        let n = x.len();
        if r == 0.0 {
            return Some(if self.p == 2.0 {
                self.np.matrix().clone()
            } else {
                Matrix::zeros(n, n)
            });
        }
        let mut h = self.np.matrix() * r.powf(self.p - 2.0);
        if self.p != 2.0 {
            h += &bx * bx.transpose() * ((self.p - 2.0) * r.powf(self.p - 4.0));
        }
        Some(symmetrize(h))
    }
}

/// One-dimensional `f(x) = eˣ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpScalar;

impl Objective for ExpScalar {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        "exp".into()
    }

    fn value(&self, x: &Vector) -> f64 {
        x[0].exp()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        Vector::from_element(1, x[0].exp())
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_element(1, 1, x[0].exp()))
    }
}

/// `f(x) = ½(x − c)ᵀQ(x − c)` with `Q` symmetric.
#[derive(Debug, Clone)]
pub struct Quadratic {
    q: Matrix,
    center: Vector,
}

impl Quadratic {
    pub fn new(q: Matrix, center: Vector) -> Result<Self, ObjectiveError> {
        if !q.is_square() || q.nrows() != center.len() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: center.len(),
                got: q.nrows(),
            });
        }
        Ok(Self {
            q: symmetrize(q),
            center,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn name(&self) -> String {
        "quadratic".into()
    }

    fn value(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        0.5 * (&self.q * &d).dot(&d)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.q * (x - &self.center)
    }

    fn hessian(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.q.clone())
    }
}

/// Multiplies an objective by a positive constant.
#[derive(Debug)]
pub struct Scaled<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O: Objective> Objective for Scaled<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn name(&self) -> String {
        format!("{}*{}", self.factor, self.inner.name())
    }

    fn value(&self, x: &Vector) -> f64 {
        self.factor * self.inner.value(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.inner.gradient(x) * self.factor
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        self.inner.hessian(x).map(|h| h * self.factor)
    }
}

/// `x ↦ f(Ax + b)`.
#[derive(Debug)]
pub struct Affine<O> {
    pub inner: O,
    pub a: Matrix,
    pub b: Vector,
}

impl<O: Objective> Objective for Affine<O> {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn name(&self) -> String {
        format!("affine({})", self.inner.name())
    }

    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(&(&self.a * x + &self.b))
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&self.inner.gradient(&(&self.a * x + &self.b)))
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let h = self.inner.hessian(&(&self.a * x + &self.b))?;
        Some(symmetrize(self.a.tr_mul(&(h * &self.a))))
    }
}
