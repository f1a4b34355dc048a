//! Gradient-normalized smoothness.
//!
//! For a point `x`, a direction `g` and a matrix `H(x)`, `γ(x, g)` is the
//! largest radius `γ` such that
//!
//! ```text
//! ‖∇f(x+h) − ∇f(x) − H(x)h‖* ≤ ‖g‖*‖h‖/γ   for all h ∈ B_γ ∩ O_{x,g},
//! O_{x,g} = {h : ⟨∇²f(x)h, h⟩ + ⟨g, h⟩ ≤ 0}.
//! ```
//!
//! This module estimates `γ` by sampling, provides closed-form lower
//! bounds for standard smoothness classes, and the harmonic-mean rules
//! that combine them.

use crate::hessian::{HessianError, HessianStrategy};
use crate::linalg::{solve_regularized, LinalgError, Matrix, NormPair, PsdOperator, Vector, GAMMA_MAX};
use crate::objectives::Objective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnsError {
    #[error("direction g has zero dual norm")]
    ZeroDirection,
    #[error("objective '{0}' has no exact Hessian; the local region needs one")]
    NoHessian(String),
    #[error(transparent)]
    Hessian(#[from] HessianError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid bound specification: {0}")]
    InvalidSpec(String),
}

/// Membership in `O_{x,g}` with absolute slack `1e-12(1 + ‖h‖²)`.
pub fn in_local_region(hess: &Matrix, g: &Vector, h: &Vector) -> bool {
    let q = (hess * h).dot(h) + g.dot(h);
    q <= 1e-12 * (1.0 + h.norm_squared())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnsConfig {
    /// Random directions for `n ≥ 2` (each used with both signs).
    pub n_dirs: usize,
    /// Radii scanned along each direction.
    pub n_radii: usize,
    /// Grid points per side for `n = 1`.
    pub grid_points: usize,
    /// Relative bisection tolerance.
    pub tol: f64,
    pub seed: u64,
    /// Lower end of the bisection bracket; default `1e-8(1 + ‖x‖)`.
    pub gamma_lo: Option<f64>,
}

impl Default for GnsConfig {
    fn default() -> Self {
        Self {
            n_dirs: 64,
            n_radii: 16,
            grid_points: 2048,
            tol: 1e-3,
            seed: 0,
            gamma_lo: None,
        }
    }
}

/// Precomputed data for evaluating the violation ratio at one point.
pub struct GammaProbe<'a> {
    obj: &'a dyn Objective,
    np: &'a NormPair,
    x: Vector,
    g: Vector,
    g_dual: f64,
    grad_x: Vector,
    grad_x_dual: f64,
    hess: Matrix,
    approx: PsdOperator,
    approx_dense: Matrix,
    /// Primal-unit directions that do not depend on `γ`.
    fixed_dirs: Vec<Vector>,
    cfg: GnsConfig,
}

impl<'a> GammaProbe<'a> {
    pub fn new(
        obj: &'a dyn Objective,
        strategy: &HessianStrategy,
        x: &Vector,
        g: &Vector,
        np: &'a NormPair,
        cfg: &GnsConfig,
    ) -> Result<Self, GnsError> {
        let g_dual = np.dual_norm(g)?;
        if !(g_dual > 0.0) {
            return Err(GnsError::ZeroDirection);
        }
        let hess = obj.hessian(x).ok_or_else(|| GnsError::NoHessian(obj.name()))?;
        let grad_x = obj.gradient(x);
        let grad_x_dual = np.dual_norm(&grad_x)?;
        let approx = strategy.evaluate(obj, x, Some(&grad_x))?.operator;
        let approx_dense = approx.to_dense(np)?;
        let n = x.len();

        let mut fixed_dirs = Vec::new();
        if n >= 2 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..cfg.n_dirs {
                let d = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                fixed_dirs.push(d.clone());
                fixed_dirs.push(-d);
            }
            // steepest descent for g in the B-geometry
            fixed_dirs.push(-np.solve_b(g)?);
            // Newton direction for g, when ∇²f is positive definite
            if let Some(chol) = hess.clone().cholesky() {
                fixed_dirs.push(-chol.solve(g));
            }
        }
        let fixed_dirs = fixed_dirs
            .into_iter()
            .filter_map(|d| unit(np, d))
            .collect();

        Ok(Self {
            obj,
            np,
            x: x.clone(),
            g: g.clone(),
            g_dual,
            grad_x,
            grad_x_dual,
            hess,
            approx,
            approx_dense,
            fixed_dirs,
            cfg: cfg.clone(),
        })
    }

    /// Relative error ratio `‖r(h)‖*·γ/(‖g‖*‖h‖)` for one displacement.
    fn ratio(&self, h: &Vector, h_norm: f64, gamma: f64) -> f64 {
        let grad_h = self.obj.gradient(&(&self.x + h));
        let lin = &self.approx_dense * h;
        let resid = &grad_h - &self.grad_x - &lin;
        let raw = self.np.dual_norm(&resid).unwrap_or(f64::INFINITY);
        // cancellation noise in forming the residual is not curvature
        let floor = 64.0
            * f64::EPSILON
            * (self.np.dual_norm(&grad_h).unwrap_or(0.0)
                + self.grad_x_dual
                + self.np.dual_norm(&lin).unwrap_or(0.0));
        let err = (raw - floor).max(0.0);
        err * gamma / (self.g_dual * h_norm)
    }

    /// Interval `[lo, hi] ⊂ (0, γ]` of radii `t` with `t·d ∈ O_{x,g}`.
    fn feasible_radii(&self, d: &Vector, gamma: f64) -> Option<(f64, f64)> {
        let a = (&self.hess * d).dot(d);
        let b = self.g.dot(d);
        // t²a + tb ≤ 0 for t > 0  ⇔  ta + b ≤ 0
        let scale = a.abs() + b.abs();
        if a > 1e-14 * scale {
            let t = -b / a;
            (t > 0.0).then(|| (0.0, t.min(gamma)))
        } else if a < -1e-14 * scale {
            let t = (-b / a).max(0.0);
            (t < gamma).then_some((t, gamma))
        } else if b <= 0.0 {
            Some((0.0, gamma))
        } else {
            None
        }
    }

    fn scan_direction(&self, d: &Vector, gamma: f64) -> f64 {
        let Some((lo, hi)) = self.feasible_radii(d, gamma) else {
            return 0.0;
        };
        let m = self.cfg.n_radii.max(1);
        let mut worst: f64 = 0.0;
        for j in 1..=m {
            let t = lo + (hi - lo) * j as f64 / m as f64;
            if t <= 0.0 {
                continue;
            }
            let h = d * t;
            if in_local_region(&self.hess, &self.g, &h) {
                worst = worst.max(self.ratio(&h, t, gamma));
            }
        }
        worst
    }

    /// Largest ratio over the sample set associated with `γ`; the
    /// definition holds on the sample iff this is at most 1.
    pub fn violation(&self, gamma: f64) -> f64 {
        let n = self.x.len();
        let mut worst: f64 = 0.0;
        if n == 1 {
            let unit_len = self.np.primal_norm(&Vector::from_element(1, 1.0)).unwrap_or(1.0);
            let m = self.cfg.grid_points.max(1);
            for sign in [1.0, -1.0] {
                let d = Vector::from_element(1, sign / unit_len);
                let mut radii: Vec<f64> = (1..=m).map(|j| gamma * j as f64 / m as f64).collect();
                if let Some((lo, hi)) = self.feasible_radii(&d, gamma) {
                    radii.push(hi);
                    if lo > 0.0 {
                        radii.push(lo);
                    }
                }
                for t in radii {
                    let h = &d * t;
                    if in_local_region(&self.hess, &self.g, &h) {
                        worst = worst.max(self.ratio(&h, t, gamma));
                    }
                }
            }
            return worst;
        }
        for d in &self.fixed_dirs {
            worst = worst.max(self.scan_direction(d, gamma));
        }
        // the step the method itself would take with this γ
        let lambda = self.grad_x_dual / gamma;
        if lambda > 0.0 {
            if let Ok(step) = solve_regularized(&self.approx, self.np, lambda, &self.grad_x) {
                if let Some(d) = unit(self.np, -step) {
                    worst = worst.max(self.scan_direction(&d, gamma));
                }
            }
        }
        worst
    }

    /// Bisection in `log γ` for the largest `γ` with `violation(γ) ≤ 1`.
    pub fn estimate(&self) -> f64 {
        if self.violation(GAMMA_MAX) <= 1.0 {
            return GAMMA_MAX;
        }
        let mut lo = self.cfg.gamma_lo.unwrap_or(1e-8 * (1.0 + self.x.norm()));
        if self.violation(lo) > 1.0 {
            return lo;
        }
        let mut hi = GAMMA_MAX;
        while hi / lo > 1.0 + self.cfg.tol {
            let mid = (lo * hi).sqrt();
            if self.violation(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn unit(np: &NormPair, d: Vector) -> Option<Vector> {
    let norm = np.primal_norm(&d).ok()?;
    (norm > 0.0 && norm.is_finite()).then(|| d / norm)
}

/// Sampled estimate of `γ(x, g)` for the strategy's `H(x)`, capped at
/// [`GAMMA_MAX`]. Sampling can miss the worst displacement, so the value is
/// biased upward relative to the true `γ`.
pub fn estimate_gamma(
    obj: &dyn Objective,
    strategy: &HessianStrategy,
    x: &Vector,
    g: &Vector,
    np: &NormPair,
    cfg: &GnsConfig,
) -> Result<f64, GnsError> {
    Ok(GammaProbe::new(obj, strategy, x, g, np, cfg)?.estimate())
}

// ---------------------------------------------------------------------------
// Closed-form lower bounds

/// Hessian Hölder continuous of degree `ν` with constant `L`.
pub fn gamma_bound_holder_hessian(l: f64, nu: f64, gnorm: f64) -> f64 {
    ((1.0 + nu) * gnorm / l).powf(1.0 / (1.0 + nu))
}

/// Third derivative Hölder continuous of degree `ν` with constant `L₃`.
pub fn gamma_bound_holder_third(l3: f64, nu: f64, gnorm: f64) -> f64 {
    ((1.0 + nu) * gnorm / (2f64.powf(1.0 + nu) * l3)).powf(1.0 / (2.0 + nu))
}

/// Quasi-self-concordant with parameter `M`.
pub fn gamma_bound_qsc(m: f64) -> f64 {
    1.0 / m
}

/// `(L0, L1)`-smooth: `(‖g‖*/(L0 + L1‖∇f(x)‖*))·(1 + exp(‖g‖*/‖∇f(x)‖*))⁻¹`.
pub fn gamma_bound_l0l1(l0: f64, l1: f64, gnorm: f64, gradnorm: f64) -> f64 {
    gnorm / (l0 + l1 * gradnorm) / (1.0 + (gnorm / gradnorm).exp())
}

/// Second-order `(M0, M1)`-smooth: `(2‖g‖*/(M0 + M1‖∇f(x)‖*))^{1/2}`.
pub fn gamma_bound_m0m1(m0: f64, m1: f64, gnorm: f64, gradnorm: f64) -> f64 {
    (2.0 * gnorm / (m0 + m1 * gradnorm)).sqrt()
}

/// Generalized self-concordant of degree `q ∈ [0, 2)` with constant `G_q`.
pub fn gamma_bound_gen_sc(gq: f64, q: f64, gnorm: f64) -> f64 {
    let lead = 0.5f64.powf((8.0 + 2.0 * q) / ((2.0 - q) * (4.0 - q)));
    lead * (gnorm.powf(2.0 - q) / (gq * gq)).powf(1.0 / (4.0 - q))
}

/// `(q, G_q)` of `(1/p)‖x‖ᵖ` in its own geometry.
pub fn pnorm_gen_sc_params(p: f64) -> (f64, f64) {
    (2.0 * (p - 3.0) / (p - 2.0), (p - 1.0) * (p - 2.0))
}

/// `(M_{1−α}, α)` of `(1/p)‖x‖ᵖ`, `p > 2`.
pub fn pnorm_monomial(p: f64) -> (f64, f64) {
    let alpha = 1.0 / (p - 1.0);
    let m = ((p - 1.0) * (p - 2.0) * 2f64.powf(3.0 * p - 7.0)).powf((p - 2.0) / (p - 1.0));
    (m, alpha)
}

/// Harmonic combination `(Σ 1/γᵢ)⁻¹`; values at or above [`GAMMA_MAX`]
/// count as infinite.
pub fn combine_harmonic(bounds: &[f64]) -> f64 {
    let denom: f64 = bounds
        .iter()
        .filter(|&&g| g < GAMMA_MAX)
        .map(|&g| 1.0 / g)
        .sum();
    if denom == 0.0 {
        GAMMA_MAX
    } else {
        (1.0 / denom).min(GAMMA_MAX)
    }
}

/// Bound for `x ↦ f(Ax + b)` given a bound for `f` and `‖A‖`.
pub fn affine_transform_bound(gamma: f64, a_norm: f64) -> f64 {
    gamma / a_norm
}

/// Monomial terms `(M_{1−αᵢ}, αᵢ)` of the harmonic bound
/// `π(t) = (Σᵢ Mᵢ/t^{αᵢ})⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaBoundSpec {
    pub terms: Vec<(f64, f64)>,
}

impl GammaBoundSpec {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self, GnsError> {
        let spec = Self { terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn single(m: f64, alpha: f64) -> Result<Self, GnsError> {
        Self::new(vec![(m, alpha)])
    }

    pub fn validate(&self) -> Result<(), GnsError> {
        if self.terms.is_empty() {
            return Err(GnsError::InvalidSpec("no terms".into()));
        }
        for &(m, a) in &self.terms {
            if !(0.0..=1.0).contains(&a) {
                return Err(GnsError::InvalidSpec(format!("alpha {a} outside [0, 1]")));
            }
            if !(m >= 0.0) || !m.is_finite() {
                return Err(GnsError::InvalidSpec(format!("coefficient {m} must be finite and >= 0")));
            }
        }
        if !self.terms.iter().any(|&(m, _)| m > 0.0) {
            return Err(GnsError::InvalidSpec("all coefficients are zero".into()));
        }
        Ok(())
    }

    /// Number of terms.
    pub fn d(&self) -> usize {
        self.terms.len()
    }

    /// `α = min αᵢ`.
    pub fn alpha_min(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min)
    }
}

/// `π(t) = (Σᵢ Mᵢ/t^{αᵢ})⁻¹`.
pub fn pi_bound(spec: &GammaBoundSpec, gnorm: f64) -> f64 {
    let denom: f64 = spec.terms.iter().map(|&(m, a)| m / gnorm.powf(a)).sum();
    if denom == 0.0 {
        GAMMA_MAX
    } else {
        (1.0 / denom).min(GAMMA_MAX)
    }
}
