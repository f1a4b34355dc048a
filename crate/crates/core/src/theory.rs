//! Iteration-complexity predictors.
//!
//! All predictors take the harmonic-monomial bound `π` on `γ` (a
//! [`GammaBoundSpec`]) plus problem constants, and return the ceiling of
//! the corresponding bound. Negative logarithms (start already inside the
//! tolerance) are clamped at zero.

use crate::gns::{pi_bound, GammaBoundSpec, GnsError};
use crate::hessian::InexactnessBound;
use thiserror::Error;

/// Below this `α` (or `η`) the logarithmic limit is used.
pub const LOG_BRANCH_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("dominance degree c = {c} exceeds smoothness degree alpha = {alpha}")]
    DegreeViolation { c: f64, alpha: f64 },
    #[error("predictor needs {0}, which is not set")]
    Missing(&'static str),
    #[error(transparent)]
    Spec(#[from] GnsError),
}

/// `F_k ≤ D_c‖∇f(x_k)‖*^{1+c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientDominance {
    pub c: f64,
    pub d_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemClassParams {
    pub spec: GammaBoundSpec,
    /// Diameter of the initial sublevel set in the primal norm.
    pub diameter: f64,
    /// `f(x₀) − f*`.
    pub f0: f64,
    /// `‖∇f(x₀)‖*`.
    pub grad0_dual: f64,
    pub dominance: Option<GradientDominance>,
    pub inexactness: Option<InexactnessBound>,
}

impl ProblemClassParams {
    pub fn new(spec: GammaBoundSpec, diameter: f64, f0: f64, grad0_dual: f64) -> Self {
        Self {
            spec,
            diameter,
            f0,
            grad0_dual,
            dominance: None,
            inexactness: None,
        }
    }

    pub fn with_dominance(mut self, c: f64, d_c: f64) -> Self {
        self.dominance = Some(GradientDominance { c, d_c });
        self
    }

    pub fn with_inexactness(mut self, bound: InexactnessBound) -> Self {
        self.inexactness = Some(bound);
        self
    }

    fn check(&self, eps: f64) -> Result<(), TheoryError> {
        self.spec.validate()?;
        for (name, v) in [
            ("epsilon", eps),
            ("diameter", self.diameter),
            ("f0", self.f0),
            ("grad0_dual", self.grad0_dual),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(TheoryError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        if let Some(b) = &self.inexactness {
            if !(b.c1 >= 0.0 && b.c2 >= 0.0 && (0.0..=1.0).contains(&b.beta)) {
                return Err(TheoryError::InvalidParams(format!("inexactness {b:?}")));
            }
        }
        Ok(())
    }

    /// Spec terms plus `(C₁, 1)` and `(C₂, β)` for the nonzero inexactness
    /// constants: `1/γ` grows by `C₁/g + C₂/g^β`.
    pub fn augmented_spec(&self) -> GammaBoundSpec {
        let mut terms = self.spec.terms.clone();
        if let Some(b) = &self.inexactness {
            if b.c1 > 0.0 {
                terms.push((b.c1, 1.0));
            }
            if b.c2 > 0.0 {
                terms.push((b.c2, b.beta));
            }
        }
        GammaBoundSpec { terms }
    }
}

fn pos_log(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// `maxᵢ Mᵢ D^{αᵢ+1}/ε^{αᵢ−α}`.
fn convex_max(spec: &GammaBoundSpec, diameter: f64, eps: f64) -> f64 {
    let alpha = spec.alpha_min();
    spec.terms
        .iter()
        .map(|&(m, a)| m * diameter.powf(a + 1.0) / eps.powf(a - alpha))
        .fold(0.0, f64::max)
}

/// `(d/α)·maxᵢ(Mᵢ D^{αᵢ+1}/ε^{αᵢ−α})·(ε^{−α} − F₀^{−α})`, for `α > 0`.
pub fn convex_complexity_power(spec: &GammaBoundSpec, diameter: f64, f0: f64, eps: f64) -> f64 {
    let alpha = spec.alpha_min();
    let d = spec.d() as f64;
    d / alpha * convex_max(spec, diameter, eps) * (eps.powf(-alpha) - f0.powf(-alpha))
}

/// `d·maxᵢ(Mᵢ D^{αᵢ+1}/ε^{αᵢ−α})·log(F₀/ε)`.
pub fn convex_complexity_log(spec: &GammaBoundSpec, diameter: f64, f0: f64, eps: f64) -> f64 {
    spec.d() as f64 * convex_max(spec, diameter, eps) * (f0 / eps).ln()
}

/// `maxᵢ Mᵢ [D_c^{1+αᵢ}/ε^{αᵢ−α}]^{1/(1+c)}`.
fn dominated_max(spec: &GammaBoundSpec, dom: GradientDominance, eps: f64) -> f64 {
    let alpha = spec.alpha_min();
    spec.terms
        .iter()
        .map(|&(m, a)| m * (dom.d_c.powf(1.0 + a) / eps.powf(a - alpha)).powf(1.0 / (1.0 + dom.c)))
        .fold(0.0, f64::max)
}

/// `(8d/η)·maxᵢ(…)·(ε^{−η} − F₀^{−η})` with `η = (α − c)/(1 + c) > 0`.
pub fn dominated_complexity_power(spec: &GammaBoundSpec, dom: GradientDominance, f0: f64, eps: f64) -> f64 {
    let eta = (spec.alpha_min() - dom.c) / (1.0 + dom.c);
    let d = spec.d() as f64;
    8.0 * d / eta * dominated_max(spec, dom, eps) * (eps.powf(-eta) - f0.powf(-eta))
}

/// `8d·maxᵢ(…)·log(F₀/ε)`: the global linear rate.
pub fn dominated_complexity_log(spec: &GammaBoundSpec, dom: GradientDominance, f0: f64, eps: f64) -> f64 {
    8.0 * spec.d() as f64 * dominated_max(spec, dom, eps) * (f0 / eps).ln()
}

/// Gradient-norm target `ε` on nonconvex problems:
/// `⌈8F₀/(π(ε)ε) + 8F₀(C₁/ε² + C₂/ε^{1+β}) + log(‖∇f(x₀)‖*/ε)⌉`.
pub fn k_nonconvex(params: &ProblemClassParams, eps: f64) -> Result<f64, TheoryError> {
    params.check(eps)?;
    let mut main = 8.0 * params.f0 / (pi_bound(&params.spec, eps) * eps);
    if let Some(b) = &params.inexactness {
        main += 8.0 * params.f0 * (b.c1 / (eps * eps) + b.c2 / eps.powf(1.0 + b.beta));
    }
    Ok((main + pos_log(params.grad0_dual / eps)).ceil())
}

/// Function-gap target `ε` on convex problems:
/// `⌈C(ε) + 2log(‖∇f(x₀)‖*D/ε)⌉`. For `ε ≥ F₀` only the log term remains.
pub fn k_convex(params: &ProblemClassParams, eps: f64) -> Result<f64, TheoryError> {
    params.check(eps)?;
    Ok(convex_with_spec(params, &params.spec, eps))
}

fn convex_with_spec(params: &ProblemClassParams, spec: &GammaBoundSpec, eps: f64) -> f64 {
    let tail = 2.0 * pos_log(params.grad0_dual * params.diameter / eps);
    if eps >= params.f0 {
        return tail.ceil();
    }
    let c = if spec.alpha_min() < LOG_BRANCH_THRESHOLD {
        convex_complexity_log(spec, params.diameter, params.f0, eps)
    } else {
        convex_complexity_power(spec, params.diameter, params.f0, eps)
    };
    (c + tail).ceil()
}

/// Function-gap target on gradient-dominated problems of degree `c ≤ α`:
/// `⌈C(ε) + 2log(‖∇f(x₀)‖*D/ε)⌉` with the dominated complexity.
pub fn k_grad_dominated(params: &ProblemClassParams, eps: f64) -> Result<f64, TheoryError> {
    params.check(eps)?;
    let dom = params.dominance.ok_or(TheoryError::Missing("gradient dominance"))?;
    if !(0.0..=1.0).contains(&dom.c) || !(dom.d_c > 0.0) {
        return Err(TheoryError::InvalidParams(format!("dominance {dom:?}")));
    }
    let alpha = params.spec.alpha_min();
    if dom.c > alpha + 1e-12 {
        return Err(TheoryError::DegreeViolation { c: dom.c, alpha });
    }
    let tail = 2.0 * pos_log(params.grad0_dual * params.diameter / eps);
    if eps >= params.f0 {
        return Ok(tail.ceil());
    }
    let eta = (alpha - dom.c) / (1.0 + dom.c);
    let c = if eta < LOG_BRANCH_THRESHOLD {
        dominated_complexity_log(&params.spec, dom, params.f0, eps)
    } else {
        dominated_complexity_power(&params.spec, dom, params.f0, eps)
    };
    Ok((c + tail).ceil())
}

/// Convex predictor with the inexactness constants folded into the
/// monomial bound; reduces to [`k_convex`] when `C₁ = C₂ = 0`.
pub fn k_inexact_convex(params: &ProblemClassParams, eps: f64) -> Result<f64, TheoryError> {
    params.check(eps)?;
    if params.inexactness.is_none() {
        return Err(TheoryError::Missing("inexactness bound"));
    }
    Ok(convex_with_spec(params, &params.augmented_spec(), eps))
}
