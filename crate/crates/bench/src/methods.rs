//! Maps method presets and custom entries onto solver configurations.

use crate::config::{
    ConfigError, CustomMethod, MethodEntry, NormSpec, Preset, Problem, ProblemFamily, RuleSpec,
    StopSpec, StrategySpec,
};
use grnewton::gns::{GammaBoundSpec, GnsConfig};
use grnewton::hessian::HessianStrategy;
use grnewton::solver::{GammaRule, SolverConfig, StopCriteria};
use grnewton::NormPair;

/// A method ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedMethod {
    pub name: String,
    pub solver: SolverConfig,
}

impl Preset {
    /// Spells the preset out for the given problem.
    pub fn expand(&self, family: ProblemFamily) -> Result<CustomMethod, ConfigError> {
        let func = RuleSpec::FuncSearch { gamma0: 1.0 };
        let (strategy, rule, norm) = match self {
            Preset::ExactFuncSearch => (StrategySpec::Exact, func, NormSpec::Identity),
            Preset::InexactFuncSearch => {
                let strategy = match family {
                    ProblemFamily::SoftMax => StrategySpec::WeightedGaussNewton,
                    ProblemFamily::PowerResidual => StrategySpec::NonlinearPowerFull,
                    ProblemFamily::Separable => StrategySpec::Fisher,
                    ProblemFamily::Other => {
                        return Err(ConfigError::Invalid(
                            "inexact-func-search has no Hessian approximation for this problem".into(),
                        ))
                    }
                };
                (strategy, func, NormSpec::Identity)
            }
            Preset::ExactGradSearchInvM => (StrategySpec::Exact, RuleSpec::GradSearch { l: 1.0, m0: 1.0 }, NormSpec::Identity),
            Preset::ExactGradSearchGradOverM => {
                (StrategySpec::Exact, RuleSpec::GradSearch { l: 0.0, m0: 1.0 }, NormSpec::Identity)
            }
            Preset::GradientMethod => (StrategySpec::Zero, func, NormSpec::Identity),
            Preset::GaussNewton => (StrategySpec::Zero, func, NormSpec::Gram),
            Preset::FisherTerm => {
                if family != ProblemFamily::PowerResidual {
                    return Err(ConfigError::Invalid("fisher-term needs a power-residual problem".into()));
                }
                (StrategySpec::FisherRankOne, func, NormSpec::Gram)
            }
        };
        Ok(CustomMethod {
            name: self.slug().to_string(),
            strategy,
            rule,
            norm,
            max_backtracks: None,
        })
    }
}

fn stop_criteria(stop: &StopSpec) -> StopCriteria {
    StopCriteria {
        grad_tol: stop.grad_tol,
        f_target: stop.f_target,
        max_iters: stop.max_iters,
        max_oracle_calls: stop.max_oracle_calls,
    }
}

fn gram_norm(problem: &Problem, what: &str) -> Result<NormPair, ConfigError> {
    let a = problem
        .design
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid(format!("{what} needs a design matrix")))?;
    NormPair::gram(a).map_err(|e| ConfigError::Invalid(format!("{what}: AᵀA is not usable as B: {e}")))
}

pub fn resolve_method(
    entry: &MethodEntry,
    problem: &Problem,
    stop: &StopSpec,
) -> Result<ResolvedMethod, ConfigError> {
    let custom = match entry {
        MethodEntry::Preset(p) => p.expand(problem.family)?,
        MethodEntry::Custom(c) => c.clone(),
    };
    let n = problem.objective.dim();
    let strategy = match custom.strategy {
        StrategySpec::Exact => HessianStrategy::Exact,
        StrategySpec::Zero => HessianStrategy::Zero,
        StrategySpec::Fisher => HessianStrategy::Fisher,
        StrategySpec::WeightedGaussNewton => HessianStrategy::WeightedGaussNewton,
        StrategySpec::NonlinearPowerFull => HessianStrategy::NonlinearPowerFull,
        StrategySpec::FisherRankOne => HessianStrategy::FisherRankOne,
        StrategySpec::GaussNewtonConstant => {
            let a = problem
                .design
                .as_ref()
                .ok_or_else(|| ConfigError::Invalid(format!("{}: no design matrix", custom.name)))?;
            HessianStrategy::GaussNewtonConstant(a.tr_mul(a))
        }
    };
    let rule = match &custom.rule {
        RuleSpec::FuncSearch { gamma0 } => {
            check_positive(&custom.name, "gamma0", *gamma0)?;
            GammaRule::AdaptiveFuncSearch { gamma0: *gamma0 }
        }
        RuleSpec::GradSearch { l, m0 } => {
            check_positive(&custom.name, "m0", *m0)?;
            if !(0.0..=1.0).contains(l) {
                return Err(ConfigError::Invalid(format!("{}: l = {l} outside [0, 1]", custom.name)));
            }
            GammaRule::AdaptiveGradSearch { l: *l, m0: *m0 }
        }
        RuleSpec::Fixed { gamma } => {
            check_positive(&custom.name, "gamma", *gamma)?;
            GammaRule::Fixed(*gamma)
        }
        RuleSpec::Theoretical { terms } => GammaRule::Theoretical(
            GammaBoundSpec::new(terms.clone()).map_err(|e| ConfigError::Invalid(format!("{}: {e}", custom.name)))?,
        ),
        RuleSpec::EmpiricalGns { n_dirs, n_radii } => {
            let mut g = GnsConfig::default();
            if let Some(d) = n_dirs {
                g.n_dirs = *d;
            }
            if let Some(r) = n_radii {
                g.n_radii = *r;
            }
            GammaRule::EmpiricalGns(g)
        }
    };
    let norm = match custom.norm {
        NormSpec::Identity => NormPair::identity(n),
        NormSpec::Gram => gram_norm(problem, &custom.name)?,
    };
    let mut solver = SolverConfig::new(rule, strategy, norm).with_stop(stop_criteria(stop));
    if let Some(b) = custom.max_backtracks {
        solver.max_backtracks = b;
    }
    Ok(ResolvedMethod {
        name: custom.name,
        solver,
    })
}

fn check_positive(method: &str, what: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{method}: {what} = {v} must be positive")))
    }
}
