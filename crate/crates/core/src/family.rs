//! Parametrized state families `λ ↦ ψ(λ)` and their parameter derivatives.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{QmtError, Result};
use crate::expr::ExprAst;
use crate::field::{apply_phase, ComplexField};
use crate::grid::Grid2D;
pub use crate::params::ParamPoint;

/// What a family does with the norm of the fields it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide every field by its quadrature norm.
    Enforce,
    /// Return fields as the evaluator produced them.
    Trust,
}

/// Produces the unnormalized field of a family at a parameter point.
pub trait StateEvaluator: Send + Sync {
    fn evaluate(&self, at: &ParamPoint, grid: &Grid2D) -> Result<ComplexField>;
}

impl<F> StateEvaluator for F
where
    F: Fn(&ParamPoint, &Grid2D) -> Result<ComplexField> + Send + Sync,
{
    fn evaluate(&self, at: &ParamPoint, grid: &Grid2D) -> Result<ComplexField> {
        self(at, grid)
    }
}

/// A family of wavefunctions `ψ(λ)(x, y)` over declared parameters.
///
/// Cheap to clone; the evaluator is shared.
#[derive(Clone)]
pub struct StateFamily {
    name: String,
    params: Vec<String>,
    positive: BTreeSet<String>,
    policy: Normalization,
    evaluator: Arc<dyn StateEvaluator>,
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFamily")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("positive", &self.positive)
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

impl StateFamily {
    pub fn new<E>(name: &str, params: &[&str], policy: Normalization, evaluator: E) -> Result<Self>
    where
        E: StateEvaluator + 'static,
    {
        let unique: BTreeSet<_> = params.iter().collect();
        if unique.len() != params.len() {
            return Err(QmtError::invalid(format!("duplicate parameter in {params:?}")));
        }
        Ok(Self {
            name: name.to_string(),
            params: params.iter().map(|s| s.to_string()).collect(),
            positive: BTreeSet::new(),
            policy,
            evaluator: Arc::new(evaluator),
        })
    }

    /// Restricts `param` to strictly positive values; finite differences
    /// shrink their step to stay inside.
    pub fn with_positive(mut self, param: &str) -> Result<Self> {
        if !self.declares(param) {
            return Err(QmtError::ParameterMismatch(format!(
                "`{param}` is not a parameter of family `{}`",
                self.name
            )));
        }
        self.positive.insert(param.to_string());
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn declares(&self, param: &str) -> bool {
        self.params.iter().any(|p| p == param)
    }

    pub fn policy(&self) -> Normalization {
        self.policy
    }

    pub fn is_positive(&self, param: &str) -> bool {
        self.positive.contains(param)
    }

    /// Field at `at`, normalized according to the family's policy.
    pub fn evaluate(&self, at: &ParamPoint, grid: &Grid2D) -> Result<ComplexField> {
        for p in &self.params {
            let v = at.require(p)?;
            if self.positive.contains(p) && v <= 0.0 {
                return Err(QmtError::invalid(format!(
                    "family `{}` requires {p} > 0, got {v}",
                    self.name
                )));
            }
        }
        let raw = self.evaluator.evaluate(at, grid)?;
        if raw.grid() != grid {
            return Err(QmtError::GridMismatch);
        }
        match self.policy {
            Normalization::Trust => Ok(raw),
            Normalization::Enforce => {
                let norm_sq = raw.norm_sq();
                if !(norm_sq > 0.0 && norm_sq.is_finite()) {
                    return Err(QmtError::numerical(format!(
                        "family `{}` at {at} has norm^2 {norm_sq}, cannot normalize",
                        self.name
                    )));
                }
                raw.scale(Complex64::new(norm_sq.sqrt().recip(), 0.0))
            }
        }
    }

    /// Family whose fields are `transform(ψ(λ), λ, grid)`.
    pub fn map<F>(&self, name: &str, transform: F) -> StateFamily
    where
        F: Fn(ComplexField, &ParamPoint, &Grid2D) -> Result<ComplexField> + Send + Sync + 'static,
    {
        let inner = self.clone();
        let evaluator = move |at: &ParamPoint, grid: &Grid2D| {
            let field = inner.evaluate(at, grid)?;
            transform(field, at, grid)
        };
        StateFamily {
            name: name.to_string(),
            params: self.params.clone(),
            positive: self.positive.clone(),
            policy: self.policy,
            evaluator: Arc::new(evaluator),
        }
    }
}

/// `ψ(λ) = A(λ, x, y) · e^{iφ(λ, x, y)}` from two real expressions.
pub fn make_expr_family(
    amplitude: &ExprAst,
    phase: &ExprAst,
    params: &[&str],
    policy: Normalization,
) -> Result<StateFamily> {
    for (role, ast) in [("amplitude", amplitude), ("phase", phase)] {
        if let Some(p) = ast.referenced_params().into_iter().find(|p| !params.contains(p)) {
            return Err(QmtError::ParameterMismatch(format!(
                "{role} `{ast}` uses undeclared parameter `{p}`"
            )));
        }
    }
    let (amplitude, phase) = (amplitude.clone(), phase.clone());
    let name = format!("expr[{amplitude} ; {phase}]");
    StateFamily::new(&name, params, policy, move |at: &ParamPoint, grid: &Grid2D| {
        let a = amplitude.eval_on_grid(grid, at)?;
        let phi = phase.eval_on_grid(grid, at)?;
        let modulus = ComplexField::new(
            *grid,
            a.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )?;
        apply_phase(&modulus, &phi)
    })
}

/// Step settings for central differences in parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeScheme {
    h_rel: f64,
    richardson: bool,
}

impl DerivativeScheme {
    pub fn new(h_rel: f64, richardson: bool) -> Result<Self> {
        if !(h_rel > 0.0 && h_rel < 0.1) {
            return Err(QmtError::invalid(format!("h_rel must lie in (0, 0.1), got {h_rel}")));
        }
        Ok(Self { h_rel, richardson })
    }

    pub fn plain(h_rel: f64) -> Result<Self> {
        Self::new(h_rel, false)
    }

    pub fn h_rel(&self) -> f64 {
        self.h_rel
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }

    /// Absolute step at parameter value `value`.
    pub fn step(&self, value: f64) -> f64 {
        self.h_rel * value.abs().max(1.0)
    }
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        Self { h_rel: 1e-3, richardson: true }
    }
}

impl fmt::Display for DerivativeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.richardson { "central+richardson" } else { "central" };
        write!(f, "{kind}, h_rel={}", self.h_rel)
    }
}

/// `∂ψ/∂λ` sampled on the grid, with the step that was actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDerivative {
    pub field: ComplexField,
    pub step: f64,
    /// The nominal step was reduced to keep `λ ± h` inside the family's domain.
    pub shrunk: bool,
}

/// Central difference `(ψ(λ+h) − ψ(λ−h)) / 2h`, optionally Richardson
/// extrapolated as `(4 D_{h/2} − D_h) / 3`. All evaluations share `grid`.
pub fn param_derivative(
    family: &StateFamily,
    at: &ParamPoint,
    which: &str,
    grid: &Grid2D,
    scheme: &DerivativeScheme,
) -> Result<ParamDerivative> {
    if !family.declares(which) {
        return Err(QmtError::ParameterMismatch(format!(
            "`{which}` is not a parameter of family `{}`",
            family.name()
        )));
    }
    let center = at.require(which)?;
    let mut step = scheme.step(center);
    let mut shrunk = false;
    if family.is_positive(which) && center > 0.0 && center - step <= 0.0 {
        step = 0.5 * center;
        shrunk = true;
        log::debug!(
            "step for {which} shrunk to {step} at {at} to stay inside the domain of `{}`",
            family.name()
        );
    }

    let central = |h: f64| -> Result<ComplexField> {
        let plus = family.evaluate(&at.with(which, center + h)?, grid)?;
        let minus = family.evaluate(&at.with(which, center - h)?, grid)?;
        let inv = 1.0 / (2.0 * h);
        plus.zip_with(&minus, |p, m| (p - m) * inv)
    };

    let coarse = central(step)?;
    let field = if scheme.richardson() {
        let fine = central(0.5 * step)?;
        fine.zip_with(&coarse, |f, c| (4.0 * f - c) / 3.0)?
    } else {
        coarse
    };
    Ok(ParamDerivative { field, step, shrunk })
}
