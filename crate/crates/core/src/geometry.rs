//! Berry connection, quantum metric tensor, parameter-space gauge
//! transformations and the covariant (connection-corrected) metric.
//!
//! For a normalized family `ψ(λ)`:
//!
//! ```text
//! β_i      = −i (ψ, ∂_i ψ)
//! G_ij     = Re (∂_i ψ, ∂_j ψ) − β_i β_j
//! G^cov_ij = Re (D_i ψ, D_j ψ),   D_i = ∂_i − i Γ_i
//! ```
//!
//! Under `ψ → e^{iα} ψ` the connection moves as `Γ_i → Γ_i + ∂_i α`, which
//! keeps `G^cov` unchanged even when `α` depends on the integration
//! variables. `G` is only invariant when `∂_i α` is constant over space.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{QmtError, Result};
use crate::expr::ExprAst;
use crate::family::{param_derivative, DerivativeScheme, ParamDerivative, StateFamily};
use crate::field::{apply_phase, expectation, inner_product, ComplexField, RealField, NORM_TOLERANCE};
use crate::grid::Grid2D;
use crate::params::ParamPoint;

/// Largest `|Re (ψ, ∂_i ψ)|` accepted before a computation is declared failed.
pub const HERMITICITY_LIMIT: f64 = 1e-4;

/// Agreement required between analytic and finite-difference phase derivatives.
pub const PHASE_DERIVATIVE_TOLERANCE: f64 = 1e-6;

const PHASE_FD_REL_STEP: f64 = 1e-4;

/// Real phase `α(λ, x, y)` of a parameter-space gauge transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhase {
    alpha: ExprAst,
    derivatives: BTreeMap<String, ExprAst>,
}

impl GaugePhase {
    /// Phase without analytic derivatives; `∂_i α` falls back to finite
    /// differences.
    pub fn new(alpha: ExprAst) -> Self {
        Self { alpha, derivatives: BTreeMap::new() }
    }

    /// Phase with analytic `∂_i α`, each checked against a finite difference
    /// of `α` at `probe` on a small lattice around the origin.
    pub fn with_derivatives(
        alpha: ExprAst,
        derivatives: Vec<(&str, ExprAst)>,
        probe: &ParamPoint,
    ) -> Result<Self> {
        let probe_grid = Grid2D::square(2.0, 9)?;
        let mut phase = Self::new(alpha);
        for (name, deriv) in derivatives {
            if !phase.alpha.declared_params().iter().any(|p| p == name) {
                return Err(QmtError::ParameterMismatch(format!(
                    "derivative given for `{name}`, which the phase `{}` does not declare",
                    phase.alpha
                )));
            }
            if let Some(p) = deriv
                .referenced_params()
                .into_iter()
                .find(|p| !phase.alpha.declared_params().iter().any(|d| d == p))
            {
                return Err(QmtError::ParameterMismatch(format!(
                    "derivative `{deriv}` uses `{p}`, which the phase does not declare"
                )));
            }
            let analytic = deriv.eval_on_grid(&probe_grid, probe)?;
            let numeric = phase.fd_derivative(name, probe, &probe_grid)?;
            for (k, (a, n)) in analytic.samples().iter().zip(numeric.samples()).enumerate() {
                if (a - n).abs() > PHASE_DERIVATIVE_TOLERANCE * a.abs().max(1.0) {
                    let (x, y) = probe_grid.point(k);
                    return Err(QmtError::invalid(format!(
                        "d({})/d{name} = `{deriv}` disagrees with finite differences at ({x}, {y}): {a} vs {n}",
                        phase.alpha
                    )));
                }
            }
            phase.derivatives.insert(name.to_string(), deriv);
        }
        Ok(phase)
    }

    pub fn alpha(&self) -> &ExprAst {
        &self.alpha
    }

    pub fn analytic_derivative(&self, which: &str) -> Option<&ExprAst> {
        self.derivatives.get(which)
    }

    /// True when `α` actually varies with `which`.
    pub fn depends_on(&self, which: &str) -> bool {
        self.alpha.references(which)
    }

    pub fn field(&self, at: &ParamPoint, grid: &Grid2D) -> Result<RealField> {
        self.alpha.eval_on_grid(grid, at)
    }

    /// `∂α/∂λ_which` on `grid`: analytic when available, otherwise a
    /// Richardson-extrapolated central difference.
    pub fn derivative_field(&self, which: &str, at: &ParamPoint, grid: &Grid2D) -> Result<RealField> {
        if !self.depends_on(which) {
            return RealField::constant(*grid, 0.0);
        }
        match self.derivatives.get(which) {
            Some(d) => d.eval_on_grid(grid, at),
            None => self.fd_derivative(which, at, grid),
        }
    }

    fn fd_derivative(&self, which: &str, at: &ParamPoint, grid: &Grid2D) -> Result<RealField> {
        let center = at.require(which)?;
        let h = PHASE_FD_REL_STEP * center.abs().max(1.0);
        let diff = |h: f64| -> Result<RealField> {
            let plus = self.alpha.eval_on_grid(grid, &at.with(which, center + h)?)?;
            let minus = self.alpha.eval_on_grid(grid, &at.with(which, center - h)?)?;
            plus.zip_with(&minus, |p, m| (p - m) / (2.0 * h))
        };
        let coarse = diff(h)?;
        let fine = diff(0.5 * h)?;
        fine.zip_with(&coarse, |f, c| (4.0 * f - c) / 3.0)
    }

    /// Phase `α₁ + α₂`. Analytic derivatives are kept wherever both parts
    /// provide one (or only one part depends on the parameter).
    pub fn compose(&self, other: &GaugePhase) -> GaugePhase {
        let alpha = self.alpha.sum(&other.alpha);
        let mut derivatives = BTreeMap::new();
        for name in alpha.declared_params() {
            let part = |p: &GaugePhase| -> Option<Option<ExprAst>> {
                if p.depends_on(name) {
                    p.derivatives.get(name).cloned().map(Some)
                } else {
                    Some(None)
                }
            };
            match (part(self), part(other)) {
                (Some(Some(a)), Some(Some(b))) => {
                    derivatives.insert(name.clone(), a.sum(&b));
                }
                (Some(Some(a)), Some(None)) | (Some(None), Some(Some(a))) => {
                    derivatives.insert(name.clone(), a);
                }
                _ => {}
            }
        }
        GaugePhase { alpha, derivatives }
    }
}

/// One component `Γ_i`: an analytic expression plus, when a transport had no
/// analytic `∂_i α`, phases whose derivative is sampled numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionComponent {
    analytic: ExprAst,
    sampled: Vec<GaugePhase>,
}

impl ConnectionComponent {
    pub fn analytic(&self) -> &ExprAst {
        &self.analytic
    }

    pub fn is_analytic(&self) -> bool {
        self.sampled.is_empty()
    }
}

/// Per-parameter real fields `Γ_i(λ, x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    components: BTreeMap<String, ConnectionComponent>,
}

impl Connection {
    pub fn new(components: Vec<(&str, ExprAst)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, ast) in components {
            let comp = ConnectionComponent { analytic: ast, sampled: Vec::new() };
            if map.insert(name.to_string(), comp).is_some() {
                return Err(QmtError::invalid(format!("connection component `{name}` given twice")));
            }
        }
        Ok(Self { components: map })
    }

    /// `Γ_i ≡ 0` for every listed parameter.
    pub fn zero(params: &[&str]) -> Self {
        let components = params
            .iter()
            .map(|p| {
                let comp = ConnectionComponent { analytic: ExprAst::constant(0.0), sampled: Vec::new() };
                (p.to_string(), comp)
            })
            .collect();
        Self { components }
    }

    pub fn params(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn component(&self, which: &str) -> Option<&ConnectionComponent> {
        self.components.get(which)
    }

    pub fn is_analytic(&self) -> bool {
        self.components.values().all(ConnectionComponent::is_analytic)
    }

    pub fn covers(&self, family: &StateFamily) -> bool {
        family.params().iter().all(|p| self.components.contains_key(p))
    }

    /// `Γ_which` sampled on `grid`.
    pub fn field(&self, which: &str, at: &ParamPoint, grid: &Grid2D) -> Result<RealField> {
        let comp = self.components.get(which).ok_or_else(|| {
            QmtError::ParameterMismatch(format!("connection has no component for `{which}`"))
        })?;
        let mut total = comp.analytic.eval_on_grid(grid, at)?;
        for phase in &comp.sampled {
            let d = phase.derivative_field(which, at, grid)?;
            total = total.zip_with(&d, |a, b| a + b)?;
        }
        Ok(total)
    }
}

/// Metric, Berry connection and numerical diagnostics at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct QmtResult {
    params: Vec<String>,
    metric: Vec<f64>,
    beta: Vec<f64>,
    pub diagnostics: QmtDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmtDiagnostics {
    /// `|Re (ψ, ∂_i ψ)|` per parameter.
    pub herm_residuals: Vec<f64>,
    /// Finite-difference step actually used per parameter.
    pub steps: Vec<f64>,
    pub steps_shrunk: Vec<bool>,
    pub scheme: DerivativeScheme,
    pub grid: Grid2D,
    /// `|(ψ, ψ) − 1|` at the central point.
    pub norm_deviation: f64,
}

impl QmtResult {
    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.metric[i * self.dim() + j]
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| QmtError::ParameterMismatch(format!("no parameter `{name}` in result")))
    }

    /// `G` component for a named pair of parameters.
    pub fn component(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_of(&self, name: &str) -> Result<f64> {
        Ok(self.beta[self.index_of(name)?])
    }

    pub fn max_herm_residual(&self) -> f64 {
        self.diagnostics.herm_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Rows of the metric matrix.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.metric.chunks(self.dim().max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// `β_i` with its hermiticity residual `|Re (ψ, ∂_i ψ)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryConnection {
    pub value: f64,
    pub residual: f64,
}

struct Tangents {
    psi: ComplexField,
    derivs: Vec<ParamDerivative>,
    berry: Vec<BerryConnection>,
    norm_deviation: f64,
}

fn require_normalized(psi: &ComplexField, family: &StateFamily, at: &ParamPoint) -> Result<f64> {
    let deviation = (psi.norm_sq() - 1.0).abs();
    if deviation > NORM_TOLERANCE {
        return Err(QmtError::numerical(format!(
            "family `{}` is not normalized at {at} (|(ψ,ψ) − 1| = {deviation:e})",
            family.name()
        )));
    }
    Ok(deviation)
}

fn berry_from(psi: &ComplexField, d: &ComplexField) -> Result<BerryConnection> {
    let overlap = inner_product(psi, d)?;
    // −i (ψ, ∂ψ) = Im(ψ, ∂ψ) − i Re(ψ, ∂ψ)
    Ok(BerryConnection { value: overlap.im, residual: overlap.re.abs() })
}

fn check_residual(family: &StateFamily, which: &str, at: &ParamPoint, b: &BerryConnection) -> Result<()> {
    if b.residual > HERMITICITY_LIMIT {
        return Err(QmtError::numerical(format!(
            "hermiticity residual {:e} for `{which}` of `{}` at {at} exceeds {HERMITICITY_LIMIT:e}",
            b.residual,
            family.name()
        )));
    }
    Ok(())
}

fn tangents(family: &StateFamily, at: &ParamPoint, grid: &Grid2D, scheme: &DerivativeScheme) -> Result<Tangents> {
    let psi = family.evaluate(at, grid)?;
    let norm_deviation = require_normalized(&psi, family, at)?;
    let mut derivs = Vec::with_capacity(family.params().len());
    let mut berry = Vec::with_capacity(family.params().len());
    for which in family.params() {
        let d = param_derivative(family, at, which, grid, scheme)?;
        let b = berry_from(&psi, &d.field)?;
        check_residual(family, which, at, &b)?;
        derivs.push(d);
        berry.push(b);
    }
    Ok(Tangents { psi, derivs, berry, norm_deviation })
}

fn assemble<F>(family: &StateFamily, t: &Tangents, grid: &Grid2D, scheme: &DerivativeScheme, entry: F) -> Result<QmtResult>
where
    F: Fn(usize, usize) -> Result<f64>,
{
    let n = family.params().len();
    let mut metric = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j)?;
            if !v.is_finite() {
                return Err(QmtError::numerical(format!("metric entry ({i}, {j}) is {v}")));
            }
            metric[i * n + j] = v;
            metric[j * n + i] = v;
        }
    }
    Ok(QmtResult {
        params: family.params().to_vec(),
        metric,
        beta: t.berry.iter().map(|b| b.value).collect(),
        diagnostics: QmtDiagnostics {
            herm_residuals: t.berry.iter().map(|b| b.residual).collect(),
            steps: t.derivs.iter().map(|d| d.step).collect(),
            steps_shrunk: t.derivs.iter().map(|d| d.shrunk).collect(),
            scheme: *scheme,
            grid: *grid,
            norm_deviation: t.norm_deviation,
        },
    })
}

/// `β_which = −i (ψ, ∂ψ)`, reported as its real part together with the
/// residual `|Re (ψ, ∂ψ)|` that vanishes for normalized families.
pub fn berry_connection(
    family: &StateFamily,
    at: &ParamPoint,
    which: &str,
    grid: &Grid2D,
    scheme: &DerivativeScheme,
) -> Result<BerryConnection> {
    let psi = family.evaluate(at, grid)?;
    require_normalized(&psi, family, at)?;
    let d = param_derivative(family, at, which, grid, scheme)?;
    let b = berry_from(&psi, &d.field)?;
    check_residual(family, which, at, &b)?;
    Ok(b)
}

/// `G_ij = Re (∂_i ψ, ∂_j ψ) − β_i β_j` over all parameters of the family.
pub fn qmt(family: &StateFamily, at: &ParamPoint, grid: &Grid2D, scheme: &DerivativeScheme) -> Result<QmtResult> {
    let t = tangents(family, at, grid, scheme)?;
    assemble(family, &t, grid, scheme, |i, j| {
        let overlap = inner_product(&t.derivs[i].field, &t.derivs[j].field)?;
        Ok(overlap.re - t.berry[i].value * t.berry[j].value)
    })
}

/// Same metric written as `Re ((∂_i − iβ_i) ψ, (∂_j − iβ_j) ψ)`.
pub fn qmt_projected(family: &StateFamily, at: &ParamPoint, grid: &Grid2D, scheme: &DerivativeScheme) -> Result<QmtResult> {
    let t = tangents(family, at, grid, scheme)?;
    let shifted: Vec<ComplexField> = t
        .derivs
        .iter()
        .zip(&t.berry)
        .map(|(d, b)| {
            let shift = Complex64::new(0.0, b.value);
            d.field.zip_with(&t.psi, |dv, p| dv - shift * p)
        })
        .collect::<Result<_>>()?;
    assemble(family, &t, grid, scheme, |i, j| Ok(inner_product(&shifted[i], &shifted[j])?.re))
}

/// Gauge-invariant metric `G_ij = Re (D_i ψ, D_j ψ)` with `D_i = ∂_i − iΓ_i`.
///
/// No `β_i β_j` term is subtracted; `β` is still reported for diagnostics.
pub fn covariant_qmt(
    family: &StateFamily,
    conn: &Connection,
    at: &ParamPoint,
    grid: &Grid2D,
    scheme: &DerivativeScheme,
) -> Result<QmtResult> {
    if !conn.covers(family) {
        return Err(QmtError::ParameterMismatch(format!(
            "connection does not cover every parameter of `{}`",
            family.name()
        )));
    }
    let t = tangents(family, at, grid, scheme)?;
    let covariant: Vec<ComplexField> = family
        .params()
        .iter()
        .zip(&t.derivs)
        .map(|(which, d)| {
            let gamma = conn.field(which, at, grid)?;
            let samples = d
                .field
                .samples()
                .iter()
                .zip(t.psi.samples())
                .zip(gamma.samples())
                .map(|((dv, p), g)| dv - Complex64::new(0.0, *g) * p)
                .collect();
            ComplexField::new(*grid, samples)
        })
        .collect::<Result<_>>()?;
    assemble(family, &t, grid, scheme, |i, j| Ok(inner_product(&covariant[i], &covariant[j])?.re))
}

/// `dl² = Σ G_ij dλ_i dλ_j`.
pub fn line_element(result: &QmtResult, dlambda: &[f64]) -> Result<f64> {
    let n = result.dim();
    if dlambda.len() != n {
        return Err(QmtError::contract(format!(
            "displacement has {} components, metric is {n}x{n}",
            dlambda.len()
        )));
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += result.get(i, j) * dlambda[i] * dlambda[j];
        }
    }
    Ok(acc)
}

fn check_phase_params(phase: &GaugePhase, params: impl Fn(&str) -> bool, what: &str) -> Result<()> {
    if let Some(p) = phase.alpha.referenced_params().into_iter().find(|p| !params(p)) {
        return Err(QmtError::ParameterMismatch(format!(
            "phase `{}` depends on `{p}`, which is not a parameter of the {what}",
            phase.alpha
        )));
    }
    Ok(())
}

/// `ψ' = e^{iα} ψ`.
pub fn gauge_transform(family: &StateFamily, phase: &GaugePhase) -> Result<StateFamily> {
    check_phase_params(phase, |p| family.declares(p), "family")?;
    let name = format!("{} * exp(i({}))", family.name(), phase.alpha);
    let phase = phase.clone();
    Ok(family.map(&name, move |psi, at, grid| apply_phase(&psi, &phase.field(at, grid)?)))
}

/// Change of `β_which` under `phase`, returned as `(β' − β, (ψ, (∂α) ψ))`.
pub fn beta_shift_check(
    family: &StateFamily,
    phase: &GaugePhase,
    at: &ParamPoint,
    which: &str,
    grid: &Grid2D,
    scheme: &DerivativeScheme,
) -> Result<(f64, f64)> {
    let transformed = gauge_transform(family, phase)?;
    let before = berry_connection(family, at, which, grid, scheme)?;
    let after = berry_connection(&transformed, at, which, grid, scheme)?;
    let psi = family.evaluate(at, grid)?;
    let d_alpha = phase.derivative_field(which, at, grid)?;
    let rhs = expectation(&psi, &d_alpha)?;
    Ok((after.value - before.value, rhs))
}

/// `Γ'_i = Γ_i + ∂_i α`. Components stay analytic when `α` supplies an
/// analytic derivative; otherwise `∂_i α` is sampled by finite differences.
pub fn transform_connection(conn: &Connection, phase: &GaugePhase) -> Result<Connection> {
    transport(conn, phase, false)
}

/// Like [`transform_connection`] but refuses to fall back to sampled
/// derivatives.
pub fn transform_connection_exact(conn: &Connection, phase: &GaugePhase) -> Result<Connection> {
    transport(conn, phase, true)
}

fn transport(conn: &Connection, phase: &GaugePhase, exact: bool) -> Result<Connection> {
    check_phase_params(phase, |p| conn.components.contains_key(p), "connection")?;
    let mut components = conn.components.clone();
    for (name, comp) in components.iter_mut() {
        if !phase.depends_on(name) {
            continue;
        }
        match phase.analytic_derivative(name) {
            Some(d) => comp.analytic = comp.analytic.sum(d),
            None if exact => return Err(QmtError::MissingPhaseDerivative(name.clone())),
            None => comp.sampled.push(phase.clone()),
        }
    }
    Ok(Connection { components })
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (name, comp)) in self.components.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "Γ_{name} = {}", comp.analytic)?;
            for p in &comp.sampled {
                write!(f, " + ∂_{name}[{}]", p.alpha)?;
            }
        }
        Ok(())
    }
}
