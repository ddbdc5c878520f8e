//! Turns a model section of the config into state families and connections
//! for each sweep row.

use std::collections::BTreeMap;

use qmt_core::landau::{self, FIELD_PARAM};
use qmt_core::oracle::oracle_qmt;
use qmt_core::{
    gauge_transform, make_expr_family, parse, transform_connection, Connection, ExprAst,
    GaugePhase, Grid2D, Normalization, ParamPoint, StateFamily,
};

use crate::config::{ExprModelConfig, GridConfig, ModelConfig, NormalizationConfig};
use crate::error::{CliError, Result};

/// Name under which the per-row gauge value is visible to expressions.
pub const GAUGE_PARAM: &str = "g";

/// Everything needed to compute one sweep row.
pub struct RowSetup {
    pub family: StateFamily,
    pub connection: Connection,
    pub at: ParamPoint,
    pub grid: Grid2D,
    pub oracle: Option<f64>,
    pub paper_ref: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Model {
    Landau { m: u32 },
    Expr(Box<ExprModel>),
}

impl Model {
    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        Ok(match config {
            ModelConfig::Landau { m } => Model::Landau { m: *m },
            ModelConfig::Expr(e) => Model::Expr(Box::new(ExprModel::new(e)?)),
        })
    }

    pub fn setup(&self, param: &str, value: f64, g: f64, grid: &GridConfig) -> qmt_core::Result<RowSetup> {
        match self {
            Model::Landau { m } => {
                let at = ParamPoint::from_pairs([(FIELD_PARAM, value)])?;
                let grid = match grid.bounds {
                    Some([x0, x1, y0, y1]) => Grid2D::new(x0, x1, y0, y1, grid.n, grid.n)?,
                    None => landau::default_grid(value, grid.n, grid.n_sigma())?,
                };
                Ok(RowSetup {
                    family: landau::landau_family(*m, g)?,
                    connection: landau::landau_connection(g)?,
                    at,
                    grid,
                    oracle: Some(oracle_qmt(value, g, *m)?),
                    // the alternative closed form only covers m = 0
                    paper_ref: if *m == 0 { Some(landau::reference_qmt_paper(value, g)?) } else { None },
                })
            }
            Model::Expr(model) => model.setup(param, value, g, grid),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExprModel {
    amplitude: ExprAst,
    phase: ExprAst,
    alpha: Option<ExprAst>,
    alpha_derivatives: Vec<(String, ExprAst)>,
    gamma: BTreeMap<String, ExprAst>,
    params: Vec<String>,
    values: BTreeMap<String, f64>,
    positive: Vec<String>,
    policy: Normalization,
}

impl ExprModel {
    pub fn new(config: &ExprModelConfig) -> Result<Self> {
        if config.params.iter().any(|p| p == GAUGE_PARAM) {
            return Err(CliError::config(format!(
                "`{GAUGE_PARAM}` is bound from sweep.g and cannot be a model parameter"
            )));
        }
        let mut declared: Vec<&str> = config.params.iter().map(String::as_str).collect();
        declared.push(GAUGE_PARAM);
        let parse_field = |field: &str, text: &str| {
            parse(text, &declared).map_err(|e| CliError::config(format!("model.{field} `{text}`: {e}")))
        };
        Ok(Self {
            amplitude: parse_field("amplitude", &config.amplitude)?,
            phase: parse_field("phase", &config.phase)?,
            alpha: config.alpha.as_deref().map(|a| parse_field("alpha", a)).transpose()?,
            alpha_derivatives: config
                .alpha_derivatives
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse_field(&format!("alpha_derivatives.{k}"), v)?)))
                .collect::<Result<_>>()?,
            gamma: config
                .gamma
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse_field(&format!("gamma.{k}"), v)?)))
                .collect::<Result<_>>()?,
            params: config.params.clone(),
            values: config.values.clone(),
            positive: config.positive.clone(),
            policy: match config.normalization {
                NormalizationConfig::Enforce => Normalization::Enforce,
                NormalizationConfig::Trust => Normalization::Trust,
            },
        })
    }

    fn setup(&self, param: &str, value: f64, g: f64, grid: &GridConfig) -> qmt_core::Result<RowSetup> {
        let bind = |ast: &ExprAst| ast.substitute(GAUGE_PARAM, g);
        let names: Vec<&str> = self.params.iter().map(String::as_str).collect();

        let mut at = ParamPoint::new();
        for (name, v) in &self.values {
            if name != param {
                at = at.with(name, *v)?;
            }
        }
        let at = at.with(param, value)?;

        let mut family = make_expr_family(&bind(&self.amplitude), &bind(&self.phase), &names, self.policy)?;
        for p in &self.positive {
            family = family.with_positive(p)?;
        }
        let zero = ExprAst::constant(0.0);
        let components = names
            .iter()
            .map(|p| (*p, bind(self.gamma.get(*p).unwrap_or(&zero))))
            .collect();
        let mut connection = Connection::new(components)?;

        if let Some(alpha) = &self.alpha {
            let derivs = self.alpha_derivatives.iter().map(|(k, d)| (k.as_str(), bind(d))).collect();
            let phase = GaugePhase::with_derivatives(bind(alpha), derivs, &at)?;
            family = gauge_transform(&family, &phase)?;
            connection = transform_connection(&connection, &phase)?;
        }

        let grid = match grid.bounds {
            Some([x0, x1, y0, y1]) => Grid2D::new(x0, x1, y0, y1, grid.n, grid.n)?,
            None => {
                let scale = at.get(FIELD_PARAM).filter(|b| *b > 0.0).unwrap_or(1.0);
                Grid2D::square(grid.n_sigma() / scale.sqrt(), grid.n)?
            }
        };
        Ok(RowSetup { family, connection, at, grid, oracle: None, paper_ref: None })
    }
}

/// Built-in models, for the `models` subcommand.
pub fn builtin_models() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            landau::MODEL_NAME,
            "lowest Landau level psi_{0,m}(B) in the gauge family Lambda = g B x y; parameter B > 0, options: m",
        ),
        (
            "expr",
            "user family A(x,y;params) * exp(i phi); options: amplitude, phase, params, alpha, gamma, values",
        ),
    ]
}
