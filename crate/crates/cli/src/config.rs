//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "landau"          # or "expr"
//! m = 0
//!
//! [grid]
//! n = 256
//! n_sigma = 8.0            # or: bounds = [x_min, x_max, y_min, y_max]
//!
//! [derivative]
//! h_rel = 1e-3
//! richardson = true
//!
//! [sweep]
//! param = "B"
//! from = 0.5
//! to = 4.0
//! points = 4
//! spacing = "log"          # or "linear"
//! g = [0.0, 0.5, 1.0, 2.0]
//!
//! [output]
//! path = "sweep.csv"
//! format = "csv"
//! ```
//!
//! An `expr` model takes `amplitude`, `phase` and `params`, plus optional
//! `alpha` (gauge phase), `alpha_derivatives`, `gamma` (base connection per
//! parameter), `values` (fixed parameters), `positive` and `normalization`.
//! Every expression may use the gauge parameter `g`, bound per row from the
//! sweep's `g` list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qmt_core::landau::{DEFAULT_N, DEFAULT_N_SIGMA, FIELD_PARAM};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub derivative: DerivativeConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Landau {
        #[serde(default)]
        m: u32,
    },
    Expr(ExprModelConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprModelConfig {
    pub amplitude: String,
    #[serde(default = "zero_expr")]
    pub phase: String,
    pub params: Vec<String>,
    #[serde(default)]
    pub alpha: Option<String>,
    #[serde(default)]
    pub alpha_derivatives: BTreeMap<String, String>,
    #[serde(default)]
    pub gamma: BTreeMap<String, String>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub positive: Vec<String>,
    #[serde(default)]
    pub normalization: NormalizationConfig,
}

fn zero_expr() -> String {
    "0".to_string()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationConfig {
    #[default]
    Enforce,
    Trust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub n_sigma: Option<f64>,
    #[serde(default)]
    pub bounds: Option<[f64; 4]>,
}

fn default_n() -> usize {
    DEFAULT_N
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: DEFAULT_N, n_sigma: None, bounds: None }
    }
}

impl GridConfig {
    pub fn n_sigma(&self) -> f64 {
        self.n_sigma.unwrap_or(DEFAULT_N_SIGMA)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeConfig {
    #[serde(default = "default_h_rel")]
    pub h_rel: f64,
    #[serde(default = "default_true")]
    pub richardson: bool,
}

fn default_h_rel() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self { h_rel: default_h_rel(), richardson: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_param")]
    pub param: String,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    pub g: Vec<f64>,
}

fn default_param() -> String {
    FIELD_PARAM.to_string()
}

fn default_points() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_path")]
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_path() -> PathBuf {
    PathBuf::from("sweep.csv")
}

fn default_format() -> String {
    "csv".to_string()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { path: default_path(), format: default_format() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// A Landau run at a single field strength, as used by `compare`.
    pub fn landau_point(b: f64, g: Vec<f64>, m: u32) -> Result<Self> {
        let config = RunConfig {
            model: ModelConfig::Landau { m },
            grid: GridConfig::default(),
            derivative: DerivativeConfig::default(),
            sweep: SweepConfig {
                param: default_param(),
                from: b,
                to: b,
                points: 1,
                spacing: Spacing::Linear,
                g,
            },
            output: OutputConfig::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if s.points == 0 {
            return Err(CliError::config("sweep.points must be at least 1"));
        }
        if !(s.from.is_finite() && s.to.is_finite()) {
            return Err(CliError::config("sweep.from and sweep.to must be finite"));
        }
        if s.g.is_empty() {
            return Err(CliError::config("sweep.g must list at least one gauge value"));
        }
        if s.g.iter().any(|g| !g.is_finite()) {
            return Err(CliError::config("sweep.g values must be finite"));
        }
        if s.param == FIELD_PARAM && (s.from <= 0.0 || s.to <= 0.0) {
            return Err(CliError::config(format!(
                "sweep over {FIELD_PARAM} needs positive bounds, got from={} to={}",
                s.from, s.to
            )));
        }
        if s.spacing == Spacing::Log && (s.from <= 0.0 || s.to <= 0.0) {
            return Err(CliError::config("log spacing needs positive sweep bounds"));
        }

        let g = &self.grid;
        if g.n < qmt_core::Grid2D::MIN_SAMPLES {
            return Err(CliError::config(format!("grid.n must be at least {}", qmt_core::Grid2D::MIN_SAMPLES)));
        }
        if g.bounds.is_some() && g.n_sigma.is_some() {
            return Err(CliError::config("grid: give either n_sigma or bounds, not both"));
        }
        if let Some(sigma) = g.n_sigma {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(CliError::config("grid.n_sigma must be positive"));
            }
        }
        if let Some([x0, x1, y0, y1]) = g.bounds {
            qmt_core::Grid2D::new(x0, x1, y0, y1, g.n, g.n).map_err(|e| CliError::config(format!("grid.bounds: {e}")))?;
        }

        qmt_core::DerivativeScheme::new(self.derivative.h_rel, self.derivative.richardson)
            .map_err(|e| CliError::config(format!("derivative: {e}")))?;

        if self.output.format != "csv" {
            return Err(CliError::config(format!(
                "output.format `{}` is not supported (only csv)",
                self.output.format
            )));
        }

        match &self.model {
            ModelConfig::Landau { .. } => {
                if s.param != FIELD_PARAM {
                    return Err(CliError::config(format!(
                        "landau model sweeps `{FIELD_PARAM}`, not `{}`",
                        s.param
                    )));
                }
            }
            ModelConfig::Expr(e) => {
                if !e.params.contains(&s.param) {
                    return Err(CliError::config(format!(
                        "sweep.param `{}` is not listed in model.params",
                        s.param
                    )));
                }
                for p in &e.params {
                    if p != &s.param && !e.values.contains_key(p) {
                        return Err(CliError::config(format!("model.values has no value for parameter `{p}`")));
                    }
                }
                for p in e.positive.iter().chain(e.gamma.keys()).chain(e.alpha_derivatives.keys()) {
                    if !e.params.contains(p) {
                        return Err(CliError::config(format!("`{p}` is not listed in model.params")));
                    }
                }
                if !e.alpha_derivatives.is_empty() && e.alpha.is_none() {
                    return Err(CliError::config("model.alpha_derivatives given without model.alpha"));
                }
                // parse once now so syntax errors surface as config errors
                crate::model::ExprModel::new(e).map(|_| ())?;
            }
        }
        Ok(())
    }

    /// Values of the swept parameter, in order.
    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.points == 1 {
            return vec![s.from];
        }
        let last = (s.points - 1) as f64;
        (0..s.points)
            .map(|k| {
                let t = k as f64 / last;
                if k + 1 == s.points {
                    s.to
                } else {
                    match s.spacing {
                        Spacing::Linear => s.from + t * (s.to - s.from),
                        Spacing::Log => s.from * (s.to / s.from).powf(t),
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LANDAU: &str = r#"
[model]
kind = "landau"

[sweep]
from = 1.0
to = 1.0
g = [0.0, 0.5]
"#;

    #[test]
    fn minimal_landau_config() {
        let c = RunConfig::from_toml(LANDAU).unwrap();
        assert_eq!(c.model, ModelConfig::Landau { m: 0 });
        assert_eq!(c.grid.n, 256);
        assert_eq!(c.grid.n_sigma(), 8.0);
        assert_eq!(c.derivative, DerivativeConfig { h_rel: 1e-3, richardson: true });
        assert_eq!(c.sweep_values(), vec![1.0]);
    }

    #[test]
    fn empty_gauge_list_is_rejected() {
        let text = LANDAU.replace("g = [0.0, 0.5]", "g = []");
        assert!(matches!(RunConfig::from_toml(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected_with_location() {
        let text = LANDAU.replace("from = 1.0", "form = 1.0");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("form") || err.contains("line"), "{err}");
    }

    #[test]
    fn field_sweep_must_be_positive() {
        let text = LANDAU.replace("from = 1.0", "from = 0.0");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn sweep_spacing() {
        let text = LANDAU.replace("to = 1.0", "to = 8.0\npoints = 4\nspacing = \"log\"");
        let c = RunConfig::from_toml(&text).unwrap();
        let v = c.sweep_values();
        assert_eq!(v.len(), 4);
        for (a, b) in v.iter().zip([1.0, 2.0, 4.0, 8.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let text = LANDAU.replace("to = 1.0", "to = 2.0\npoints = 3");
        assert_eq!(RunConfig::from_toml(&text).unwrap().sweep_values(), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn invalid_derivative_and_grid_settings() {
        let bad = format!("{LANDAU}\n[derivative]\nh_rel = 0.5\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = format!("{LANDAU}\n[grid]\nn = 2\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = format!("{LANDAU}\n[grid]\nn_sigma = 8.0\nbounds = [-1.0, 1.0, -1.0, 1.0]\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = format!("{LANDAU}\n[output]\nformat = \"parquet\"\n");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn expr_model_validation() {
        let text = r#"
[model]
kind = "expr"
amplitude = "exp(-B*(x^2+y^2)/4)"
phase = "g*B*x*y"
params = ["B"]
positive = ["B"]

[sweep]
from = 1.0
to = 1.0
g = [0.5]
"#;
        assert!(RunConfig::from_toml(text).is_ok());
        let bad = text.replace("g*B*x*y", "g*B*x*+y");
        assert!(matches!(RunConfig::from_toml(&bad), Err(CliError::Config(_))));
        let bad = text.replace("g*B*x*y", "k*B*x*y");
        assert!(matches!(RunConfig::from_toml(&bad), Err(CliError::Config(_))));
        let bad = text.replace("params = [\"B\"]", "params = [\"B\", \"A\"]");
        assert!(matches!(RunConfig::from_toml(&bad), Err(CliError::Config(_))));
    }
}
