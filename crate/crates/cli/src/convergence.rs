//! Grid-resolution and finite-difference step studies at a single point.

use qmt_core::{qmt, DerivativeScheme};
use serde::Serialize;

use crate::config::{GridConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::model::Model;

pub const GRID_SIZES: [usize; 4] = [64, 128, 256, 512];
pub const STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Differences below this are treated as converged; ordering below it is noise.
pub const DIFFERENCE_FLOOR: f64 = 1e-12;
/// Step pair used to measure the Richardson order; smaller steps already
/// reach round-off with this scheme.
pub const RICHARDSON_ORDER_STEPS: (f64, f64) = (4e-2, 2e-2);

pub const PLAIN_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
pub const RICHARDSON_MIN_ORDER: f64 = 3.5;

#[derive(Debug, Clone, Serialize)]
pub struct GridEntry {
    pub n: usize,
    pub g_naive: f64,
    /// `|G(n) − G(n/2)|`, absent for the coarsest grid.
    pub diff_prev: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepEntry {
    pub h_rel: f64,
    pub richardson: bool,
    pub g_naive: f64,
    pub error: f64,
    /// `log(e_prev / e) / log(h_prev / h)` against the previous step.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub param: String,
    pub value: f64,
    pub g: f64,
    /// Oracle value when the model has one, else the Richardson value at
    /// `h_rel = 1e-3` on the finest grid.
    pub reference: f64,
    pub reference_is_oracle: bool,
    pub grid: Vec<GridEntry>,
    pub steps: Vec<StepEntry>,
    /// Plain-FD error ratio between `h` and `h/2` at `h_rel = 1e-2`.
    pub plain_halving_ratio: f64,
    /// Observed Richardson order over [`RICHARDSON_ORDER_STEPS`], when an
    /// oracle is available.
    pub richardson_order: Option<f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("point: {}={} g={}\n", self.param, self.value, self.g);
        let kind = if self.reference_is_oracle { "oracle" } else { "richardson h_rel=1e-3" };
        out += &format!("reference ({kind}): {:.16e}\n\n", self.reference);
        out += "n        G_naive                  |G(n)-G(n/2)|\n";
        for e in &self.grid {
            let d = e.diff_prev.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into());
            out += &format!("{:<8} {:.16e}  {d}\n", e.n, e.g_naive);
        }
        out += "\nh_rel    scheme      G_naive                  error       order\n";
        for e in &self.steps {
            let scheme = if e.richardson { "richardson" } else { "plain" };
            let o = e.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
            out += &format!("{:<8.0e} {scheme:<11} {:.16e}  {:.3e}   {o}\n", e.h_rel, e.g_naive, e.error);
        }
        out += &format!("\nplain error ratio h/(h/2) at h_rel=1e-2: {:.4}\n", self.plain_halving_ratio);
        if let Some(o) = self.richardson_order {
            let (h1, h2) = RICHARDSON_ORDER_STEPS;
            out += &format!("richardson order between h_rel={h1:e} and {h2:e}: {o:.3}\n");
        }
        out += "\n";
        for c in &self.checks {
            out += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out
    }
}

/// Runs both studies at the config's first sweep value and first gauge value.
pub fn run_convergence(config: &RunConfig) -> Result<ConvergenceReport> {
    let model = Model::from_config(&config.model)?;
    let param = config.sweep.param.clone();
    let value = config.sweep.from;
    let g = config.sweep.g[0];
    let base_scheme = DerivativeScheme::new(config.derivative.h_rel, config.derivative.richardson)
        .map_err(|e| CliError::config(e.to_string()))?;

    let row_err = |source| CliError::Row { row: 0, param: param.clone(), value, g, source };
    let eval = |n: usize, scheme: &DerivativeScheme| -> Result<(f64, Option<f64>)> {
        let grid = GridConfig { n, ..config.grid.clone() };
        let setup = model.setup(&param, value, g, &grid).map_err(row_err)?;
        let r = qmt(&setup.family, &setup.at, &setup.grid, scheme).map_err(row_err)?;
        let k = r.params().iter().position(|p| *p == param).expect("swept parameter is declared");
        Ok((r.get(k, k), setup.oracle))
    };

    let mut grid = Vec::new();
    for &n in &GRID_SIZES {
        let (v, _) = eval(n, &base_scheme)?;
        let diff_prev = grid.last().map(|p: &GridEntry| (v - p.g_naive).abs());
        grid.push(GridEntry { n, g_naive: v, diff_prev });
    }

    let n_fd = config.grid.n;
    let richardson_ref = DerivativeScheme::new(1e-3, true).expect("valid scheme");
    let (fallback, oracle) = eval(n_fd, &richardson_ref)?;
    let reference = oracle.unwrap_or(fallback);

    let mut steps = Vec::new();
    for richardson in [false, true] {
        let mut prev: Option<(f64, f64)> = None;
        for &h in &STEPS {
            let scheme = DerivativeScheme::new(h, richardson).expect("valid scheme");
            let (v, _) = eval(n_fd, &scheme)?;
            let error = (v - reference).abs();
            let order = prev.map(|(hp, ep)| (ep / error).ln() / (hp / h).ln());
            steps.push(StepEntry { h_rel: h, richardson, g_naive: v, error, order });
            prev = Some((h, error));
        }
    }

    let err_at = |h: f64, richardson: bool| -> Result<f64> {
        let (v, _) = eval(n_fd, &DerivativeScheme::new(h, richardson).expect("valid scheme"))?;
        Ok((v - reference).abs())
    };
    let plain_halving_ratio = err_at(STEPS[0], false)? / err_at(STEPS[0] / 2.0, false)?;
    let richardson_order = match oracle {
        Some(_) => {
            let (h1, h2) = RICHARDSON_ORDER_STEPS;
            Some((err_at(h1, true)? / err_at(h2, true)?).ln() / (h1 / h2).ln())
        }
        None => None,
    };

    let checks = checks(&grid, &steps, plain_halving_ratio, richardson_order);
    Ok(ConvergenceReport {
        param,
        value,
        g,
        reference,
        reference_is_oracle: oracle.is_some(),
        grid,
        steps,
        plain_halving_ratio,
        richardson_order,
        checks,
    })
}

fn checks(grid: &[GridEntry], steps: &[StepEntry], ratio: f64, richardson_order: Option<f64>) -> Vec<Check> {
    let mut out = Vec::new();

    let diffs: Vec<f64> = grid.iter().filter_map(|e| e.diff_prev).collect();
    let monotone = diffs.windows(2).all(|w| w[1] < w[0] || w[1] < DIFFERENCE_FLOOR);
    out.push(Check {
        name: "grid differences shrink".into(),
        passed: monotone,
        detail: format!("{:?} (floor {DIFFERENCE_FLOOR:e})", diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()),
    });

    let (lo, hi) = PLAIN_RATIO_RANGE;
    out.push(Check {
        name: "plain second order".into(),
        passed: (lo..=hi).contains(&ratio),
        detail: format!("error ratio {ratio:.4}, expected [{lo}, {hi}]"),
    });

    if let Some(order) = richardson_order {
        let (h1, h2) = RICHARDSON_ORDER_STEPS;
        out.push(Check {
            name: "richardson order".into(),
            passed: order >= RICHARDSON_MIN_ORDER,
            detail: format!("order {order:.3} between h_rel {h1:e} and {h2:e}, expected >= {RICHARDSON_MIN_ORDER}"),
        });
        let find = |r: bool| steps.iter().find(|e| e.h_rel == 1e-3 && e.richardson == r);
        if let (Some(r), Some(p)) = (find(true), find(false)) {
            out.push(Check {
                name: "richardson beats plain".into(),
                passed: r.error < p.error,
                detail: format!("{:.3e} < {:.3e} at h_rel 1e-3", r.error, p.error),
            });
        }
    }
    out
}
