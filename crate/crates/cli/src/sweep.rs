//! Parameter sweeps and their CSV / JSON output.

use std::io::Write;
use std::path::{Path, PathBuf};

use qmt_core::geometry::HERMITICITY_LIMIT;
use qmt_core::{covariant_qmt, qmt, DerivativeScheme, UnitSystem};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::model::Model;

pub const CSV_HEADER: [&str; 11] = [
    "B",
    "g",
    "G_naive",
    "G_covariant",
    "beta",
    "G_paper_ref",
    "G_oracle",
    "herm_residual",
    "grid_n",
    "grid_halfwidth",
    "fd_step",
];

/// One `(sweep value, g)` evaluation. The `B` column carries the swept
/// parameter's value; reference columns are empty for models without a
/// closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b: f64,
    pub g: f64,
    pub g_naive: f64,
    pub g_covariant: f64,
    pub beta: f64,
    pub g_paper_ref: Option<f64>,
    pub g_oracle: Option<f64>,
    pub herm_residual: f64,
    pub grid_n: usize,
    pub grid_halfwidth: f64,
    pub fd_step: f64,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.herm_residual.is_nan() || self.herm_residual >= HERMITICITY_LIMIT
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl SweepRow {
    fn to_record(&self) -> [String; 11] {
        [
            format_float(self.b),
            format_float(self.g),
            format_float(self.g_naive),
            format_float(self.g_covariant),
            format_float(self.beta),
            format_opt(self.g_paper_ref),
            format_opt(self.g_oracle),
            format_float(self.herm_residual),
            self.grid_n.to_string(),
            format_float(self.grid_halfwidth),
            format_float(self.fd_step),
        ]
    }

    fn from_record(record: &csv::StringRecord) -> std::result::Result<Self, String> {
        if record.len() != CSV_HEADER.len() {
            return Err(format!("expected {} fields, got {}", CSV_HEADER.len(), record.len()));
        }
        let num = |k: usize| -> std::result::Result<f64, String> {
            record[k].parse().map_err(|_| format!("{}: bad number `{}`", CSV_HEADER[k], &record[k]))
        };
        let opt = |k: usize| -> std::result::Result<Option<f64>, String> {
            if record[k].is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        Ok(SweepRow {
            b: num(0)?,
            g: num(1)?,
            g_naive: num(2)?,
            g_covariant: num(3)?,
            beta: num(4)?,
            g_paper_ref: opt(5)?,
            g_oracle: opt(6)?,
            herm_residual: num(7)?,
            grid_n: record[8].parse().map_err(|_| format!("grid_n: bad integer `{}`", &record[8]))?,
            grid_halfwidth: num(9)?,
            fd_step: num(10)?,
        })
    }
}

/// Computes every row of the sweep, ordered by sweep value then by `g`.
/// Rows run in parallel; the first failing row (in that order) is reported.
pub fn compute_rows(config: &RunConfig) -> Result<Vec<SweepRow>> {
    let model = Model::from_config(&config.model)?;
    let scheme = DerivativeScheme::new(config.derivative.h_rel, config.derivative.richardson)
        .map_err(|e| CliError::config(e.to_string()))?;
    let param = config.sweep.param.as_str();
    let jobs: Vec<(f64, f64)> = config
        .sweep_values()
        .into_iter()
        .flat_map(|v| config.sweep.g.iter().map(move |&g| (v, g)))
        .collect();

    let results: Vec<qmt_core::Result<SweepRow>> = jobs
        .par_iter()
        .map(|&(value, g)| {
            let setup = model.setup(param, value, g, &config.grid)?;
            let naive = qmt(&setup.family, &setup.at, &setup.grid, &scheme)?;
            let cov = covariant_qmt(&setup.family, &setup.connection, &setup.at, &setup.grid, &scheme)?;
            let k = naive.params().iter().position(|p| p == param).expect("swept parameter is declared");
            Ok(SweepRow {
                b: value,
                g,
                g_naive: naive.get(k, k),
                g_covariant: cov.get(k, k),
                beta: naive.beta()[k],
                g_paper_ref: setup.paper_ref,
                g_oracle: setup.oracle,
                herm_residual: naive.max_herm_residual(),
                grid_n: setup.grid.nx(),
                grid_halfwidth: setup.grid.half_width(),
                fd_step: naive.diagnostics.steps[k],
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for (row, (result, &(value, g))) in results.into_iter().zip(&jobs).enumerate() {
        let r = result.map_err(|source| CliError::Row { row, param: param.to_string(), value, g, source })?;
        let finite = [r.g_naive, r.g_covariant, r.beta, r.herm_residual].iter().all(|v| v.is_finite());
        if !finite || r.failed() {
            return Err(CliError::Row {
                row,
                param: param.to_string(),
                value,
                g,
                source: qmt_core::QmtError::Numerical(format!(
                    "non-finite output or hermiticity residual {:e} >= {HERMITICITY_LIMIT:e}",
                    r.herm_residual
                )),
            });
        }
        rows.push(r);
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for r in rows {
        w.write_record(r.to_record()).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

pub fn parse_csv(bytes: &[u8]) -> std::result::Result<Vec<SweepRow>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(format!("unexpected header {header:?}"));
    }
    rdr.records()
        .enumerate()
        .map(|(k, rec)| {
            let rec = rec.map_err(|e| e.to_string())?;
            SweepRow::from_record(&rec).map_err(|e| format!("row {k}: {e}"))
        })
        .collect()
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Path of the JSON diagnostics written next to the CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("diagnostics.json")
}

#[derive(Debug, Serialize)]
pub struct ToleranceReport {
    pub herm_limit: f64,
    pub max_herm_residual: f64,
    /// Largest `|G_naive − G_oracle| / G_oracle`, when an oracle exists.
    pub max_rel_err_naive_vs_oracle: Option<f64>,
    /// Largest relative spread of `G_covariant` across `g` at fixed sweep value.
    pub max_rel_spread_covariant: f64,
    pub failed_rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub units: &'static str,
    pub config: &'a RunConfig,
    pub rows: usize,
    pub tolerances: ToleranceReport,
}

pub fn tolerance_report(rows: &[SweepRow]) -> ToleranceReport {
    let max_herm_residual = rows.iter().map(|r| r.herm_residual).fold(0.0, f64::max);
    let oracle_errs: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.g_oracle.map(|o| (r.g_naive - o).abs() / o.abs()))
        .collect();
    let max_rel_err = if oracle_errs.is_empty() {
        None
    } else {
        Some(oracle_errs.iter().copied().fold(0.0, f64::max))
    };
    let mut spread = 0.0_f64;
    for group in rows.chunk_by(|a, b| a.b == b.b) {
        let lo = group.iter().map(|r| r.g_covariant).fold(f64::INFINITY, f64::min);
        let hi = group.iter().map(|r| r.g_covariant).fold(f64::NEG_INFINITY, f64::max);
        if hi.abs() > 0.0 {
            spread = spread.max((hi - lo) / hi.abs());
        }
    }
    ToleranceReport {
        herm_limit: HERMITICITY_LIMIT,
        max_herm_residual,
        max_rel_err_naive_vs_oracle: max_rel_err,
        max_rel_spread_covariant: spread,
        failed_rows: rows.iter().filter(|r| r.failed()).count(),
    }
}

pub fn diagnostics_json(config: &RunConfig, rows: &[SweepRow]) -> Vec<u8> {
    let diag = Diagnostics {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        units: UnitSystem::note(),
        config,
        rows: rows.len(),
        tolerances: tolerance_report(rows),
    };
    let mut out = serde_json::to_vec_pretty(&diag).expect("diagnostics serialize");
    out.push(b'\n');
    out
}

/// Runs the sweep and writes the CSV plus its diagnostics sidecar.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<SweepRow>> {
    let rows = compute_rows(config)?;
    let path = &config.output.path;
    write_atomic(path, &rows_to_csv(&rows))?;
    write_atomic(&sidecar_path(path), &diagnostics_json(config, &rows))?;
    Ok(rows)
}
