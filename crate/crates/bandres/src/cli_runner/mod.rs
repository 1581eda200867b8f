//! Configuration-driven runs, the built-in presets, and report files.
//!
//! The pipeline is: resolve one or more [`config::ProblemConfig`]s (from
//! a TOML file or a preset), assemble and scan each, attach optional
//! energy-shift probes to every retained eigenvalue, and write a single
//! report (JSON, CSV, or text) atomically. Orchestration is
//! single-threaded; parallelism lives inside the engine's scan. Exit
//! codes: 0 success, 2 configuration error, 3 numerical/runtime failure.

pub mod config;
pub mod presets;
pub mod report;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::hamiltonian_builder::assemble;
use crate::observables::expectation_by_shift;
use crate::resonance_engine::{dimension_sweep, scan, EngineError, IterationConfig, ScanConfig};
use crate::ComplexScalar;

use config::ProblemConfig;
use presets::{preset_runs, PresetParams, ResolvedRun};
use report::{write_atomic, RecordRow, Report, ReportFormat, RunBlock};

/// Top-level failure, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problem (unreadable file, parse error, invalid
    /// values, unknown preset/override): exit code 2.
    #[error("{0}")]
    Config(String),
    /// Numerical or runtime failure during execution: exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

/// Optional command-line adjustments applied to every resolved run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

/// Classifies an engine failure: invalid user-supplied values (scan
/// window, dimension list, basis parameters) are configuration errors;
/// everything that surfaces mid-computation is a numerical failure.
fn engine_error(label: &str, e: EngineError) -> CliError {
    let msg = format!("run '{label}': {e}");
    match e {
        EngineError::InvalidConfig(_) | EngineError::Basis(_) => CliError::Config(msg),
        _ => CliError::Numerical(msg),
    }
}

impl RunOverrides {
    fn apply(&self, cfg: &mut ProblemConfig) {
        if self.tol.is_none() && self.max_iters.is_none() {
            return;
        }
        let mut section = cfg.iteration.clone().unwrap_or_default();
        if let Some(t) = self.tol {
            section.tol = t;
        }
        if let Some(m) = self.max_iters {
            section.max_iters = m;
        }
        cfg.iteration = Some(section);
    }
}

/// Executes one resolved configuration: assemble, scan, and attach
/// probes to every retained eigenvalue.
pub fn execute_config(label: &str, cfg: &ProblemConfig) -> Result<RunBlock, CliError> {
    let spec = cfg.basis_spec()?;
    let pot = cfg.potential()?;
    let scan_cfg = cfg.scan_config();
    let probes = cfg.probe_list();

    let h = assemble(&spec, &pot)
        .map_err(|e| CliError::Config(format!("run '{label}': {e}")))?;
    let outcome = scan(&h, &scan_cfg).map_err(|e| engine_error(label, e))?;

    // An empty result because nothing persisted is a legitimate report;
    // a scan where *every* step failed is a wholesale numerical failure.
    if outcome.steps > 0 && outcome.failures.len() == outcome.steps {
        let first = &outcome.failures[0];
        return Err(CliError::Numerical(format!(
            "run '{label}': no scan step converged ({} failures; first at e0={}: {})",
            outcome.failures.len(),
            first.e0,
            first.reason
        )));
    }

    let mut rows = Vec::with_capacity(outcome.resonances.len());
    let mut probe_notes = Vec::new();
    for (ri, rec) in outcome.resonances.iter().enumerate() {
        let mut values = Vec::with_capacity(probes.len());
        for (pi, probe) in probes.iter().enumerate() {
            let probe_cfg = IterationConfig {
                e0: rec.energy,
                ..scan_cfg.iteration.clone()
            };
            match expectation_by_shift(&spec, &pot, probe, &probe_cfg) {
                Ok(v) => values.push(Some((v.re, v.im))),
                Err(e) => {
                    values.push(None);
                    probe_notes.push((ri, pi, e.to_string()));
                }
            }
        }
        rows.push(RecordRow {
            record: rec.clone(),
            probe_values: values,
        });
    }

    Ok(RunBlock {
        label: label.to_string(),
        config: cfg.clone(),
        rows,
        failures: outcome.failures,
        probe_notes,
    })
}

/// Executes a list of resolved runs into a report.
pub fn execute_runs(runs: &[ResolvedRun]) -> Result<Report, CliError> {
    let mut blocks = Vec::with_capacity(runs.len());
    for run in runs {
        blocks.push(execute_config(&run.label, &run.config)?);
    }
    Ok(Report::new(blocks))
}

/// Loads a config file into a single resolved run labeled by the file
/// stem.
pub fn load_config_run(path: &Path) -> Result<ResolvedRun, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    let config = ProblemConfig::from_toml(&text)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    Ok(ResolvedRun { label, config })
}

fn default_out(stem: &str, format: ReportFormat) -> PathBuf {
    PathBuf::from(format!("{stem}_report.{}", format.extension()))
}

fn finish(report: &Report, format: ReportFormat, out: &Path) -> Result<(), CliError> {
    write_atomic(out, &report.emit(format))
}

/// `run <config>`: executes one config file and writes its report.
/// Returns the report path.
pub fn run_config(
    path: &Path,
    format: ReportFormat,
    out: Option<PathBuf>,
    overrides: &RunOverrides,
) -> Result<PathBuf, CliError> {
    let mut run = load_config_run(path)?;
    overrides.apply(&mut run.config);
    let report = execute_runs(std::slice::from_ref(&run))?;
    let out = out.unwrap_or_else(|| default_out(&run.label, format));
    finish(&report, format, &out)?;
    Ok(out)
}

/// `preset <name>`: resolves a preset (with `--set` overrides) and
/// writes its report. Returns the report path.
pub fn run_preset(
    name: &str,
    params: &PresetParams,
    format: ReportFormat,
    out: Option<PathBuf>,
    overrides: &RunOverrides,
) -> Result<PathBuf, CliError> {
    let mut runs = preset_runs(name, params)?;
    for run in &mut runs {
        overrides.apply(&mut run.config);
    }
    let report = execute_runs(&runs)?;
    let out = out.unwrap_or_else(|| default_out(name, format));
    finish(&report, format, &out)?;
    Ok(out)
}

/// `sweep-dims`: re-runs each resolved configuration at every requested
/// dimension (ascending), one block per (run, dimension) pair, so
/// semi-convergence is visible across blocks. Returns the report path.
pub fn run_sweep_dims(
    runs: &[ResolvedRun],
    dims: &[usize],
    stem: &str,
    format: ReportFormat,
    out: Option<PathBuf>,
    overrides: &RunOverrides,
) -> Result<PathBuf, CliError> {
    if dims.is_empty() {
        return Err(CliError::Config("sweep-dims needs at least one dimension".into()));
    }
    let mut blocks = Vec::new();
    for run in runs {
        let mut cfg = run.config.clone();
        overrides.apply(&mut cfg);
        let spec = cfg.basis_spec()?;
        let pot = cfg.potential()?;
        let scan_cfg: ScanConfig = cfg.scan_config();
        let sweep = dimension_sweep(&spec, &pot, dims, &scan_cfg)
            .map_err(|e| engine_error(&run.label, e))?;
        for entry in sweep {
            let mut dim_cfg = cfg.clone();
            dim_cfg.dim = entry.dim;
            blocks.push(RunBlock {
                label: format!("{}/dim={}", run.label, entry.dim),
                config: dim_cfg,
                rows: entry
                    .report
                    .resonances
                    .iter()
                    .map(|rec| RecordRow {
                        record: rec.clone(),
                        probe_values: vec![],
                    })
                    .collect(),
                failures: entry.report.failures,
                probe_notes: vec![],
            });
        }
    }
    let report = Report::new(blocks);
    let out = out.unwrap_or_else(|| default_out(stem, format));
    finish(&report, format, &out)?;
    Ok(out)
}

/// Convenience for tests and examples: scan energies of one resolved
/// config as (ER, EI) pairs.
pub fn scan_energies(cfg: &ProblemConfig) -> Result<Vec<ComplexScalar>, CliError> {
    let block = execute_config("scan", cfg)?;
    Ok(block.rows.iter().map(|r| r.record.energy).collect())
}
