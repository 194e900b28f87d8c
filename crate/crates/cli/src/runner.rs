//! Run execution: propagator dispatch, per-row sanity checks, file output,
//! and the parallel driver used by sweeps.

use crate::config::{Method, RunSpec};
use crate::output::{csv_document, csv_row, RunMetadata};
use crate::CliError;
use qbath::algebra::DensityMatrix;
use qbath::master::{evolve, EvolveError, MasterMethod};
use qbath::observables::{observe, sanity_monitor};
use qbath::pseudomode::{pseudomode_reference, PseudomodeOptions};
use qbath::qsd::{ensemble_average, QsdError};
use qbath::DensityMatrix64;
use rayon::prelude::*;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Output times 0, dt_out, 2·dt_out, ... ending exactly at t_final.
pub fn output_grid(t_final: f64, dt_out: f64) -> Vec<f64> {
    let n = ((t_final / dt_out) - 1e-9).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * dt_out).collect();
    let last = times.last_mut().unwrap();
    if *last > t_final {
        *last = t_final;
    }
    times
}

fn map_evolve(e: EvolveError) -> CliError {
    match e {
        EvolveError::Params(p) => CliError::Validation(p.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn map_qsd(e: QsdError) -> CliError {
    match e {
        QsdError::BadStep { .. } => CliError::Runtime(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

struct ComputedSeries {
    times: Vec<f64>,
    states: Vec<DensityMatrix64>,
    diagnostics: serde_json::Value,
    /// Finite ensembles only approximate trace conservation, so the drift
    /// check is skipped for them and the sampling error is reported instead.
    check_trace_drift: bool,
}

fn compute(spec: &RunSpec) -> Result<ComputedSeries, CliError> {
    let grid = output_grid(spec.t_final, spec.dt_out);
    let icfg = spec.integrator.to_config();
    match spec.method {
        Method::Exact | Method::Approx | Method::Lindblad => {
            let mm = match spec.method {
                Method::Exact => MasterMethod::Exact,
                Method::Approx => MasterMethod::Truncated,
                _ => MasterMethod::Lindblad,
            };
            let rho0 = DensityMatrix::from_pure(&spec.initial);
            let series =
                evolve(&spec.params, &rho0, mm, &grid, &icfg).map_err(map_evolve)?;
            let d = &series.diagnostics;
            let diagnostics = json!({
                "max_trace_derivative": d.max_trace_derivative,
                "max_hermiticity_defect": d.max_hermiticity_defect,
                "steps_accepted": d.steps_accepted,
                "steps_rejected": d.steps_rejected,
                "rhs_evals": d.rhs_evals,
            });
            Ok(ComputedSeries {
                times: series.times,
                states: series.states,
                diagnostics,
                check_trace_drift: true,
            })
        }
        Method::Qsd => {
            let ens = ensemble_average(
                &spec.params,
                &spec.initial,
                &grid,
                &spec.ensemble.to_config(),
            )
            .map_err(map_qsd)?;
            let states = ens
                .mean_states
                .iter()
                .map(|m| DensityMatrix::from_matrix(m.symmetrized()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Runtime(format!("ensemble mean is not a state: {e}")))?;
            Ok(ComputedSeries {
                times: ens.times,
                states,
                diagnostics: json!({ "mean_trace_error": ens.mean_trace_error }),
                check_trace_drift: false,
            })
        }
        Method::Pseudomode => {
            let rho0 = DensityMatrix::from_pure(&spec.initial);
            let opts = PseudomodeOptions {
                integrator: icfg,
                ..Default::default()
            };
            let states = pseudomode_reference(&spec.params, &rho0, &grid, &opts)
                .map_err(map_evolve)?;
            Ok(ComputedSeries {
                times: grid,
                states,
                diagnostics: json!({}),
                check_trace_drift: true,
            })
        }
    }
}

fn check_rows(series: &ComputedSeries) -> Result<(), CliError> {
    let trace0 = series.states[0].trace().re;
    for (t, dm) in series.times.iter().zip(&series.states) {
        let rep = sanity_monitor(dm.as_mat());
        if rep.hermiticity_defect > 1e-10 {
            return Err(CliError::Runtime(format!(
                "state at t = {t} lost Hermiticity (defect {:.2e})",
                rep.hermiticity_defect
            )));
        }
        if rep.min_eigenvalue < -1e-6 {
            return Err(CliError::Runtime(format!(
                "state at t = {t} lost positivity (min eigenvalue {:.2e})",
                rep.min_eigenvalue
            )));
        }
        if series.check_trace_drift && (rep.trace.re - trace0).abs() > 1e-8 {
            return Err(CliError::Runtime(format!(
                "trace drifted by {:.2e} at t = {t}",
                (rep.trace.re - trace0).abs()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CompletedRun {
    pub label: String,
    pub csv_path: PathBuf,
    pub metadata_path: PathBuf,
}

/// Run one spec and write `<label>.csv` plus `<label>.json` into `out_dir`.
/// Nothing is written until the run has fully succeeded, and a failed write
/// removes whatever it managed to create.
pub fn execute(spec: &RunSpec, out_dir: &Path) -> Result<CompletedRun, CliError> {
    let started = Instant::now();
    let series = compute(spec)?;
    check_rows(&series)?;
    let rows: Vec<String> = series
        .times
        .iter()
        .zip(&series.states)
        .map(|(t, dm)| csv_row(dm, &observe(*t, dm)))
        .collect();
    let csv = csv_document(&rows);
    let metadata = RunMetadata::new(
        spec,
        rows.len(),
        started.elapsed().as_secs_f64(),
        series.diagnostics,
    )
    .to_json();

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("{}.csv", spec.label));
    let metadata_path = out_dir.join(format!("{}.json", spec.label));
    let cleanup = || {
        let _ = std::fs::remove_file(&csv_path);
        let _ = std::fs::remove_file(&metadata_path);
    };
    if let Err(e) = std::fs::write(&csv_path, &csv) {
        cleanup();
        return Err(CliError::Runtime(format!(
            "cannot write {}: {e}",
            csv_path.display()
        )));
    }
    if let Err(e) = std::fs::write(&metadata_path, &metadata) {
        cleanup();
        return Err(CliError::Runtime(format!(
            "cannot write {}: {e}",
            metadata_path.display()
        )));
    }
    Ok(CompletedRun {
        label: spec.label.clone(),
        csv_path,
        metadata_path,
    })
}

/// Run every spec, each writing only its own files. Results come back in
/// input order regardless of scheduling.
pub fn execute_all(specs: &[RunSpec], out_dir: &Path) -> Vec<Result<CompletedRun, CliError>> {
    specs.par_iter().map(|s| execute(s, out_dir)).collect()
}

/// Worst per-run status: 0 if all succeeded, else the highest error code.
pub fn aggregate_exit_code(results: &[Result<CompletedRun, CliError>]) -> i32 {
    results
        .iter()
        .map(|r| match r {
            Ok(_) => 0,
            Err(e) => e.exit_code(),
        })
        .max()
        .unwrap_or(0)
}
