//! CSV time series and JSON run metadata.
//!
//! The CSV stores the upper triangle of ρ in row-major order (ρ is Hermitian,
//! so the lower triangle is redundant) followed by scalar diagnostics. Every
//! float is printed with 17 significant digits so a re-run with identical
//! inputs reproduces the file byte for byte.

use crate::config::{ParamsSpec, RunSpec};
use qbath::observables::ObservableRecord;
use qbath::DensityMatrix64;
use serde::Serialize;

pub const CSV_HEADER: &str = "t, re_rho_11, im_rho_11, re_rho_12, im_rho_12, \
re_rho_13, im_rho_13, re_rho_14, im_rho_14, re_rho_22, im_rho_22, \
re_rho_23, im_rho_23, re_rho_24, im_rho_24, re_rho_33, im_rho_33, \
re_rho_34, im_rho_34, re_rho_44, im_rho_44, purity, concurrence, trace, min_eig";

/// Upper-triangle index pairs in row-major order, matching the header.
pub const UPPER_TRIANGLE: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

fn push_float(row: &mut String, x: f64) {
    row.push_str(", ");
    row.push_str(&format!("{x:.16e}"));
}

/// One CSV data row for a state and its scalar record.
pub fn csv_row(rho: &DensityMatrix64, rec: &ObservableRecord) -> String {
    let mut row = format!("{:.16e}", rec.t);
    for (i, j) in UPPER_TRIANGLE {
        let e = rho.get(i, j);
        push_float(&mut row, e.re);
        push_float(&mut row, e.im);
    }
    push_float(&mut row, rec.purity);
    push_float(&mut row, rec.concurrence);
    push_float(&mut row, rec.trace.re);
    push_float(&mut row, rec.min_eigenvalue);
    row
}

/// Assemble the whole CSV document in memory.
pub fn csv_document(rows: &[String]) -> String {
    let mut doc = String::with_capacity(64 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    doc.push_str(CSV_HEADER);
    doc.push('\n');
    for row in rows {
        doc.push_str(row);
        doc.push('\n');
    }
    doc
}

#[derive(Debug, Serialize)]
pub struct StateMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub amplitudes: [[f64; 2]; 4],
}

#[derive(Debug, Serialize)]
pub struct IntegratorMetadata {
    pub abs_tol: f64,
    pub rel_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct EnsembleMetadata {
    pub n_traj: usize,
    pub dt: f64,
    pub seed: u64,
}

/// Everything needed to rerun and audit a run: the fully resolved
/// configuration, the artifact version, and the wall-clock runtime.
#[derive(Debug, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub label: String,
    pub method: String,
    pub params: ParamsSpec,
    pub initial_state: StateMetadata,
    pub t_final: f64,
    pub dt_out: f64,
    pub integrator: IntegratorMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleMetadata>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_note: Option<String>,
    pub rows: usize,
    pub runtime_seconds: f64,
    pub diagnostics: serde_json::Value,
}

impl RunMetadata {
    pub fn new(
        spec: &RunSpec,
        rows: usize,
        runtime_seconds: f64,
        diagnostics: serde_json::Value,
    ) -> Self {
        let uses_ensemble = spec.method == crate::config::Method::Qsd;
        RunMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            label: spec.label.clone(),
            method: spec.method.to_string(),
            params: ParamsSpec::from_params(&spec.params),
            initial_state: StateMetadata {
                name: spec.state_name.clone(),
                amplitudes: [0, 1, 2, 3].map(|k| {
                    let a = spec.initial.amp[k];
                    [a.re, a.im]
                }),
            },
            t_final: spec.t_final,
            dt_out: spec.dt_out,
            integrator: IntegratorMetadata {
                abs_tol: spec.integrator.abs_tol,
                rel_tol: spec.integrator.rel_tol,
                max_step: spec.integrator.max_step,
            },
            ensemble: uses_ensemble.then(|| EnsembleMetadata {
                n_traj: spec.ensemble.n_traj,
                dt: spec.ensemble.dt,
                seed: spec.ensemble.seed,
            }),
            window_note: spec.window_note.map(str::to_string),
            rows,
            runtime_seconds,
            diagnostics,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("metadata serializes");
        text.push('\n');
        text
    }
}
