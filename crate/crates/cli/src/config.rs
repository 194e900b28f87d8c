//! Run configuration: TOML files, figure presets, flag overrides, and sweeps.

use crate::CliError;
use qbath::algebra::PureState;
use qbath::integrator::IntegratorConfig;
use qbath::qsd::EnsembleConfig;
use qbath::{C64, PureState64, SystemParams64};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Which propagator a run uses.
///
/// `Exact` and `Approx` integrate the memory-kernel master equation with the
/// full and the noise-free coefficient systems respectively, `Lindblad` pins
/// the coefficients at their memoryless limit, `Qsd` averages stochastic
/// trajectories, and `Pseudomode` traces out an explicitly integrated
/// lossy mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Approx,
    Lindblad,
    Qsd,
    Pseudomode,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(Method::Exact),
            "approx" => Ok(Method::Approx),
            "lindblad" => Ok(Method::Lindblad),
            "qsd" => Ok(Method::Qsd),
            "pseudomode" => Ok(Method::Pseudomode),
            other => Err(CliError::Validation(format!(
                "unknown method {other:?}; expected exact, approx, lindblad, qsd, or pseudomode"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Method::Exact => "exact",
            Method::Approx => "approx",
            Method::Lindblad => "lindblad",
            Method::Qsd => "qsd",
            Method::Pseudomode => "pseudomode",
        };
        f.write_str(name)
    }
}

/// Model parameters as they appear in a config file; all seven rates are
/// required so a run is always fully specified on disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub omega_a: f64,
    pub omega_b: f64,
    pub j_xy: f64,
    pub j_z: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma: f64,
}

impl ParamsSpec {
    pub fn to_params(self) -> SystemParams64 {
        SystemParams64 {
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            j_xy: self.j_xy,
            j_z: self.j_z,
            kappa_a: self.kappa_a,
            kappa_b: self.kappa_b,
            gamma: self.gamma,
        }
    }

    pub fn from_params(p: &SystemParams64) -> Self {
        ParamsSpec {
            omega_a: p.omega_a,
            omega_b: p.omega_b,
            j_xy: p.j_xy,
            j_z: p.j_z,
            kappa_a: p.kappa_a,
            kappa_b: p.kappa_b,
            gamma: p.gamma,
        }
    }
}

/// Initial state: either one of the named presets or explicit amplitudes
/// over {|11⟩, |10⟩, |01⟩, |00⟩}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Custom(CustomState),
}

/// Explicit amplitudes, each as `[re, im]`. They are normalized unless
/// `unnormalized = true`, which takes them verbatim.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomState {
    pub amplitudes: [[f64; 2]; 4],
    #[serde(default)]
    pub unnormalized: bool,
}

/// Resolve a state name. The six recognized names cover the initial states
/// used by the figure presets.
pub fn named_state(name: &str) -> Option<PureState64> {
    match name {
        "state11" => Some(PureState::ket11()),
        "state10" => Some(PureState::ket10()),
        "bell_phi" => Some(PureState::bell_phi()),
        "bell_psi" => Some(PureState::bell_psi()),
        "plus_all" => Some(PureState::equal_superposition()),
        "no11" => Some(PureState::no_double_excitation()),
        _ => None,
    }
}

impl StateSpec {
    pub fn resolve(&self) -> Result<(Option<String>, PureState64), CliError> {
        match self {
            StateSpec::Named(name) => named_state(name)
                .map(|psi| (Some(name.clone()), psi))
                .ok_or_else(|| {
                    CliError::Validation(format!(
                        "unknown initial state {name:?}; expected state11, state10, \
                         bell_phi, bell_psi, plus_all, or no11, or an amplitudes table"
                    ))
                }),
            StateSpec::Custom(custom) => {
                let amp = custom.amplitudes.map(|[re, im]| C64::new(re, im));
                if amp.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                    return Err(CliError::Validation(
                        "initial amplitudes must be finite".into(),
                    ));
                }
                let psi = PureState::from_amplitudes(amp);
                if custom.unnormalized {
                    if psi.norm_sqr() == 0.0 {
                        return Err(CliError::Validation("initial state has zero norm".into()));
                    }
                    Ok((None, psi))
                } else {
                    psi.normalized()
                        .map(|n| (None, n))
                        .ok_or_else(|| CliError::Validation("initial state has zero norm".into()))
                }
            }
        }
    }
}

fn default_abs_tol() -> f64 {
    1e-9
}

fn default_rel_tol() -> f64 {
    1e-7
}

/// Adaptive-integrator tolerances as configured on disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            abs_tol: default_abs_tol(),
            rel_tol: default_rel_tol(),
            max_step: None,
        }
    }
}

impl IntegratorSpec {
    pub fn to_config(self) -> IntegratorConfig {
        IntegratorConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            ..Default::default()
        }
    }
}

fn default_n_traj() -> usize {
    2000
}

fn default_traj_dt() -> f64 {
    0.01
}

fn default_seed() -> u64 {
    42
}

/// Trajectory-ensemble settings; only consulted by the `qsd` method.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_traj_dt")]
    pub dt: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n_traj: default_n_traj(),
            dt: default_traj_dt(),
            seed: default_seed(),
        }
    }
}

impl EnsembleSpec {
    pub fn to_config(self) -> EnsembleConfig {
        EnsembleConfig {
            n_traj: self.n_traj,
            dt: self.dt,
            seed: self.seed,
        }
    }
}

/// On-disk run description. Unknown keys are rejected so that typos fail
/// loudly instead of silently falling back to defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub method: Option<String>,
    pub t_final: f64,
    #[serde(default)]
    pub dt_out: Option<f64>,
    pub initial_state: StateSpec,
    pub params: ParamsSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
}

/// Flag-level overrides; flags win over both file values and preset values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub method: Option<Method>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub t_final: Option<f64>,
    pub dt_out: Option<f64>,
}

/// A fully resolved run: everything the runner needs, nothing optional left.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub label: String,
    pub params: SystemParams64,
    pub state_name: Option<String>,
    pub initial: PureState64,
    pub method: Method,
    pub t_final: f64,
    pub dt_out: f64,
    pub integrator: IntegratorSpec,
    pub ensemble: EnsembleSpec,
    pub window_note: Option<&'static str>,
}

const WINDOW_NOTE: &str =
    "time window chosen by this implementation; the reference figures leave it unspecified";

fn finish(
    label: String,
    params: SystemParams64,
    state: StateSpec,
    method: Method,
    t_final: f64,
    dt_out: Option<f64>,
    integrator: IntegratorSpec,
    ensemble: Option<EnsembleSpec>,
    window_note: Option<&'static str>,
    ov: &Overrides,
) -> Result<RunSpec, CliError> {
    let method = ov.method.unwrap_or(method);
    let t_final = ov.t_final.unwrap_or(t_final);
    let dt_out = ov.dt_out.or(dt_out).unwrap_or(t_final / 400.0);
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(CliError::Validation(format!(
            "t_final must be positive and finite, got {t_final}"
        )));
    }
    if !dt_out.is_finite() || dt_out <= 0.0 || dt_out > t_final {
        return Err(CliError::Validation(format!(
            "dt_out must lie in (0, t_final], got {dt_out}"
        )));
    }
    params
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let (state_name, initial) = state.resolve()?;
    let mut ensemble = ensemble.unwrap_or_default();
    if let Some(n) = ov.n_traj {
        ensemble.n_traj = n;
    }
    if let Some(s) = ov.seed {
        ensemble.seed = s;
    }
    if method == Method::Qsd {
        if ensemble.n_traj == 0 {
            return Err(CliError::Validation("n_traj must be at least 1".into()));
        }
        if !ensemble.dt.is_finite() || ensemble.dt <= 0.0 {
            return Err(CliError::Validation(format!(
                "trajectory dt must be positive, got {}",
                ensemble.dt
            )));
        }
    }
    if !integrator.abs_tol.is_finite()
        || integrator.abs_tol <= 0.0
        || !integrator.rel_tol.is_finite()
        || integrator.rel_tol <= 0.0
    {
        return Err(CliError::Validation(
            "integrator tolerances must be positive".into(),
        ));
    }
    Ok(RunSpec {
        label,
        params,
        state_name,
        initial,
        method,
        t_final,
        dt_out,
        integrator,
        ensemble,
        window_note,
    })
}

/// Read and parse a TOML config file.
pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("cannot parse {}: {e}", path.display())))
}

/// Resolve a parsed config file into a single run. The label falls back to
/// the file stem when the file does not set one.
pub fn resolve_file(cfg: &FileConfig, path: &Path, ov: &Overrides) -> Result<RunSpec, CliError> {
    let label = cfg.label.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string())
    });
    let method = match &cfg.method {
        Some(s) => s.parse()?,
        None => Method::Exact,
    };
    finish(
        label,
        cfg.params.to_params(),
        cfg.initial_state.clone(),
        method,
        cfg.t_final,
        cfg.dt_out,
        cfg.integrator,
        cfg.ensemble,
        None,
        ov,
    )
}

/// The bundled experiment drivers, one per reference figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(CliError::Validation(format!(
                "unknown preset {other:?}; expected fig1 through fig5"
            ))),
        }
    }
}

fn symmetric_params(gamma: f64, omega: f64, kappa: f64) -> SystemParams64 {
    SystemParams64 {
        omega_a: omega,
        omega_b: omega,
        j_xy: 0.7,
        j_z: 0.3,
        kappa_a: kappa,
        kappa_b: kappa,
        gamma,
    }
}

fn trim_float(v: f64) -> String {
    format!("{v}")
}

impl Preset {
    /// Expand a preset into its run list, applying any flag overrides.
    pub fn runs(self, ov: &Overrides) -> Result<Vec<RunSpec>, CliError> {
        let mut out = Vec::new();
        let mut push = |label: String,
                        params: SystemParams64,
                        state: &str,
                        method: Method,
                        t_final: f64|
         -> Result<(), CliError> {
            out.push(finish(
                label,
                params,
                StateSpec::Named(state.to_string()),
                method,
                t_final,
                None,
                IntegratorSpec::default(),
                None,
                Some(WINDOW_NOTE),
                ov,
            )?);
            Ok(())
        };
        match self {
            Preset::Fig1 => {
                for state in ["state10", "bell_phi", "bell_psi", "state11"] {
                    push(
                        format!("fig1_{state}"),
                        symmetric_params(1.0, 0.5, 1.0),
                        state,
                        Method::Exact,
                        30.0,
                    )?;
                }
            }
            Preset::Fig2 => {
                push(
                    "fig2_state10".to_string(),
                    symmetric_params(1.0, 0.5, 1.0),
                    "state10",
                    Method::Exact,
                    30.0,
                )?;
            }
            Preset::Fig3 => {
                for gamma in [0.1, 1.0] {
                    for omega in [0.5, 2.0] {
                        for method in [Method::Exact, Method::Approx] {
                            push(
                                format!(
                                    "fig3_gamma{}_omega{}_{method}",
                                    trim_float(gamma),
                                    trim_float(omega)
                                ),
                                symmetric_params(gamma, omega, 1.0),
                                "plus_all",
                                method,
                                150.0,
                            )?;
                        }
                    }
                }
            }
            Preset::Fig4 => {
                for method in [Method::Exact, Method::Approx] {
                    push(
                        format!("fig4_{method}"),
                        symmetric_params(0.1, 0.5, 2.0),
                        "plus_all",
                        method,
                        150.0,
                    )?;
                }
            }
            Preset::Fig5 => {
                for method in [Method::Exact, Method::Approx] {
                    push(
                        format!("fig5_{method}"),
                        symmetric_params(0.1, 0.5, 2.0),
                        "no11",
                        method,
                        150.0,
                    )?;
                }
            }
        }
        Ok(out)
    }
}

/// Which model parameter a sweep varies. `omega` and `kappa` set both
/// qubits at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    OmegaA,
    OmegaB,
    Omega,
    JXy,
    JZ,
    KappaA,
    KappaB,
    Kappa,
    Gamma,
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "omega_a" => Ok(SweepAxis::OmegaA),
            "omega_b" => Ok(SweepAxis::OmegaB),
            "omega" => Ok(SweepAxis::Omega),
            "j_xy" => Ok(SweepAxis::JXy),
            "j_z" => Ok(SweepAxis::JZ),
            "kappa_a" => Ok(SweepAxis::KappaA),
            "kappa_b" => Ok(SweepAxis::KappaB),
            "kappa" => Ok(SweepAxis::Kappa),
            "gamma" => Ok(SweepAxis::Gamma),
            other => Err(CliError::Validation(format!(
                "unknown sweep axis {other:?}; expected omega_a, omega_b, omega, \
                 j_xy, j_z, kappa_a, kappa_b, kappa, or gamma"
            ))),
        }
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::OmegaA => "omega_a",
            SweepAxis::OmegaB => "omega_b",
            SweepAxis::Omega => "omega",
            SweepAxis::JXy => "j_xy",
            SweepAxis::JZ => "j_z",
            SweepAxis::KappaA => "kappa_a",
            SweepAxis::KappaB => "kappa_b",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Gamma => "gamma",
        }
    }

    pub fn apply(self, p: &mut SystemParams64, value: f64) {
        match self {
            SweepAxis::OmegaA => p.omega_a = value,
            SweepAxis::OmegaB => p.omega_b = value,
            SweepAxis::Omega => {
                p.omega_a = value;
                p.omega_b = value;
            }
            SweepAxis::JXy => p.j_xy = value,
            SweepAxis::JZ => p.j_z = value,
            SweepAxis::KappaA => p.kappa_a = value,
            SweepAxis::KappaB => p.kappa_b = value,
            SweepAxis::Kappa => {
                p.kappa_a = value;
                p.kappa_b = value;
            }
            SweepAxis::Gamma => p.gamma = value,
        }
    }
}

/// Parse a comma-separated value list, keeping the original tokens for file
/// naming. An empty string yields an empty sweep.
pub fn parse_sweep_values(s: &str) -> Result<Vec<(String, f64)>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map(|v| (t.to_string(), v))
                .map_err(|_| CliError::Validation(format!("cannot parse sweep value {t:?}")))
        })
        .collect()
}

/// Expand base runs across sweep values. Each produced spec carries the
/// swept value in its label; validation of the new parameters happens at
/// run time so a bad value fails its own run without aborting the rest.
pub fn sweep_runs(base: &[RunSpec], axis: SweepAxis, values: &[(String, f64)]) -> Vec<RunSpec> {
    let mut out = Vec::with_capacity(base.len() * values.len());
    for spec in base {
        for (token, value) in values {
            let mut s = spec.clone();
            axis.apply(&mut s.params, *value);
            s.label = format!("{}_{}{}", spec.label, axis.name(), token);
            out.push(s);
        }
    }
    out
}
