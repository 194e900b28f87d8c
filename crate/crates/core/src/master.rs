//! Reduced dynamics of the two-qubit system.
//!
//! The density matrix is propagated jointly with the ten memory coefficients
//! as one augmented ODE. Three levels of treatment share the same
//! right-hand-side skeleton and differ only in which coefficients move:
//!
//! * [`MasterMethod::Exact`] evolves all ten coefficient functions,
//! * [`MasterMethod::Truncated`] keeps only the four single-excitation
//!   coefficients and holds the pair corrections (f̃₅ and the F family) at
//!   zero,
//! * [`MasterMethod::Lindblad`] pins the coefficients at their long-time
//!   memoryless values, which reduces the equation to standard Lindblad form
//!   with the collective lowering operator as the single jump channel.

use std::cell::Cell;

use crate::algebra::{
    build_hamiltonian, build_lowering, pauli_embedded, DensityMatrix, Mat4, PauliOp, ParamsError,
    Qubit, StateError, SystemParams,
};
use crate::bath::{
    coefficient_rhs_approx, coefficient_rhs_exact, markov_asymptote, CoefficientState,
};
use crate::integrator::{integrate_dense, IntegratorConfig, OdeError, OdeState};
use crate::{Scalar, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MasterMethod {
    /// Full memory: all ten coefficient functions evolve.
    Exact,
    /// Single-excitation memory only: the doubly-excited pair corrections
    /// are frozen at zero.
    Truncated,
    /// Memoryless limit: coefficients pinned at their stationary values.
    Lindblad,
}

/// Density matrix, memory coefficients and the running coefficient integral
/// marched together by the integrator.
#[derive(Clone)]
pub struct AugmentedState<T = f64> {
    pub rho: Mat4<T>,
    pub coeffs: CoefficientState<T>,
    /// ∫₀ᵗ (f̄₁ + f̄₃) dτ, kept for the closed-form check on ρ₁₁.
    pub memory_integral: C<T>,
}

impl<T: Scalar> OdeState<T> for AugmentedState<T> {
    fn dim(&self) -> usize {
        27
    }

    fn component(&self, i: usize) -> C<T> {
        match i {
            0..=15 => self.rho.get(i / 4, i % 4),
            16..=25 => self.coeffs.to_array()[i - 16],
            26 => self.memory_integral,
            _ => unreachable!("augmented state has 27 components"),
        }
    }

    fn set_component(&mut self, i: usize, v: C<T>) {
        match i {
            0..=15 => self.rho.set(i / 4, i % 4, v),
            16..=25 => {
                let mut a = self.coeffs.to_array();
                a[i - 16] = v;
                self.coeffs = CoefficientState::from_array(a);
            }
            26 => self.memory_integral = v,
            _ => unreachable!("augmented state has 27 components"),
        }
    }
}

/// Fixed operators entering the equation of motion, built once per run.
pub struct SystemOps<T = f64> {
    pub hamiltonian: Mat4<T>,
    pub lowering: Mat4<T>,
    lowering_dag: Mat4<T>,
    /// P₁ = σ₊ᴬ, P₂ = σ₊ᴮ, P₃ = σ_zᴬσ₊ᴮ, P₄ = σ₊ᴬσ_zᴮ, matching the
    /// ordering of the coefficients f̄₁…f̄₄.
    raising: [Mat4<T>; 4],
    /// Adjoints of `raising`.
    lowering_partial: [Mat4<T>; 4],
    /// |11⟩⟨00|, the pair-coherence selector in the fluctuation term.
    pair_selector: Mat4<T>,
}

impl<T: Scalar> SystemOps<T> {
    pub fn new(p: &SystemParams<T>) -> Self {
        let sp_a = pauli_embedded(Qubit::A, PauliOp::Plus);
        let sp_b = pauli_embedded(Qubit::B, PauliOp::Plus);
        let sz_a = pauli_embedded(Qubit::A, PauliOp::Z);
        let sz_b = pauli_embedded(Qubit::B, PauliOp::Z);
        let raising = [sp_a, sp_b, sz_a.mul(&sp_b), sp_a.mul(&sz_b)];
        let lowering_partial = [
            raising[0].dagger(),
            raising[1].dagger(),
            raising[2].dagger(),
            raising[3].dagger(),
        ];
        let lowering = build_lowering(p);
        SystemOps {
            hamiltonian: build_hamiltonian(p),
            lowering_dag: lowering.dagger(),
            lowering,
            raising,
            lowering_partial,
            pair_selector: Mat4::unit(0, 3, C::new(T::one(), T::zero())),
        }
    }
}

/// The memory-dressed operator Ō(t)†ρ-product appearing in the dissipative
/// brackets: ρ·Σⱼ f̄ⱼ*Pⱼ − 2i·(Σⱼ FⱼPⱼ†)·ρ·|11⟩⟨00|.
pub fn memory_operator<T: Scalar>(
    rho: &Mat4<T>,
    c: &CoefficientState<T>,
    ops: &SystemOps<T>,
) -> Mat4<T> {
    let fbar = [c.fbar1, c.fbar2, c.fbar3, c.fbar4];
    let mut mean = Mat4::zeros();
    for j in 0..4 {
        mean = mean.add(&ops.raising[j].scale(fbar[j].conj()));
    }
    let mut fluct = Mat4::zeros();
    let big_f = [c.big_f1, c.big_f2, c.big_f3, c.big_f4];
    for j in 0..4 {
        fluct = fluct.add(&ops.lowering_partial[j].scale(big_f[j]));
    }
    let two_i = C::new(T::zero(), T::of(2.0));
    rho.mul(&mean)
        .sub(&fluct.mul(rho).mul(&ops.pair_selector).scale(two_i))
}

/// Equation of motion for the density matrix at fixed coefficient values.
pub fn density_rhs<T: Scalar>(
    rho: &Mat4<T>,
    c: &CoefficientState<T>,
    ops: &SystemOps<T>,
) -> Mat4<T> {
    let minus_i = C::new(T::zero(), -T::one());
    let md = memory_operator(rho, c, ops);
    let md_dag = md.dagger();
    let unitary = ops.hamiltonian.commutator(rho).scale(minus_i);
    let bracket = ops.lowering.mul(&md).sub(&md.mul(&ops.lowering));
    let bracket_adj = md_dag
        .mul(&ops.lowering_dag)
        .sub(&ops.lowering_dag.mul(&md_dag));
    unitary.add(&bracket).add(&bracket_adj)
}

fn augmented_rhs<T: Scalar>(
    s: &AugmentedState<T>,
    p: &SystemParams<T>,
    ops: &SystemOps<T>,
    method: MasterMethod,
) -> AugmentedState<T> {
    let dcoeffs = match method {
        MasterMethod::Exact => coefficient_rhs_exact(&s.coeffs, p),
        MasterMethod::Truncated => coefficient_rhs_approx(&s.coeffs, p),
        MasterMethod::Lindblad => CoefficientState::zero(),
    };
    AugmentedState {
        rho: density_rhs(&s.rho, &s.coeffs, ops),
        coeffs: dcoeffs,
        memory_integral: s.coeffs.fbar1 + s.coeffs.fbar3,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvolveDiagnostics {
    /// Largest |tr dρ/dt| seen across all right-hand-side evaluations.
    pub max_trace_derivative: f64,
    /// Largest Hermiticity defect of the marching state before cleanup.
    pub max_hermiticity_defect: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

/// Time series produced by [`evolve`]: one entry per requested output time.
pub struct RunSeries<T = f64> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub coefficients: Vec<CoefficientState<T>>,
    /// ∫₀ᵗ (f̄₁ + f̄₃) dτ at each output time.
    pub memory_integrals: Vec<C<T>>,
    pub diagnostics: EvolveDiagnostics,
}

#[derive(Debug, thiserror::Error)]
pub enum EvolveError {
    #[error("invalid system parameters: {0}")]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Integration(#[from] OdeError),
    #[error("unusable density matrix at t = {t}: {source}")]
    BadState { t: f64, source: StateError },
}

/// Propagate `rho0` under the chosen method, sampling at `t_grid` (starting
/// from t = 0, non-decreasing).
pub fn evolve<T: Scalar>(
    p: &SystemParams<T>,
    rho0: &DensityMatrix<T>,
    method: MasterMethod,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<RunSeries<T>, EvolveError> {
    p.validate()?;
    let ops = SystemOps::new(p);
    let coeffs0 = match method {
        MasterMethod::Lindblad => markov_asymptote(p),
        _ => CoefficientState::zero(),
    };
    let y0 = AugmentedState {
        rho: *rho0.as_mat(),
        coeffs: coeffs0,
        memory_integral: C::new(T::zero(), T::zero()),
    };

    let mut cfg = *cfg;
    if method != MasterMethod::Lindblad {
        // the coefficients relax on the 1/γ memory scale; keep steps inside it
        cfg.max_step = cfg.max_step.min(T::of(0.1) / p.gamma);
    }

    let max_trace = Cell::new(0.0f64);
    let max_herm = Cell::new(0.0f64);
    let mut rhs = |_t: T, s: &AugmentedState<T>| {
        let d = augmented_rhs(s, p, &ops, method);
        let tr = d.rho.trace().norm().to_f64().unwrap_or(f64::NAN);
        if tr > max_trace.get() || tr.is_nan() {
            max_trace.set(tr);
        }
        d
    };
    let mut post_step = |s: &mut AugmentedState<T>, _t: T| {
        let defect = s.rho.hermiticity_defect().to_f64().unwrap_or(f64::NAN);
        if defect > max_herm.get() || defect.is_nan() {
            max_herm.set(defect);
        }
        s.rho = s.rho.symmetrized();
    };

    let out = integrate_dense(&mut rhs, y0, T::zero(), t_grid, &cfg, &mut post_step)?;

    let mut states = Vec::with_capacity(out.states.len());
    let mut coefficients = Vec::with_capacity(out.states.len());
    let mut memory_integrals = Vec::with_capacity(out.states.len());
    for (s, &t) in out.states.iter().zip(t_grid.iter()) {
        let sym = s.rho.symmetrized();
        let dm = DensityMatrix::from_matrix(sym).map_err(|source| EvolveError::BadState {
            t: t.to_f64().unwrap_or(f64::NAN),
            source,
        })?;
        states.push(dm);
        coefficients.push(s.coeffs);
        memory_integrals.push(s.memory_integral);
    }

    Ok(RunSeries {
        times: t_grid.to_vec(),
        states,
        coefficients,
        memory_integrals,
        diagnostics: EvolveDiagnostics {
            max_trace_derivative: max_trace.get(),
            max_hermiticity_defect: max_herm.get(),
            steps_accepted: out.stats.steps_accepted,
            steps_rejected: out.stats.steps_rejected,
            rhs_evals: out.stats.rhs_evals,
        },
    })
}

/// For equal qubit couplings the |11⟩ population factorizes through the
/// coefficient integral: ρ₁₁(t) = ρ₁₁(0)·exp(−4κ·Re ∫₀ᵗ(f̄₁+f̄₃)dτ).
/// Returns the largest deviation from that closed form over the series, or
/// `None` when the parameters are not symmetric.
pub fn rho11_closed_form_deviation<T: Scalar>(
    series: &RunSeries<T>,
    p: &SystemParams<T>,
) -> Option<T> {
    if !p.is_symmetric() {
        return None;
    }
    let rho11_0 = series.states.first()?.get(0, 0).re;
    let four_kappa = T::of(4.0) * p.kappa_a;
    let mut worst = T::zero();
    for (dm, integral) in series.states.iter().zip(series.memory_integrals.iter()) {
        let predicted = rho11_0 * (-four_kappa * integral.re).exp();
        let dev = (dm.get(0, 0).re - predicted).abs();
        worst = worst.max(dev);
    }
    Some(worst)
}
