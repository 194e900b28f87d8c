//! Stochastic wavefunction unraveling of the reduced dynamics.
//!
//! Each trajectory drives the four-amplitude wavefunction with one complex
//! Ornstein–Uhlenbeck process whose covariance reproduces the bath kernel;
//! averaging the outer products over trajectories recovers the density
//! matrix, giving a Monte-Carlo oracle for the deterministic equation that
//! shares none of its dissipator algebra. The unraveled form holds for equal
//! qubit parameters, which is enforced up front.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::algebra::{Mat4, ParamsError, PureState, SystemParams};
use crate::bath::{coefficient_rhs_exact, CoefficientState};
use crate::{Scalar, C};

/// One realization of the complex noise, stored conjugated since only z*
/// enters the trajectory equation. `z_star[k]` holds z*(k·dt).
#[derive(Clone, Debug)]
pub struct NoisePath<T = f64> {
    pub dt: T,
    pub z_star: Vec<C<T>>,
}

/// Exact discretization of the stationary complex Ornstein–Uhlenbeck process
/// with M[z(t)z*(s)] = (γ/2)e^{−γ|t−s|} and M[z(t)z(s)] = 0.
pub fn sample_ou_path_with<T, R>(rng: &mut R, gamma: T, dt: T, n_steps: usize) -> NoisePath<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let half = T::of(0.5);
    let draw = |rng: &mut R| {
        let re: T = rng.sample(StandardNormal);
        let im: T = rng.sample(StandardNormal);
        C::new(re * half.sqrt(), im * half.sqrt())
    };
    let stationary_std = (gamma * half).sqrt();
    let decay = (-gamma * dt).exp();
    let innovation_std = (gamma * half * (T::one() - decay * decay)).sqrt();

    let mut z = draw(rng) * C::new(stationary_std, T::zero());
    let mut z_star = Vec::with_capacity(n_steps + 1);
    z_star.push(z.conj());
    for _ in 0..n_steps {
        z = z * C::new(decay, T::zero()) + draw(rng) * C::new(innovation_std, T::zero());
        z_star.push(z.conj());
    }
    NoisePath { dt, z_star }
}

pub fn sample_ou_path<T>(gamma: T, dt: T, n_steps: usize, seed: u64) -> NoisePath<T>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    sample_ou_path_with(&mut rng, gamma, dt, n_steps)
}

/// Wavefunction amplitudes, the stochastic memory integral f̂₅ driven by this
/// trajectory's noise, and the deterministic coefficients carried alongside
/// so that every Runge–Kutta stage sees consistent values.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryState<T = f64> {
    pub c: [C<T>; 4],
    pub fhat5: C<T>,
    pub coeffs: CoefficientState<T>,
}

impl<T: Scalar> TrajectoryState<T> {
    pub fn new(psi0: &PureState<T>) -> Self {
        TrajectoryState {
            c: psi0.amp,
            fhat5: C::new(T::zero(), T::zero()),
            coeffs: CoefficientState::zero(),
        }
    }

    fn to_flat(self) -> [C<T>; 15] {
        let mut out = [C::new(T::zero(), T::zero()); 15];
        out[..4].copy_from_slice(&self.c);
        out[4] = self.fhat5;
        out[5..].copy_from_slice(&self.coeffs.to_array());
        out
    }

    fn from_flat(a: &[C<T>; 15]) -> Self {
        TrajectoryState {
            c: [a[0], a[1], a[2], a[3]],
            fhat5: a[4],
            coeffs: CoefficientState::from_array(a[5..].try_into().unwrap()),
        }
    }
}

fn trajectory_rhs<T: Scalar>(
    s: &TrajectoryState<T>,
    z_star: C<T>,
    p: &SystemParams<T>,
) -> TrajectoryState<T> {
    let kappa = C::new(p.kappa_a, T::zero());
    let two = C::new(T::of(2.0), T::zero());
    let [c1, c2, c3, c4] = s.c;
    let cf = &s.coeffs;

    let common = kappa * z_star * c1 - two * kappa * s.fhat5 * c1;
    let drain23 = -kappa * (cf.fbar1 - cf.fbar3) * (c2 + c3);
    let phase_pair = C::new(T::zero(), -(T::of(2.0) * p.omega_a + p.j_z));
    let phase_ground = C::new(T::zero(), -(p.j_z - T::of(2.0) * p.omega_a));
    let i_jz = C::new(T::zero(), p.j_z);
    let i_jxy = C::new(T::zero(), p.j_xy);

    let dc1 = phase_pair * c1 - two * kappa * (cf.fbar1 + cf.fbar3) * c1;
    let dc2 = common + i_jz * c2 - i_jxy * c3 + drain23;
    let dc3 = common + i_jz * c3 - i_jxy * c2 + drain23;
    let dc4 = kappa * z_star * (c2 + c3) + phase_ground * c4;

    let pair_rate = C::new(-p.gamma, T::of(2.0) * (p.omega_a + p.omega_b))
        + two * kappa * (cf.fbar1 + cf.fbar2);
    let dfhat5 = kappa * (cf.fbar3 + cf.fbar4) * z_star + pair_rate * s.fhat5;

    TrajectoryState {
        c: [dc1, dc2, dc3, dc4],
        fhat5: dfhat5,
        coeffs: coefficient_rhs_exact(cf, p),
    }
}

/// One fixed step of the trajectory equation, with the noise entering the
/// half step as the average of the bracketing samples.
pub fn trajectory_step<T: Scalar>(
    s: &TrajectoryState<T>,
    z_lo: C<T>,
    z_hi: C<T>,
    p: &SystemParams<T>,
    dt: T,
) -> TrajectoryState<T> {
    let half = T::of(0.5);
    let z_mid = (z_lo + z_hi) * C::new(half, T::zero());

    let advance = |base: &TrajectoryState<T>, k: &TrajectoryState<T>, h: T| {
        let b = base.to_flat();
        let d = k.to_flat();
        let mut out = b;
        for j in 0..15 {
            out[j] = b[j] + d[j] * C::new(h, T::zero());
        }
        TrajectoryState::from_flat(&out)
    };

    let k1 = trajectory_rhs(s, z_lo, p);
    let k2 = trajectory_rhs(&advance(s, &k1, half * dt), z_mid, p);
    let k3 = trajectory_rhs(&advance(s, &k2, half * dt), z_mid, p);
    let k4 = trajectory_rhs(&advance(s, &k3, dt), z_hi, p);

    let b = s.to_flat();
    let (a1, a2, a3, a4) = (k1.to_flat(), k2.to_flat(), k3.to_flat(), k4.to_flat());
    let sixth = dt * T::of(1.0 / 6.0);
    let third = dt * T::of(1.0 / 3.0);
    let mut out = b;
    for j in 0..15 {
        out[j] = b[j]
            + a1[j] * C::new(sixth, T::zero())
            + a2[j] * C::new(third, T::zero())
            + a3[j] * C::new(third, T::zero())
            + a4[j] * C::new(sixth, T::zero());
    }
    TrajectoryState::from_flat(&out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig<T = f64> {
    pub n_traj: usize,
    /// Noise and integration step; output times are snapped to its multiples.
    pub dt: T,
    pub seed: u64,
}

impl<T: Scalar> Default for EnsembleConfig<T> {
    fn default() -> Self {
        EnsembleConfig {
            n_traj: 2000,
            dt: T::of(0.01),
            seed: 42,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QsdError {
    #[error("invalid system parameters: {0}")]
    Params(#[from] ParamsError),
    #[error("trajectory unraveling requires equal parameters for both qubits")]
    AsymmetricParameters,
    #[error("ensemble needs at least one trajectory")]
    EmptyEnsemble,
    #[error("noise step must be positive and finite")]
    BadStep,
}

/// Trajectory-averaged density matrices on the (snapped) output grid. The
/// mean of finitely many outer products is Hermitian by construction but its
/// trace fluctuates around one at the 1/√N level.
pub struct EnsembleSeries<T = f64> {
    pub times: Vec<T>,
    pub mean_states: Vec<Mat4<T>>,
    /// max over the grid of |tr ρ̄ − 1|.
    pub mean_trace_error: T,
}

impl<T: Scalar> std::fmt::Debug for EnsembleSeries<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnsembleSeries")
            .field("times", &self.times)
            .field("mean_states", &self.mean_states)
            .field("mean_trace_error", &self.mean_trace_error)
            .finish()
    }
}

const BLOCK: usize = 64;

/// Average `n_traj` trajectories from the pure state `psi0`, sampling at
/// `t_grid` (each time snapped to the nearest noise step). Trajectory m
/// always draws from stream m of the seeded generator, so results are
/// bytewise reproducible for any thread count.
pub fn ensemble_average<T>(
    p: &SystemParams<T>,
    psi0: &PureState<T>,
    t_grid: &[T],
    cfg: &EnsembleConfig<T>,
) -> Result<EnsembleSeries<T>, QsdError>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    p.validate()?;
    if !p.is_symmetric() {
        return Err(QsdError::AsymmetricParameters);
    }
    if cfg.n_traj == 0 {
        return Err(QsdError::EmptyEnsemble);
    }
    if !(cfg.dt > T::zero()) || !cfg.dt.is_finite() {
        return Err(QsdError::BadStep);
    }

    let indices: Vec<usize> = t_grid
        .iter()
        .map(|&t| (t / cfg.dt).round().to_f64().unwrap_or(0.0).max(0.0) as usize)
        .collect();
    let times: Vec<T> = indices.iter().map(|&k| cfg.dt * T::of(k as f64)).collect();
    let n_steps = indices.iter().copied().max().unwrap_or(0);

    let n_blocks = cfg.n_traj.div_ceil(BLOCK);
    let block_sums: Vec<Vec<Mat4<T>>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(cfg.n_traj);
            let mut acc = vec![Mat4::zeros(); indices.len()];
            for m in lo..hi {
                let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
                rng.set_stream(m as u64);
                let path = sample_ou_path_with(&mut rng, p.gamma, cfg.dt, n_steps);
                let mut state = TrajectoryState::new(psi0);
                let mut cursor = 0usize;
                for k in 0..=n_steps {
                    while cursor < indices.len() && indices[cursor] == k {
                        let psi = PureState::from_amplitudes(state.c);
                        acc[cursor] = acc[cursor].add(&psi.outer());
                        cursor += 1;
                    }
                    if k < n_steps {
                        state = trajectory_step(
                            &state,
                            path.z_star[k],
                            path.z_star[k + 1],
                            p,
                            cfg.dt,
                        );
                    }
                }
            }
            acc
        })
        .collect();

    let weight = C::new(T::one() / T::of(cfg.n_traj as f64), T::zero());
    let mut mean_states = vec![Mat4::zeros(); indices.len()];
    for block in &block_sums {
        for (m, s) in mean_states.iter_mut().zip(block.iter()) {
            *m = m.add(s);
        }
    }
    for m in &mut mean_states {
        *m = m.scale(weight);
    }
    let mut mean_trace_error = T::zero();
    for m in &mean_states {
        mean_trace_error = mean_trace_error.max((m.trace().re - T::one()).abs());
    }

    Ok(EnsembleSeries {
        times,
        mean_states,
        mean_trace_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DensityMatrix;
    use crate::integrator::IntegratorConfig;
    use crate::master::{evolve, MasterMethod};
    use crate::observables::trace_distance_mat;
    use approx::assert_abs_diff_eq;

    fn symmetric_baseline() -> SystemParams {
        SystemParams::figure_baseline()
    }

    #[test]
    fn noise_paths_are_reproducible_and_streams_disjoint() {
        let a = sample_ou_path(1.0, 0.01, 200, 7);
        let b = sample_ou_path(1.0, 0.01, 200, 7);
        assert_eq!(a.z_star, b.z_star);

        let mut rng0 = ChaCha12Rng::seed_from_u64(7);
        rng0.set_stream(0);
        let mut rng1 = ChaCha12Rng::seed_from_u64(7);
        rng1.set_stream(1);
        let s0 = sample_ou_path_with(&mut rng0, 1.0, 0.01, 200);
        let s1 = sample_ou_path_with(&mut rng1, 1.0, 0.01, 200);
        assert_ne!(s0.z_star[0], s1.z_star[0]);
    }

    #[test]
    fn noise_statistics_match_the_kernel() {
        let gamma = 1.3;
        let dt = 0.05;
        let n_steps = 200;
        let n_paths = 10_000;

        let probes = [0usize, 50, 125];
        let lag = 20; // τ = 1.0
        let mut abs2 = 0.0;
        let mut lag_cov = C::new(0.0, 0.0);
        let mut pseudo = C::new(0.0, 0.0);
        for m in 0..n_paths {
            let mut rng = ChaCha12Rng::seed_from_u64(99);
            rng.set_stream(m as u64);
            let path = sample_ou_path_with(&mut rng, gamma, dt, n_steps);
            for &k in &probes {
                abs2 += path.z_star[k].norm_sqr();
            }
            lag_cov += path.z_star[40].conj() * path.z_star[40 + lag];
            pseudo += path.z_star[40] * path.z_star[40 + lag];
        }
        let samples = (n_paths * probes.len()) as f64;
        abs2 /= samples;
        lag_cov /= n_paths as f64;
        pseudo /= n_paths as f64;

        let tol = 5.0 / (n_paths as f64).sqrt();
        assert_abs_diff_eq!(abs2, gamma / 2.0, epsilon = tol);
        let expect = gamma / 2.0 * (-gamma * lag as f64 * dt).exp();
        assert_abs_diff_eq!(lag_cov.re, expect, epsilon = tol);
        assert_abs_diff_eq!(lag_cov.im, 0.0, epsilon = tol);
        assert!(pseudo.norm() < tol, "pseudo-covariance {pseudo}");
    }

    #[test]
    fn decoupled_trajectory_reproduces_unitary_evolution() {
        let p = SystemParams {
            kappa_a: 0.0,
            kappa_b: 0.0,
            ..symmetric_baseline()
        };
        let psi0 = PureState::equal_superposition();
        let grid = [0.0, 1.0, 2.5, 4.0];
        let cfg = EnsembleConfig {
            n_traj: 1,
            dt: 0.005,
            seed: 3,
        };
        let ens = ensemble_average(&p, &psi0, &grid, &cfg).unwrap();
        let tight = IntegratorConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            ..Default::default()
        };
        let master = evolve(
            &p,
            &DensityMatrix::from_pure(&psi0),
            MasterMethod::Exact,
            &grid,
            &tight,
        )
        .unwrap();
        for (m, dm) in ens.mean_states.iter().zip(master.states.iter()) {
            let dev = m.sub(dm.as_mat()).max_abs();
            assert!(dev < 1e-8, "trajectory deviates from unitary flow by {dev:.3e}");
            assert_abs_diff_eq!(m.trace().re, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn exchange_symmetric_amplitudes_stay_bitwise_equal() {
        let p = symmetric_baseline();
        let psi0 = PureState::equal_superposition();
        let path = sample_ou_path(p.gamma, 0.01, 400, 11);
        let mut s = TrajectoryState::new(&psi0);
        for k in 0..400 {
            s = trajectory_step(&s, path.z_star[k], path.z_star[k + 1], &p, 0.01);
            assert_eq!(s.c[1], s.c[2], "exchange symmetry broken at step {k}");
        }
    }

    #[test]
    fn ground_state_only_acquires_phase() {
        let p = symmetric_baseline();
        let psi0 = PureState::ket00();
        let path = sample_ou_path(p.gamma, 0.01, 300, 21);
        let mut s = TrajectoryState::new(&psi0);
        for k in 0..300 {
            s = trajectory_step(&s, path.z_star[k], path.z_star[k + 1], &p, 0.01);
        }
        let t = 3.0;
        let expect = C::new(0.0, -(p.j_z - 2.0 * p.omega_a) * t).exp();
        assert!((s.c[3] - expect).norm() < 1e-8);
        for i in 0..3 {
            assert_eq!(s.c[i], C::new(0.0, 0.0));
        }
    }

    #[test]
    fn small_ensemble_tracks_the_master_equation() {
        let p = symmetric_baseline();
        let psi0 = PureState::ket10();
        let grid = [0.0, 0.75, 1.5, 2.25, 3.0];
        let cfg = EnsembleConfig {
            n_traj: 200,
            dt: 0.01,
            seed: 42,
        };
        let ens = ensemble_average(&p, &psi0, &grid, &cfg).unwrap();
        let master = evolve(
            &p,
            &DensityMatrix::from_pure(&psi0),
            MasterMethod::Exact,
            &grid,
            &Default::default(),
        )
        .unwrap();
        for (m, dm) in ens.mean_states.iter().zip(master.states.iter()) {
            let d = trace_distance_mat(m, dm.as_mat());
            assert!(d < 0.1, "trajectory mean drifted {d} from the master equation");
        }
        assert!(ens.mean_trace_error < 0.15);
    }

    #[test]
    fn ensembles_are_deterministic_across_runs() {
        let p = symmetric_baseline();
        let psi0 = PureState::no_double_excitation();
        let grid = [0.0, 0.5, 1.0];
        let cfg = EnsembleConfig {
            n_traj: 70, // spans two blocks, one of them partial
            dt: 0.02,
            seed: 5,
        };
        let a = ensemble_average(&p, &psi0, &grid, &cfg).unwrap();
        let b = ensemble_average(&p, &psi0, &grid, &cfg).unwrap();
        for (x, y) in a.mean_states.iter().zip(b.mean_states.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn output_times_snap_to_noise_steps() {
        let p = symmetric_baseline();
        let psi0 = PureState::ket00();
        let cfg = EnsembleConfig {
            n_traj: 1,
            dt: 0.01,
            seed: 1,
        };
        let ens = ensemble_average(&p, &psi0, &[0.0, 0.013, 0.5004], &cfg).unwrap();
        assert_abs_diff_eq!(ens.times[1], 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(ens.times[2], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unequal_parameters_are_rejected() {
        let mut p = symmetric_baseline();
        p.kappa_b = 2.0;
        let err = ensemble_average(
            &p,
            &PureState::ket10(),
            &[0.0],
            &EnsembleConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, QsdError::AsymmetricParameters);
    }
}
