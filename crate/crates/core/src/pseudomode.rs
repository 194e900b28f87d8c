//! Reference dynamics through an enlarged Markovian system.
//!
//! An exponentially correlated bath is exactly equivalent to one damped
//! harmonic mode: couple the collective lowering operator to a resonant mode
//! with strength √(γ/2) and damp the mode at rate 2γ, and the reduced system
//! dynamics of the Lindblad evolution on the enlarged space matches the
//! memory-kernel equation. Two qubits carry at most two excitations and the
//! coupling conserves total excitation number, so truncating the mode at two
//! quanta is exact rather than approximate. None of the coefficient machinery
//! enters here, which makes this the bluntest cross-check in the crate.

use crate::algebra::{build_hamiltonian, build_lowering, DensityMatrix, Mat4, SystemParams};
use crate::integrator::{integrate_dense, IntegratorConfig, OdeState};
use crate::master::EvolveError;
use crate::{Scalar, C};

const MODE_DIM: usize = 3;
const DIM: usize = 4 * MODE_DIM;

/// Dense DIM×DIM complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
struct Dense<T>(Vec<C<T>>);

impl<T: Scalar> Dense<T> {
    fn zeros() -> Self {
        Dense(vec![C::new(T::zero(), T::zero()); DIM * DIM])
    }

    fn get(&self, i: usize, j: usize) -> C<T> {
        self.0[i * DIM + j]
    }

    fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.0[i * DIM + j] = v;
    }

    fn mul(&self, rhs: &Dense<T>) -> Dense<T> {
        let mut out = Dense::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.get(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..DIM {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    fn add_scaled(&self, rhs: &Dense<T>, w: C<T>) -> Dense<T> {
        let mut out = self.clone();
        for (o, r) in out.0.iter_mut().zip(rhs.0.iter()) {
            *o = *o + *r * w;
        }
        out
    }

    fn dagger(&self) -> Dense<T> {
        let mut out = Dense::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    fn symmetrized(&self) -> Dense<T> {
        let half = C::new(T::of(0.5), T::zero());
        let mut out = Dense::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                out.set(i, j, (self.get(i, j) + self.get(j, i).conj()) * half);
            }
        }
        out
    }
}

impl<T: Scalar> OdeState<T> for Dense<T> {
    fn dim(&self) -> usize {
        DIM * DIM
    }

    fn component(&self, i: usize) -> C<T> {
        self.0[i]
    }

    fn set_component(&mut self, i: usize, v: C<T>) {
        self.0[i] = v;
    }
}

/// system ⊗ mode embedding with composite index 3·(system index) + (mode
/// level).
fn kron_sys_mode<T: Scalar>(sys: &Mat4<T>, mode: &[[C<T>; MODE_DIM]; MODE_DIM]) -> Dense<T> {
    let mut out = Dense::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let s = sys.get(i, j);
            for m in 0..MODE_DIM {
                for n in 0..MODE_DIM {
                    out.set(MODE_DIM * i + m, MODE_DIM * j + n, s * mode[m][n]);
                }
            }
        }
    }
    out
}

fn mode_identity<T: Scalar>() -> [[C<T>; MODE_DIM]; MODE_DIM] {
    let zero = C::new(T::zero(), T::zero());
    let one = C::new(T::one(), T::zero());
    let mut m = [[zero; MODE_DIM]; MODE_DIM];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = one;
    }
    m
}

fn mode_lowering<T: Scalar>() -> [[C<T>; MODE_DIM]; MODE_DIM] {
    let zero = C::new(T::zero(), T::zero());
    let mut a = [[zero; MODE_DIM]; MODE_DIM];
    a[0][1] = C::new(T::one(), T::zero());
    a[1][2] = C::new(T::of(2.0).sqrt(), T::zero());
    a
}

#[derive(Clone, Copy, Debug)]
pub struct PseudomodeOptions<T = f64> {
    pub integrator: IntegratorConfig<T>,
    /// Multiplies the system–mode coupling; 0 decouples the mode entirely,
    /// which turns the reference into plain unitary system evolution.
    pub coupling_scale: T,
}

impl<T: Scalar> Default for PseudomodeOptions<T> {
    fn default() -> Self {
        PseudomodeOptions {
            integrator: IntegratorConfig::default(),
            coupling_scale: T::one(),
        }
    }
}

/// Propagate `rho0 ⊗ |vacuum⟩⟨vacuum|` under the enlarged Lindblad equation
/// and return the reduced system state at each grid time.
pub fn pseudomode_reference<T: Scalar>(
    p: &SystemParams<T>,
    rho0: &DensityMatrix<T>,
    t_grid: &[T],
    opts: &PseudomodeOptions<T>,
) -> Result<Vec<DensityMatrix<T>>, EvolveError> {
    p.validate()?;
    let half = T::of(0.5);
    let g = (p.gamma * half).sqrt() * opts.coupling_scale;
    let mode_decay = T::of(2.0) * p.gamma;

    let eye3 = mode_identity::<T>();
    let a3 = mode_lowering::<T>();
    let mut adag3 = [[C::new(T::zero(), T::zero()); MODE_DIM]; MODE_DIM];
    for i in 0..MODE_DIM {
        for j in 0..MODE_DIM {
            adag3[i][j] = a3[j][i].conj();
        }
    }

    let l = build_lowering(p);
    let h_sys = kron_sys_mode(&build_hamiltonian(p), &eye3);
    let couple_down = kron_sys_mode(&l, &adag3);
    let couple_up = kron_sys_mode(&l.dagger(), &a3);
    let h_tot = h_sys
        .add_scaled(&couple_down, C::new(g, T::zero()))
        .add_scaled(&couple_up, C::new(g, T::zero()));
    let jump = kron_sys_mode(&Mat4::identity(), &a3);
    let jump_dag = jump.dagger();
    let number = jump_dag.mul(&jump);

    let mut rho_tot = Dense::zeros();
    for i in 0..4 {
        for j in 0..4 {
            rho_tot.set(MODE_DIM * i, MODE_DIM * j, rho0.get(i, j));
        }
    }

    let minus_i = C::new(T::zero(), -T::one());
    let gamma_jump = C::new(mode_decay, T::zero());
    let minus_half_gamma = C::new(-mode_decay * half, T::zero());
    let mut rhs = |_t: T, rho: &Dense<T>| {
        let comm = h_tot.mul(rho).add_scaled(&rho.mul(&h_tot), C::new(-T::one(), T::zero()));
        let sandwich = jump.mul(rho).mul(&jump_dag);
        let anti = number.mul(rho).add_scaled(&rho.mul(&number), C::new(T::one(), T::zero()));
        Dense::zeros()
            .add_scaled(&comm, minus_i)
            .add_scaled(&sandwich, gamma_jump)
            .add_scaled(&anti, minus_half_gamma)
    };
    let mut post = |rho: &mut Dense<T>, _t: T| {
        *rho = rho.symmetrized();
    };

    let mut cfg = opts.integrator;
    cfg.max_step = cfg.max_step.min(T::of(0.1) / p.gamma);
    let out = integrate_dense(&mut rhs, rho_tot, T::zero(), t_grid, &cfg, &mut post)?;

    let mut states = Vec::with_capacity(out.states.len());
    for (rho, &t) in out.states.iter().zip(t_grid.iter()) {
        let mut sys = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = C::new(T::zero(), T::zero());
                for m in 0..MODE_DIM {
                    acc = acc + rho.get(MODE_DIM * i + m, MODE_DIM * j + m);
                }
                sys.set(i, j, acc);
            }
        }
        let dm = DensityMatrix::from_matrix(sys.symmetrized()).map_err(|source| {
            EvolveError::BadState {
                t: t.to_f64().unwrap_or(f64::NAN),
                source,
            }
        })?;
        states.push(dm);
    }
    Ok(states)
}
