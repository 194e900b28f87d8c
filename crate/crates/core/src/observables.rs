//! Scalar diagnostics of a two-qubit density matrix.
//!
//! Everything here reduces to Hermitian eigenproblems of 4×4 matrices, solved
//! by a cyclic Jacobi sweep with complex plane rotations. That keeps the crate
//! free of external linear-algebra dependencies while staying at machine
//! precision for these tiny systems.

use crate::algebra::{DensityMatrix, Mat4};
use crate::{Scalar, C};

/// Eigenvalues (ascending) and an orthonormal eigenvector matrix (columns)
/// of a Hermitian 4×4 matrix. The input is symmetrized first, so tiny
/// Hermiticity defects are tolerated.
pub fn hermitian_eigen<T: Scalar>(m: &Mat4<T>) -> ([T; 4], Mat4<T>) {
    let mut a = m.symmetrized();
    let mut v: Mat4<T> = Mat4::identity();
    let scale = a.max_abs().max(T::one());
    let tol = scale * T::epsilon() * T::of(16.0);

    for _sweep in 0..50 {
        let mut off = T::zero();
        for p in 0..4 {
            for q in (p + 1)..4 {
                off = off + a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let g = a.get(p, q);
                let gn = g.norm();
                if gn <= scale * T::epsilon() {
                    continue;
                }
                let phase = g / C::new(gn, T::zero());
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let tau = (beta - alpha) / (T::of(2.0) * gn);
                let t = if tau == T::zero() {
                    T::one()
                } else {
                    tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let sigma = phase * C::new(s, T::zero());
                let cc = C::new(c, T::zero());

                for r in 0..4 {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    let new_rp = arp * cc - arq * sigma.conj();
                    let new_rq = arp * sigma + arq * cc;
                    a.set(r, p, new_rp);
                    a.set(p, r, new_rp.conj());
                    a.set(r, q, new_rq);
                    a.set(q, r, new_rq.conj());
                }
                let app = alpha * c * c - T::of(2.0) * gn * s * c + beta * s * s;
                let aqq = alpha * s * s + T::of(2.0) * gn * s * c + beta * c * c;
                a.set(p, p, C::new(app, T::zero()));
                a.set(q, q, C::new(aqq, T::zero()));
                a.set(p, q, C::new(T::zero(), T::zero()));
                a.set(q, p, C::new(T::zero(), T::zero()));

                for r in 0..4 {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * cc - vrq * sigma.conj());
                    v.set(r, q, vrp * sigma + vrq * cc);
                }
            }
        }
    }

    let mut idx = [0usize, 1, 2, 3];
    let diag = [
        a.get(0, 0).re,
        a.get(1, 1).re,
        a.get(2, 2).re,
        a.get(3, 3).re,
    ];
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let mut vals = [T::zero(); 4];
    let mut vecs = Mat4::zeros();
    for (col, &i) in idx.iter().enumerate() {
        vals[col] = diag[i];
        for r in 0..4 {
            vecs.set(r, col, v.get(r, i));
        }
    }
    (vals, vecs)
}

pub fn hermitian_eigenvalues<T: Scalar>(m: &Mat4<T>) -> [T; 4] {
    hermitian_eigen(m).0
}

/// Positive square root of a Hermitian positive-semidefinite matrix;
/// negative eigenvalues from roundoff are clamped to zero.
pub fn hermitian_sqrt<T: Scalar>(m: &Mat4<T>) -> Mat4<T> {
    let (vals, v) = hermitian_eigen(m);
    let mut d = Mat4::zeros();
    for i in 0..4 {
        d.set(i, i, C::new(vals[i].max(T::zero()).sqrt(), T::zero()));
    }
    v.mul(&d).mul(&v.dagger())
}

/// Re tr ρ², 1 for pure states, 1/4 for the maximally mixed state.
pub fn purity<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    let m = rho.as_mat();
    m.mul(m).trace().re
}

/// Smallest eigenvalue of the density matrix; slightly negative values flag
/// loss of positivity beyond roundoff.
pub fn min_eigenvalue<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    hermitian_eigenvalues(rho.as_mat())[0]
}

fn spin_flip<T: Scalar>() -> Mat4<T> {
    // (σ_y ⊗ σ_y) in the ordered product basis: antidiagonal (−1, 1, 1, −1)
    let mut m = Mat4::zeros();
    let one = T::one();
    m.set(0, 3, C::new(-one, T::zero()));
    m.set(1, 2, C::new(one, T::zero()));
    m.set(2, 1, C::new(one, T::zero()));
    m.set(3, 0, C::new(-one, T::zero()));
    m
}

/// Wootters concurrence: max(0, λ₁−λ₂−λ₃−λ₄) with λᵢ the decreasing square
/// roots of the eigenvalues of √ρ·(σ_y⊗σ_y)ρ*(σ_y⊗σ_y)·√ρ.
pub fn concurrence<T: Scalar>(rho: &DensityMatrix<T>) -> T {
    let m = rho.as_mat();
    let flip = spin_flip::<T>();
    let rho_tilde = flip.mul(&m.conjugate_entries()).mul(&flip);
    let root = hermitian_sqrt(m);
    let r = root.mul(&rho_tilde).mul(&root);
    let vals = hermitian_eigenvalues(&r);
    let lam: Vec<T> = vals
        .iter()
        .rev()
        .map(|&x| x.max(T::zero()).sqrt())
        .collect();
    (lam[0] - lam[1] - lam[2] - lam[3]).max(T::zero())
}

/// ½ tr|a − b|, between 0 (equal) and 1 (orthogonal supports).
pub fn trace_distance<T: Scalar>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> T {
    trace_distance_mat(a.as_mat(), b.as_mat())
}

/// Trace distance on raw Hermitian matrices, for series that are only
/// approximately normalized (e.g. finite trajectory ensembles).
pub fn trace_distance_mat<T: Scalar>(a: &Mat4<T>, b: &Mat4<T>) -> T {
    let diff = a.sub(b);
    let vals = hermitian_eigenvalues(&diff);
    let half = T::of(0.5);
    half * vals.iter().fold(T::zero(), |acc, &v| acc + v.abs())
}

/// Per-sample scalar summary attached to each output time of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord<T = f64> {
    pub t: T,
    pub purity: T,
    pub concurrence: T,
    pub trace: C<T>,
    pub min_eigenvalue: T,
}

pub fn observe<T: Scalar>(t: T, rho: &DensityMatrix<T>) -> ObservableRecord<T> {
    ObservableRecord {
        t,
        purity: purity(rho),
        concurrence: concurrence(rho),
        trace: rho.trace(),
        min_eigenvalue: min_eigenvalue(rho),
    }
}

/// Health check of a marching state: trace, minimum eigenvalue of the
/// Hermitian part, and the raw Hermiticity defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanityReport<T = f64> {
    pub trace: C<T>,
    pub min_eigenvalue: T,
    pub hermiticity_defect: T,
}

/// Works on raw matrices so that corrupted input is still reportable.
pub fn sanity_monitor<T: Scalar>(m: &Mat4<T>) -> SanityReport<T> {
    let sym = m.symmetrized();
    SanityReport {
        trace: m.trace(),
        min_eigenvalue: hermitian_eigenvalues(&sym)[0],
        hermiticity_defect: m.hermiticity_defect(),
    }
}
