//! Two-qubit operator algebra in the fixed product basis
//! {|11⟩, |10⟩, |01⟩, |00⟩}.
//!
//! Conventions used throughout the crate:
//!
//! * basis index 0 ↔ |11⟩, 1 ↔ |10⟩, 2 ↔ |01⟩, 3 ↔ |00⟩;
//! * qubit A is the left tensor factor, so |ab⟩ means A in |a⟩, B in |b⟩;
//! * σ_z|1⟩ = +|1⟩, σ_z|0⟩ = −|0⟩, σ₋|1⟩ = |0⟩, σ₊|0⟩ = |1⟩.
//!
//! Embedded operators are written out as explicit 4×4 tables; [`kron2`]
//! provides the generic 2×2 ⊗ 2×2 construction and the tests assert the two
//! routes agree entry by entry.

use crate::{Scalar, C};

/// Dense 4×4 complex matrix with value semantics.
///
/// The dimension is fixed: every operator and state in the two-qubit problem
/// lives in the same four-dimensional space, so there is no dynamic sizing
/// anywhere in the hot path.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat4<T = f64> {
    e: [[C<T>; 4]; 4],
}

impl<T: Scalar> Mat4<T> {
    pub fn zeros() -> Self {
        Mat4 {
            e: [[C::new(T::zero(), T::zero()); 4]; 4],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.e[i][i] = C::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: [[C<T>; 4]; 4]) -> Self {
        Mat4 { e: rows }
    }

    /// Matrix with a single nonzero entry, |row⟩⟨col| scaled by `value`.
    pub fn unit(row: usize, col: usize, value: C<T>) -> Self {
        let mut m = Self::zeros();
        m.e[row][col] = value;
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.e[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.e[i][j] = v;
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.e[i][j] = self.e[j][i].conj();
            }
        }
        m
    }

    pub fn conjugate_entries(&self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.e[i][j] = m.e[i][j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C<T> {
        self.e[0][0] + self.e[1][1] + self.e[2][2] + self.e[3][3]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.e[i][k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..4 {
                    m.e[i][j] = m.e[i][j] + a * rhs.e[k][j];
                }
            }
        }
        m
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.e[i][j] = m.e[i][j] + rhs.e[i][j];
            }
        }
        m
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.e[i][j] = m.e[i][j] - rhs.e[i][j];
            }
        }
        m
    }

    pub fn scale(&self, a: C<T>) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in 0..4 {
                m.e[i][j] = m.e[i][j] * a;
            }
        }
        m
    }

    /// AB − BA.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// Largest entrywise modulus, used as a cheap matrix norm.
    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let a = self.e[i][j].norm();
                if a > m {
                    m = a;
                }
            }
        }
        m
    }

    /// max |M − M†| over entries; zero for an exactly Hermitian matrix.
    pub fn hermiticity_defect(&self) -> T {
        let mut m = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                let d = (self.e[i][j] - self.e[j][i].conj()).norm();
                if d > m {
                    m = d;
                }
            }
        }
        m
    }

    /// (M + M†)/2.
    pub fn symmetrized(&self) -> Self {
        let half = C::new(T::of(0.5), T::zero());
        self.add(&self.dagger()).scale(half)
    }

    /// Apply the matrix to a column of amplitudes.
    pub fn apply(&self, v: &[C<T>; 4]) -> [C<T>; 4] {
        let mut out = [C::new(T::zero(), T::zero()); 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] = out[i] + self.e[i][j] * v[j];
            }
        }
        out
    }
}

impl<T: Scalar> std::fmt::Debug for Mat4<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat4 [")?;
        for i in 0..4 {
            write!(f, "  ")?;
            for j in 0..4 {
                write!(f, "{:+.4}{:+.4}i  ", self.e[i][j].re, self.e[i][j].im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two 2×2 blocks, A-factor ⊗ B-factor, in the basis
/// ordering of this crate (single-qubit rows/columns ordered {|1⟩, |0⟩}).
pub fn kron2<T: Scalar>(a: &[[C<T>; 2]; 2], b: &[[C<T>; 2]; 2]) -> Mat4<T> {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.set(2 * i + k, 2 * j + l, a[i][j] * b[k][l]);
                }
            }
        }
    }
    m
}

/// Which qubit an embedded single-qubit operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Qubit {
    A,
    B,
}

/// Single-qubit Pauli-type operator selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliOp {
    Plus,
    Minus,
    Z,
}

/// Single-qubit operator as a 2×2 block in the {|1⟩, |0⟩} ordering.
pub fn pauli2<T: Scalar>(op: PauliOp) -> [[C<T>; 2]; 2] {
    let z = C::new(T::zero(), T::zero());
    let one = C::new(T::one(), T::zero());
    match op {
        PauliOp::Plus => [[z, one], [z, z]],
        PauliOp::Minus => [[z, z], [one, z]],
        PauliOp::Z => [[one, z], [z, -one]],
    }
}

/// σ₊, σ₋ or σ_z acting on one qubit, embedded into the two-qubit space.
///
/// Written as explicit tables; `kron2(pauli2(op), identity)` and friends
/// reproduce them and the tests keep the two constructions in lock step.
pub fn pauli_embedded<T: Scalar>(q: Qubit, op: PauliOp) -> Mat4<T> {
    let one = C::new(T::one(), T::zero());
    let mut m = Mat4::zeros();
    match (q, op) {
        // σ₋ᴬ: |11⟩→|01⟩, |10⟩→|00⟩
        (Qubit::A, PauliOp::Minus) => {
            m.set(2, 0, one);
            m.set(3, 1, one);
        }
        // σ₊ᴬ: |01⟩→|11⟩, |00⟩→|10⟩
        (Qubit::A, PauliOp::Plus) => {
            m.set(0, 2, one);
            m.set(1, 3, one);
        }
        // σ_zᴬ = diag(+1, +1, −1, −1)
        (Qubit::A, PauliOp::Z) => {
            m.set(0, 0, one);
            m.set(1, 1, one);
            m.set(2, 2, -one);
            m.set(3, 3, -one);
        }
        // σ₋ᴮ: |11⟩→|10⟩, |01⟩→|00⟩
        (Qubit::B, PauliOp::Minus) => {
            m.set(1, 0, one);
            m.set(3, 2, one);
        }
        // σ₊ᴮ: |10⟩→|11⟩, |00⟩→|01⟩
        (Qubit::B, PauliOp::Plus) => {
            m.set(0, 1, one);
            m.set(2, 3, one);
        }
        // σ_zᴮ = diag(+1, −1, +1, −1)
        (Qubit::B, PauliOp::Z) => {
            m.set(0, 0, one);
            m.set(1, 1, -one);
            m.set(2, 2, one);
            m.set(3, 3, -one);
        }
    }
    m
}

/// Model parameters: qubit splittings, XXZ couplings, bath couplings and the
/// bath memory rate.
///
/// The bath correlation is (γ/2)·exp(−γ|t−s|); larger `gamma` means shorter
/// memory, with the white-noise (Markov) limit reached as γ → ∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T = f64> {
    pub omega_a: T,
    pub omega_b: T,
    pub j_xy: T,
    pub j_z: T,
    pub kappa_a: T,
    pub kappa_b: T,
    pub gamma: T,
}

impl<T: Scalar> SystemParams<T> {
    /// Symmetric parameter set: ω_A = ω_B = ω and κ_A = κ_B = κ.
    pub fn symmetric(omega: T, j_xy: T, j_z: T, kappa: T, gamma: T) -> Self {
        SystemParams {
            omega_a: omega,
            omega_b: omega,
            j_xy,
            j_z,
            kappa_a: kappa,
            kappa_b: kappa,
            gamma,
        }
    }

    /// The parameter point used by the reference figures:
    /// γ = 1, ω = 0.5, κ = 1, J_xy = 0.7, J_z = 0.3.
    pub fn figure_baseline() -> Self {
        Self::symmetric(T::of(0.5), T::of(0.7), T::of(0.3), T::one(), T::one())
    }

    pub fn is_symmetric(&self) -> bool {
        self.omega_a == self.omega_b && self.kappa_a == self.kappa_b
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let all = [
            self.omega_a,
            self.omega_b,
            self.j_xy,
            self.j_z,
            self.kappa_a,
            self.kappa_b,
            self.gamma,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ParamsError::NonFinite);
        }
        if self.gamma <= T::zero() {
            return Err(ParamsError::NonPositiveGamma);
        }
        if self.kappa_a < T::zero() || self.kappa_b < T::zero() {
            return Err(ParamsError::NegativeKappa);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("parameter is not finite")]
    NonFinite,
    #[error("bath memory rate gamma must be positive")]
    NonPositiveGamma,
    #[error("coupling kappa must be non-negative")]
    NegativeKappa,
}

/// System Hamiltonian
/// H = ω_A σ_zᴬ + ω_B σ_zᴮ + J_xy(σ₊ᴬσ₋ᴮ + σ₋ᴬσ₊ᴮ) + J_z σ_zᴬσ_zᴮ.
///
/// Diagonal (ω_A+ω_B+J_z, ω_A−ω_B−J_z, −ω_A+ω_B−J_z, −ω_A−ω_B+J_z) plus the
/// J_xy exchange coupling between |10⟩ and |01⟩.
pub fn build_hamiltonian<T: Scalar>(p: &SystemParams<T>) -> Mat4<T> {
    let mut h = Mat4::zeros();
    let zr = T::zero();
    h.set(0, 0, C::new(p.omega_a + p.omega_b + p.j_z, zr));
    h.set(1, 1, C::new(p.omega_a - p.omega_b - p.j_z, zr));
    h.set(2, 2, C::new(-p.omega_a + p.omega_b - p.j_z, zr));
    h.set(3, 3, C::new(-p.omega_a - p.omega_b + p.j_z, zr));
    h.set(1, 2, C::new(p.j_xy, zr));
    h.set(2, 1, C::new(p.j_xy, zr));
    h
}

/// Collective coupling operator L = κ_A σ₋ᴬ + κ_B σ₋ᴮ through which both
/// qubits see the common bath.
pub fn build_lowering<T: Scalar>(p: &SystemParams<T>) -> Mat4<T> {
    let a = pauli_embedded(Qubit::A, PauliOp::Minus).scale(C::new(p.kappa_a, T::zero()));
    let b = pauli_embedded(Qubit::B, PauliOp::Minus).scale(C::new(p.kappa_b, T::zero()));
    a.add(&b)
}

/// Pure two-qubit state, four complex amplitudes over {|11⟩,|10⟩,|01⟩,|00⟩}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureState<T = f64> {
    pub amp: [C<T>; 4],
}

impl<T: Scalar> PureState<T> {
    pub fn from_amplitudes(amp: [C<T>; 4]) -> Self {
        PureState { amp }
    }

    /// Basis ket by index (0 ↔ |11⟩ ... 3 ↔ |00⟩).
    pub fn basis(index: usize) -> Self {
        let mut amp = [C::new(T::zero(), T::zero()); 4];
        amp[index] = C::new(T::one(), T::zero());
        PureState { amp }
    }

    pub fn ket11() -> Self {
        Self::basis(0)
    }

    pub fn ket10() -> Self {
        Self::basis(1)
    }

    pub fn ket01() -> Self {
        Self::basis(2)
    }

    pub fn ket00() -> Self {
        Self::basis(3)
    }

    /// (|11⟩ + |00⟩)/√2.
    pub fn bell_phi() -> Self {
        let r = C::new(T::of(std::f64::consts::FRAC_1_SQRT_2), T::zero());
        let z = C::new(T::zero(), T::zero());
        PureState { amp: [r, z, z, r] }
    }

    /// (|10⟩ + |01⟩)/√2.
    pub fn bell_psi() -> Self {
        let r = C::new(T::of(std::f64::consts::FRAC_1_SQRT_2), T::zero());
        let z = C::new(T::zero(), T::zero());
        PureState { amp: [z, r, r, z] }
    }

    /// Equal-weight superposition of all four basis kets.
    pub fn equal_superposition() -> Self {
        let h = C::new(T::of(0.5), T::zero());
        PureState { amp: [h, h, h, h] }
    }

    /// (|10⟩ + |01⟩ + |00⟩)/√3: no population or coherence in |11⟩.
    pub fn no_double_excitation() -> Self {
        let r = C::new(T::one() / T::of(3.0).sqrt(), T::zero());
        let z = C::new(T::zero(), T::zero());
        PureState { amp: [z, r, r, r] }
    }

    pub fn norm_sqr(&self) -> T {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescale to unit norm. Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        if n == T::zero() || !n.is_finite() {
            return None;
        }
        let inv = C::new(T::one() / n, T::zero());
        let mut amp = self.amp;
        for a in &mut amp {
            *a = *a * inv;
        }
        Some(PureState { amp })
    }

    /// |ψ⟩⟨ψ| as a raw matrix (no normalization applied).
    pub fn outer(&self) -> Mat4<T> {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.set(i, j, self.amp[i] * self.amp[j].conj());
            }
        }
        m
    }
}

/// Two-qubit density matrix. Hermitian by construction: every constructor
/// either builds an exactly Hermitian matrix or symmetrizes its input.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix<T = f64> {
    m: Mat4<T>,
}

impl<T: Scalar> std::fmt::Debug for DensityMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.m.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("matrix is not Hermitian (defect {defect})")]
    NotHermitian { defect: f64 },
    #[error("state has non-finite entries")]
    NonFinite,
    #[error("state has zero norm")]
    ZeroNorm,
}

impl<T: Scalar> DensityMatrix<T> {
    /// ρ = |ψ⟩⟨ψ| from a normalized pure state.
    pub fn from_pure(psi: &PureState<T>) -> Self {
        DensityMatrix { m: psi.outer() }
    }

    /// Accept a matrix as a density matrix, symmetrizing away roundoff.
    ///
    /// Rejects matrices whose Hermiticity defect exceeds `1e-10` in units of
    /// the largest entry; anything above that is a bug upstream, not noise.
    pub fn from_matrix(m: Mat4<T>) -> Result<Self, StateError> {
        for i in 0..4 {
            for j in 0..4 {
                let e = m.get(i, j);
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(StateError::NonFinite);
                }
            }
        }
        let scale = m.max_abs().max(T::one());
        let defect = m.hermiticity_defect();
        if defect > T::of(1e-10) * scale {
            return Err(StateError::NotHermitian {
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(DensityMatrix { m: m.symmetrized() })
    }

    pub fn as_mat(&self) -> &Mat4<T> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.m.get(i, j)
    }

    pub fn trace(&self) -> C<T> {
        self.m.trace()
    }

    /// Fully mixed state 𝟙/4.
    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Mat4::identity().scale(C::new(T::of(0.25), T::zero())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_mat_eq(a: &Mat4<f64>, b: &Mat4<f64>, tol: f64) {
        for i in 0..4 {
            for j in 0..4 {
                let d = (a.get(i, j) - b.get(i, j)).norm();
                assert!(
                    d <= tol,
                    "entry ({i},{j}) differs by {d}: {:?} vs {:?}",
                    a.get(i, j),
                    b.get(i, j)
                );
            }
        }
    }

    fn identity2() -> [[C64; 2]; 2] {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        [[one, z], [z, one]]
    }

    #[test]
    fn embedded_operators_match_kronecker_construction() {
        for op in [PauliOp::Plus, PauliOp::Minus, PauliOp::Z] {
            let table_a = pauli_embedded::<f64>(Qubit::A, op);
            let kron_a = kron2(&pauli2(op), &identity2());
            assert_mat_eq(&table_a, &kron_a, 0.0);

            let table_b = pauli_embedded::<f64>(Qubit::B, op);
            let kron_b = kron2(&identity2(), &pauli2(op));
            assert_mat_eq(&table_b, &kron_b, 0.0);
        }
    }

    #[test]
    fn sigma_z_tables_have_expected_signs() {
        let za = pauli_embedded::<f64>(Qubit::A, PauliOp::Z);
        let zb = pauli_embedded::<f64>(Qubit::B, PauliOp::Z);
        for (i, want) in [1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
            assert_abs_diff_eq!(za.get(i, i).re, want);
        }
        for (i, want) in [1.0, -1.0, 1.0, -1.0].into_iter().enumerate() {
            assert_abs_diff_eq!(zb.get(i, i).re, want);
        }
    }

    #[test]
    fn lowering_operators_move_the_right_kets() {
        let ma = pauli_embedded::<f64>(Qubit::A, PauliOp::Minus);
        // σ₋ᴬ|11⟩ = |01⟩ and σ₋ᴬ|10⟩ = |00⟩
        assert_abs_diff_eq!(ma.get(2, 0).re, 1.0);
        assert_abs_diff_eq!(ma.get(3, 1).re, 1.0);
        // σ₊² = 0 on each qubit
        let pa = pauli_embedded::<f64>(Qubit::A, PauliOp::Plus);
        assert_abs_diff_eq!(pa.mul(&pa).max_abs(), 0.0);
        let pb = pauli_embedded::<f64>(Qubit::B, PauliOp::Plus);
        assert_abs_diff_eq!(pb.mul(&pb).max_abs(), 0.0);
    }

    #[test]
    fn raising_is_adjoint_of_lowering() {
        for q in [Qubit::A, Qubit::B] {
            let plus = pauli_embedded::<f64>(q, PauliOp::Plus);
            let minus = pauli_embedded::<f64>(q, PauliOp::Minus);
            assert_mat_eq(&plus, &minus.dagger(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_at_figure_baseline() {
        let p = SystemParams::<f64>::figure_baseline();
        let h = build_hamiltonian(&p);
        // ω = 0.5, J_xy = 0.7, J_z = 0.3:
        // diagonal (2ω+J_z, −J_z, −J_z, −2ω+J_z) = (1.3, −0.3, −0.3, −0.7)
        assert_abs_diff_eq!(h.get(0, 0).re, 1.3, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(1, 1).re, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(2, 2).re, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(3, 3).re, -0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(1, 2).re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(h.get(2, 1).re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn hamiltonian_matches_operator_expansion() {
        // Independent route: assemble H from embedded operators instead of
        // the precomputed diagonal.
        let p = SystemParams {
            omega_a: 0.31,
            omega_b: -0.77,
            j_xy: 1.21,
            j_z: -0.45,
            kappa_a: 1.0,
            kappa_b: 1.0,
            gamma: 1.0,
        };
        let za = pauli_embedded::<f64>(Qubit::A, PauliOp::Z);
        let zb = pauli_embedded::<f64>(Qubit::B, PauliOp::Z);
        let pa = pauli_embedded::<f64>(Qubit::A, PauliOp::Plus);
        let mb = pauli_embedded::<f64>(Qubit::B, PauliOp::Minus);
        let ma = pauli_embedded::<f64>(Qubit::A, PauliOp::Minus);
        let pb = pauli_embedded::<f64>(Qubit::B, PauliOp::Plus);
        let expected = za
            .scale(c(p.omega_a, 0.0))
            .add(&zb.scale(c(p.omega_b, 0.0)))
            .add(&pa.mul(&mb).add(&ma.mul(&pb)).scale(c(p.j_xy, 0.0)))
            .add(&za.mul(&zb).scale(c(p.j_z, 0.0)));
        assert_mat_eq(&build_hamiltonian(&p), &expected, 1e-15);
    }

    #[test]
    fn lowering_operator_examples() {
        let p = SystemParams::<f64>::figure_baseline();
        let l = build_lowering(&p);
        // L|11⟩ = κ_A|01⟩ + κ_B|10⟩
        let v = l.apply(&PureState::ket11().amp);
        assert_abs_diff_eq!(v[1].re, 1.0);
        assert_abs_diff_eq!(v[2].re, 1.0);
        assert_abs_diff_eq!(v[0].norm() + v[3].norm(), 0.0);

        let p2 = SystemParams {
            kappa_a: 2.0,
            kappa_b: 0.0,
            ..p
        };
        let l2 = build_lowering(&p2);
        let v2 = l2.apply(&PureState::ket11().amp);
        assert_abs_diff_eq!(v2[2].re, 2.0);
        assert_abs_diff_eq!(v2[1].norm(), 0.0);

        let p0 = SystemParams {
            kappa_a: 0.0,
            kappa_b: 0.0,
            ..p
        };
        assert_abs_diff_eq!(build_lowering(&p0).max_abs(), 0.0);
    }

    #[test]
    fn bell_density_matrix_has_half_entries() {
        let rho = DensityMatrix::from_pure(&PureState::<f64>::bell_psi());
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert_abs_diff_eq!(rho.get(i, j).re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.get(0, 0).norm(), 0.0);
        assert_abs_diff_eq!(rho.get(3, 3).norm(), 0.0);
    }

    #[test]
    fn named_states_are_normalized() {
        for s in [
            PureState::<f64>::ket10(),
            PureState::bell_phi(),
            PureState::bell_psi(),
            PureState::ket11(),
            PureState::equal_superposition(),
            PureState::no_double_excitation(),
        ] {
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn from_matrix_rejects_non_hermitian_input() {
        let mut m = Mat4::<f64>::identity();
        m.set(0, 1, c(0.3, 0.0));
        assert!(matches!(
            DensityMatrix::from_matrix(m),
            Err(StateError::NotHermitian { .. })
        ));
    }

    #[test]
    fn params_validation_catches_bad_values() {
        let mut p = SystemParams::<f64>::figure_baseline();
        p.gamma = -1.0;
        assert_eq!(p.validate(), Err(ParamsError::NonPositiveGamma));
        p.gamma = 0.0;
        assert_eq!(p.validate(), Err(ParamsError::NonPositiveGamma));
        p = SystemParams::figure_baseline();
        p.kappa_b = -0.1;
        assert_eq!(p.validate(), Err(ParamsError::NegativeKappa));
        assert!(SystemParams::<f64>::figure_baseline().validate().is_ok());
    }

    #[test]
    fn single_precision_instantiation_behaves() {
        let p = SystemParams::<f32>::figure_baseline();
        let h = build_hamiltonian(&p);
        assert!((h.get(0, 0).re - 1.3f32).abs() < 1e-6);
        assert!((h.get(3, 3).re + 0.7f32).abs() < 1e-6);
    }

    fn arb_params() -> impl Strategy<Value = SystemParams<f64>> {
        (
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            0.0..2.0f64,
            0.0..2.0f64,
            0.05..5.0f64,
        )
            .prop_map(|(oa, ob, jxy, jz, ka, kb, g)| SystemParams {
                omega_a: oa,
                omega_b: ob,
                j_xy: jxy,
                j_z: jz,
                kappa_a: ka,
                kappa_b: kb,
                gamma: g,
            })
    }

    fn arb_state() -> impl Strategy<Value = PureState<f64>> {
        proptest::array::uniform8(-1.0..1.0f64).prop_filter_map("zero state", |x| {
            let s = PureState::from_amplitudes([
                c(x[0], x[1]),
                c(x[2], x[3]),
                c(x[4], x[5]),
                c(x[6], x[7]),
            ]);
            s.normalized()
        })
    }

    proptest! {
        #[test]
        fn hamiltonian_is_hermitian(p in arb_params()) {
            prop_assert!(build_hamiltonian(&p).hermiticity_defect() == 0.0);
        }

        #[test]
        fn pure_density_is_positive_unit_trace(psi in arb_state()) {
            let rho = DensityMatrix::from_pure(&psi);
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(rho.as_mat().hermiticity_defect() < 1e-15);
            // ⟨φ|ρ|φ⟩ ≥ 0 for a handful of probe vectors
            for k in 0..4 {
                let probe = PureState::basis(k);
                let v = rho.as_mat().apply(&probe.amp);
                let exp: C64 = (0..4).map(|i| probe.amp[i].conj() * v[i]).sum();
                prop_assert!(exp.re >= -1e-14);
            }
        }

        #[test]
        fn product_dagger_reverses(psi in arb_state(), phi in arb_state()) {
            let a = psi.outer();
            let b = phi.outer();
            let lhs = a.mul(&b).dagger();
            let rhs = b.dagger().mul(&a.dagger());
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((lhs.get(i, j) - rhs.get(i, j)).norm() < 1e-14);
                }
            }
        }
    }
}
