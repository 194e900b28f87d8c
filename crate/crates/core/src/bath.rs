//! Memory-coefficient functions of the time-local master equation.
//!
//! The bath enters the dynamics only through ten complex functions of time:
//! four single-integral coefficients f̄₁..f̄₄ (weights of σ₋ᴬ, σ₋ᴮ,
//! σ_zᴬσ₋ᴮ, σ₋ᴬσ_zᴮ in the averaged memory operator), the convolved
//! two-excitation coefficient f̃₅, and five double-integral coefficients
//! F₁..F₅ that carry the noise-correlated part. Together they close into the
//! ODE system implemented by [`coefficient_rhs_exact`].
//!
//! [`coefficient_rhs_approx`] is the same system with the two-excitation
//! memory channel removed (f₅ ≡ 0): only f̄₁..f̄₄ evolve. The white-noise
//! limit of the exact system is the fixed point returned by
//! [`markov_asymptote`].

use crate::algebra::SystemParams;
use crate::{Scalar, C};

/// Bath correlation α(t,s) = (γ/2)·exp(−γ|t−s|).
///
/// Real-valued and stationary; its integral over the whole half-line is 1/2,
/// which fixes the white-noise normalization of [`markov_asymptote`].
pub fn correlation_alpha<T: Scalar>(t: T, s: T, gamma: T) -> T {
    T::of(0.5) * gamma * (-gamma * (t - s).abs()).exp()
}

/// The ten memory coefficients at one instant.
///
/// All components start at zero: the initial state carries no bath
/// correlations.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CoefficientState<T = f64> {
    pub fbar1: C<T>,
    pub fbar2: C<T>,
    pub fbar3: C<T>,
    pub fbar4: C<T>,
    pub ftilde5: C<T>,
    pub big_f1: C<T>,
    pub big_f2: C<T>,
    pub big_f3: C<T>,
    pub big_f4: C<T>,
    pub big_f5: C<T>,
}

impl<T: Scalar> CoefficientState<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(&self) -> [C<T>; 10] {
        [
            self.fbar1,
            self.fbar2,
            self.fbar3,
            self.fbar4,
            self.ftilde5,
            self.big_f1,
            self.big_f2,
            self.big_f3,
            self.big_f4,
            self.big_f5,
        ]
    }

    pub fn from_array(a: [C<T>; 10]) -> Self {
        CoefficientState {
            fbar1: a[0],
            fbar2: a[1],
            fbar3: a[2],
            fbar4: a[3],
            ftilde5: a[4],
            big_f1: a[5],
            big_f2: a[6],
            big_f3: a[7],
            big_f4: a[8],
            big_f5: a[9],
        }
    }

    pub fn max_abs(&self) -> T {
        self.to_array()
            .iter()
            .map(|c| c.norm())
            .fold(T::zero(), |m, x| if x > m { x } else { m })
    }
}

/// Time derivative of the full coefficient system.
///
/// The equations are quadratic in the coefficients; the γκ/2 inhomogeneity in
/// the f̄₁, f̄₂ equations is what switches the dissipation on from the
/// all-zero initial state.
pub fn coefficient_rhs_exact<T: Scalar>(
    c: &CoefficientState<T>,
    p: &SystemParams<T>,
) -> CoefficientState<T> {
    let i = C::<T>::i();
    let zr = T::zero();
    let re = |x: T| C::new(x, zr);
    let (ka, kb) = (re(p.kappa_a), re(p.kappa_b));
    let g = re(p.gamma);
    let (wa, wb) = (p.omega_a, p.omega_b);
    let jxy = re(p.j_xy);
    let jz = p.j_z;
    let two = re(T::of(2.0));
    let half = re(T::of(0.5));

    // recurring brackets
    let exch = i * re(T::of(2.0) * jz) + ka * c.fbar4 + kb * c.fbar3;
    let cross_a = -i * jxy - ka * c.fbar2 + ka * c.fbar3;
    let cross_b = -i * jxy - kb * c.fbar1 + kb * c.fbar4;

    let dfbar1 = g * ka * half
        + (-g + i * re(T::of(2.0) * wa) + ka * c.fbar1) * c.fbar1
        + (-i * jxy + kb * c.fbar4) * c.fbar3
        + exch * c.fbar4
        - i * kb * c.ftilde5;
    let dfbar2 = g * kb * half
        + (-g + i * re(T::of(2.0) * wb) + kb * c.fbar2) * c.fbar2
        + (-i * jxy + ka * c.fbar3) * c.fbar4
        + exch * c.fbar3
        - i * ka * c.ftilde5;
    let dfbar3 = (-g + i * re(T::of(2.0) * wb) + ka * c.fbar4 + kb * c.fbar2) * c.fbar3
        + cross_a * c.fbar1
        + exch * c.fbar2
        - i * ka * c.ftilde5;
    let dfbar4 = (-g + i * re(T::of(2.0) * wa) + ka * c.fbar1 + kb * c.fbar3) * c.fbar4
        + cross_b * c.fbar2
        + exch * c.fbar1
        - i * kb * c.ftilde5;

    // common to every two-excitation channel: −γ + 2i(ω_A+ω_B) + 2κ_Af̄₁ + 2κ_Bf̄₂
    let pair_rate = -g + i * re(T::of(2.0) * (wa + wb)) + two * ka * c.fbar1 + two * kb * c.fbar2;

    let dftilde5 =
        -i * g * half * (ka * c.fbar3 + kb * c.fbar4) + (pair_rate - g) * c.ftilde5;

    // sources of the double-integral family
    let src = ka * c.fbar3.conj() + kb * c.fbar4.conj();
    let decay = -g + two * ka * c.fbar1.conj() + two * kb * c.fbar2.conj();
    let diag_1 = ka * c.fbar1 + kb * c.fbar3 - i * re(T::of(2.0) * wb) + decay;
    let diag_2 = ka * c.fbar4 + kb * c.fbar2 - i * re(T::of(2.0) * wa) + decay;

    let dbig_f1 = i * c.fbar1 * src + ka * c.ftilde5.conj() + diag_1 * c.big_f1
        + cross_b * c.big_f3
        + exch * c.big_f4
        - i * kb * c.big_f5;
    let dbig_f2 = i * c.fbar2 * src + kb * c.ftilde5.conj() + diag_2 * c.big_f2
        + cross_a * c.big_f4
        + exch * c.big_f3
        - i * ka * c.big_f5;
    let dbig_f3 = i * c.fbar3 * src + diag_2 * c.big_f3 + cross_a * c.big_f1 + exch * c.big_f2
        - i * ka * c.big_f5;
    let dbig_f4 = i * c.fbar4 * src + diag_1 * c.big_f4 + cross_b * c.big_f2 + exch * c.big_f1
        - i * kb * c.big_f5;

    // F₅ stays real: real source, real decay rate, zero initial value.
    let f5_source = T::of(2.0) * (i * c.ftilde5 * src).re;
    let f5_rate = T::of(-2.0) * p.gamma
        + T::of(4.0) * p.kappa_a * c.fbar1.re
        + T::of(4.0) * p.kappa_b * c.fbar2.re;
    let dbig_f5 = re(f5_source) + re(f5_rate) * c.big_f5;

    CoefficientState {
        fbar1: dfbar1,
        fbar2: dfbar2,
        fbar3: dfbar3,
        fbar4: dfbar4,
        ftilde5: dftilde5,
        big_f1: dbig_f1,
        big_f2: dbig_f2,
        big_f3: dbig_f3,
        big_f4: dbig_f4,
        big_f5: dbig_f5,
    }
}

/// Derivative with the two-excitation memory channel dropped (f₅ ≡ 0).
///
/// f̃₅ and F₁..F₅ keep zero derivative, so starting from the all-zero state
/// only f̄₁..f̄₄ ever move.
pub fn coefficient_rhs_approx<T: Scalar>(
    c: &CoefficientState<T>,
    p: &SystemParams<T>,
) -> CoefficientState<T> {
    let truncated = CoefficientState {
        ftilde5: C::new(T::zero(), T::zero()),
        big_f1: C::new(T::zero(), T::zero()),
        big_f2: C::new(T::zero(), T::zero()),
        big_f3: C::new(T::zero(), T::zero()),
        big_f4: C::new(T::zero(), T::zero()),
        big_f5: C::new(T::zero(), T::zero()),
        ..*c
    };
    let full = coefficient_rhs_exact(&truncated, p);
    CoefficientState {
        fbar1: full.fbar1,
        fbar2: full.fbar2,
        fbar3: full.fbar3,
        fbar4: full.fbar4,
        ..CoefficientState::zero()
    }
}

/// White-noise fixed point: f̄₁ = κ_A/2, f̄₂ = κ_B/2, everything else zero.
///
/// This is the γ → ∞ limit of the exact system; with these frozen values the
/// master equation reduces to the standard Lindblad form for the collective
/// lowering operator.
pub fn markov_asymptote<T: Scalar>(p: &SystemParams<T>) -> CoefficientState<T> {
    CoefficientState {
        fbar1: C::new(T::of(0.5) * p.kappa_a, T::zero()),
        fbar2: C::new(T::of(0.5) * p.kappa_b, T::zero()),
        ..CoefficientState::zero()
    }
}

/// Which coefficient system drives a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientVariant {
    Exact,
    Approx,
}

pub fn coefficient_rhs<T: Scalar>(
    variant: CoefficientVariant,
    c: &CoefficientState<T>,
    p: &SystemParams<T>,
) -> CoefficientState<T> {
    match variant {
        CoefficientVariant::Exact => coefficient_rhs_exact(c, p),
        CoefficientVariant::Approx => coefficient_rhs_approx(c, p),
    }
}
