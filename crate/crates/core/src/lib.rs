//! Dynamics of two interacting qubits coupled to a common bosonic bath with
//! exponentially decaying memory (Ornstein–Uhlenbeck correlation).
//!
//! The crate integrates a time-local master equation whose memory enters
//! through a closed set of ten complex coefficient functions, and provides
//! three independent cross-checks of that production path:
//!
//! * a stochastic unraveling driven by sampled Ornstein–Uhlenbeck noise
//!   ([`qsd`]),
//! * a brute-force two-time quadrature of the coefficient definitions
//!   ([`twotime`]),
//! * a one-mode pseudomode extension integrated in Lindblad form
//!   ([`pseudomode`]).
//!
//! All numerical kernels are generic over the real scalar type (see
//! [`Scalar`]); `f64` is the default everywhere and the concrete aliases at
//! the crate root ([`C64`], [`Mat4x64`], ...) name that instantiation.

pub mod algebra;
pub mod bath;
pub mod integrator;
pub mod master;
pub mod observables;
pub mod pseudomode;
pub mod qsd;
mod scalar;
pub mod twotime;

pub use scalar::Scalar;

/// Complex number over a generic real scalar.
pub type C<T> = num_complex::Complex<T>;

/// Double-precision complex scalar, the production number type.
pub type C64 = num_complex::Complex<f64>;
/// Single-precision complex scalar.
pub type C32 = num_complex::Complex<f32>;

/// Double-precision 4×4 complex matrix.
pub type Mat4x64 = algebra::Mat4<f64>;
/// Double-precision two-qubit pure state.
pub type PureState64 = algebra::PureState<f64>;
/// Double-precision density matrix.
pub type DensityMatrix64 = algebra::DensityMatrix<f64>;
/// Double-precision model parameters.
pub type SystemParams64 = algebra::SystemParams<f64>;
/// Double-precision memory-coefficient state.
pub type CoefficientState64 = bath::CoefficientState<f64>;
