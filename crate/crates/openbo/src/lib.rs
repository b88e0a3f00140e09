//! Born-Oppenheimer machinery for open quantum systems driven by slow
//! external coordinates.
//!
//! A Lindblad generator is folded into a single non-Hermitian "effective
//! Hamiltonian" acting on the doubled (system ⊗ ancilla-copy) space, so that
//! the density matrix evolves like a pure state and the usual adiabatic
//! toolbox — level bundles, Berry connections, off-diagonal couplings, a
//! validity measure for the slow/fast split — applies verbatim.
//!
//! Modules, roughly bottom-up:
//! * [`linalg`] — dense complex eigenproblems (with left eigenvectors and a
//!   bilinear, transpose-style pairing), polynomial root finding, RK4.
//! * [`liouville`] — vectorization of density matrices and construction of
//!   the doubled-space generator from a Hamiltonian plus dissipators.
//! * [`bo`] — level bundles over slow coordinates, geometric connections,
//!   kinetic couplings and the adiabaticity measure built from them.
//! * [`disscom`] — dissipative-coupling ("collisional decoherence") model of
//!   a particle whose position is monitored: a quadratic, non-Lindblad
//!   generator exercising the same machinery.
//! * [`neutron`] — worked example: spin-1/2 neutron in a rotating helical
//!   magnetic field with spin-flip decay.
//! * [`scan`] — parameter-scan tables and CSV output.

pub mod bo;
pub mod disscom;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod neutron;
pub mod scan;

pub use error::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = ndarray::Array2<C64>;
/// Dense complex vector.
pub type CVec = ndarray::Array1<C64>;

/// Shorthand for `Result<T, Error>`.
pub type Result<T> = std::result::Result<T, Error>;
