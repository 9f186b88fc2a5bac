//! Dissipative engineering of vibrational number states in a single trapped
//! ion driven on two lower sidebands.
//!
//! A two-level ion in a harmonic trap, driven by one laser on the `j`-th and
//! one on the `m`-th lower sideband, relaxes under spontaneous emission into a
//! joint dark state: the electronic ground state times a motional state
//! annihilated by the combined sideband coupling. The coupling of each drive
//! is diagonal in the Fock basis up to a ladder shift, with strengths
//! proportional to generalized Laguerre polynomials of the squared Lamb-Dicke
//! parameter. Placing Laguerre zeros at the squared Lamb-Dicke parameters
//! truncates the dark state's support, which turns the scheme into a number
//! state "filter": low-pass, high-pass, and band-pass windows in Fock space,
//! single number states, and motional qubits with tunable amplitudes.
//!
//! The crate provides
//! - [`laguerre`]: stable evaluation and root finding for the generalized
//!   Laguerre polynomials that control the filter conditions;
//! - [`fock`]: a truncated Fock space with the usual operator algebra and
//!   standard states;
//! - [`hamiltonian`]: the nonlinear two-drive interaction Hamiltonian;
//! - [`dissipation`]: the spontaneous-emission dissipator with its angular
//!   recoil average, and the master-equation right-hand side;
//! - [`dynamics`]: adaptive time evolution, steady states from the
//!   Liouvillian null space, and fidelity/purity diagnostics;
//! - [`darkstate`]: analytic dark-state coefficients, numerical dark-space
//!   bases, and the inverse problem of designing drive parameters for a
//!   requested filter.
//!
//! All rates are expressed in units of a reference rate, by convention the
//! spontaneous-emission rate `Γ = 1`; only ratios enter the steady states.

pub mod darkstate;
pub mod dissipation;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod laguerre;

pub use error::Error;

/// Dense complex matrix used throughout; sizes stay small (at most a few
/// thousand rows for vectorized superoperators).
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<num_complex::Complex64>;
/// Complex scalar alias.
pub type C64 = num_complex::Complex64;
