//! Spontaneous decay of a single excitation shared by a chain of identical
//! qubits coupled through an open one-dimensional waveguide.
//!
//! Photon modes are eliminated in the Markovian limit, which leaves the
//! linear system `dβ/dt = M β` for the qubit amplitudes β_n(t) with
//!
//! ```text
//! M_nn = -Γ/2,    M_nm = -(Γ/2) exp(i |φ_m - φ_n|),    φ_n = k x_n.
//! ```
//!
//! The crate is organised around that matrix:
//!
//! * [`chain`] builds `M` and its coherent/dissipative rate decomposition.
//! * [`modes`] solves the eigenproblem: characteristic roots, decay-rate
//!   classification, modal expansions and bi-orthogonal collective states.
//! * [`dynamics`] propagates amplitudes (modal or adaptive Runge-Kutta),
//!   computes the photon-emission probability and the closed-form solutions
//!   at resonant spacings, and detects plateaus in `P_ph(t)`.
//! * [`emission`] computes the single-photon amplitude and spectral density.
//!
//! Units: rates are in Γ, times in τ = 1/Γ, detunings δ = ω - Ω in Γ.
//! Qubit indices exposed to users are 1-based.

pub mod chain;
pub mod dynamics;
pub mod emission;
mod error;
mod linalg;
pub mod modes;

pub use num_complex::Complex64 as C64;

pub use chain::{
    build_effective_matrix, coherent_dissipative_rates, ChainConfig, CouplingRates,
    EffectiveMatrix, InitialState,
};
pub use dynamics::{
    analytic_amplitudes_resonant, evolve, find_plateaus, photon_emission_probability,
    AmplitudeTrajectory, Method, Parity, Plateau, PlateauReport, ResonantSolution, Tolerances,
};
pub use emission::{
    lorentzian_reference, photon_amplitude_modal, photon_amplitude_numeric, Normalization,
    SpectrumResult,
};
pub use error::{Error, Result};
pub use modes::{
    characteristic_roots, collective_state_decomposition, dark_state_count, modal_expansion,
    reduced_central_cubic_roots, CollectiveStateSet, ModalExpansion, ModeClass, ModeSet,
};
