//! Quantum correlated equilibria of classical strategic games.
//!
//! Given a game and a joint quantum strategy ρ, this crate decides whether ρ
//! is a quantum correlated equilibrium, synthesizes an explicit profitable
//! local deviation when it is not, and computes the exact maximum gain with a
//! dual certificate together with two cheap spectral upper bounds.
//!
//! Basis convention: the joint basis |s_1, …, s_k⟩ is flattened row-major with
//! player 1 slowest. All indices in the Rust API are 0-based; file formats and
//! reports are 1-based.

pub mod analyzer;
pub mod cli;
pub mod error;
pub mod gamecore;
pub mod hermlin;
pub mod instances;
pub mod io;
pub mod optimizer;
pub mod report;
pub mod sampling;
pub mod synthesis;

pub use analyzer::{
    build_deviation_family, check_hermitian_condition, check_hermitian_condition_direct,
    check_player_qce, check_qce, measurement_gain_oracle, povm_gain, DeviationFamily,
    PlayerVerdict, Povm, QceVerdict, Violation,
};
pub use error::{QceError, Result};
pub use gamecore::{
    classical_ce_check, classical_ne_check, expected_payoff, lift_diagonal, lift_pure,
    ClassicalDistribution, DensityState, StrategicGame,
};
pub use hermlin::{herm_eig, nsd_check, ComplexMatrix, HermitianSpectrum, DEFAULT_TOL};
pub use optimizer::{
    bound_m_lambda, bound_positive_eigs, epsilon_certificate, max_gain, max_gain_general,
    two_outcome_oracle, GainReport,
};
pub use synthesis::{
    synthesize_best_deviation, synthesize_povm, synthesize_unitary, Deviation, PovmDeviation,
    UnitaryDeviation,
};
