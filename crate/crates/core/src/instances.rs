//! Small named instances used throughout tests, the acceptance suite and the
//! CLI `example` command.

use num_complex::Complex64;

use crate::gamecore::{DensityState, StrategicGame};
use crate::hermlin::ComplexMatrix;

/// Two-player game where player 1 earns 1 with her first strategy and 0
/// otherwise (player 2 earns nothing), played on the maximally mixed state
/// I/(mn). Player 1 gains (m−1)/m at best by deviating.
pub fn uniform_row_instance(m: usize, n: usize) -> (StrategicGame, DensityState) {
    assert!(m >= 1 && n >= 1);
    let u1: Vec<f64> = (0..m * n)
        .map(|idx| if idx < n { 1.0 } else { 0.0 })
        .collect();
    let game = StrategicGame::new(vec![m, n], vec![u1, vec![0.0; m * n]]).expect("valid game");
    let rho = DensityState::new(ComplexMatrix::identity(m * n).scale(1.0 / (m * n) as f64))
        .expect("maximally mixed state");
    (game, rho)
}

/// Player 1's payoff matrix `u1` (player 2 earns nothing) on the pure state
/// (|1,1⟩ + |2,1⟩)/√2, coherent in player 1's first two strategies.
pub fn coherent_pair_instance(u1: &[Vec<f64>]) -> (StrategicGame, DensityState) {
    let m = u1.len();
    let n = u1.first().map_or(0, Vec::len);
    assert!(m >= 2 && n >= 1);
    let flat: Vec<f64> = u1.iter().flatten().copied().collect();
    let game = StrategicGame::new(vec![m, n], vec![flat, vec![0.0; m * n]]).expect("valid game");
    let mut psi = vec![Complex64::new(0.0, 0.0); m * n];
    psi[0] = Complex64::new(1.0, 0.0);
    psi[n] = Complex64::new(1.0, 0.0);
    let rho = DensityState::from_pure(&psi).expect("non-zero vector");
    (game, rho)
}
