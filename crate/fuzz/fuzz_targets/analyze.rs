#![no_main]

//! Input: game JSON, a NUL byte, state JSON.

use libfuzzer_sys::fuzz_target;
use qce_core::io::{parse_game, parse_state};
use qce_core::{
    bound_m_lambda, bound_positive_eigs, build_deviation_family, check_qce, max_gain_general,
    synthesize_best_deviation, DEFAULT_TOL,
};

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else { return };
    let (Ok(game), Ok(rho)) = (parse_game(&data[..split]), parse_state(&data[split + 1..])) else { return };
    if game.joint_dim() > 16 || rho.dim() != game.joint_dim() {
        return;
    }
    let Ok(verdict) = check_qce(&rho, &game, DEFAULT_TOL) else { return };
    for pv in &verdict.players {
        let Ok(fam) = build_deviation_family(&rho, &game, pv.player) else { continue };
        let _ = bound_m_lambda(&fam, DEFAULT_TOL);
        let _ = bound_positive_eigs(&fam, DEFAULT_TOL);
        let _ = max_gain_general(&fam, DEFAULT_TOL);
        if !pv.is_qce {
            let _ = synthesize_best_deviation(&rho, &game, pv.player, DEFAULT_TOL);
        }
    }
});
