//! Replays the fuzz seed corpora, plus deterministic mutations of every
//! seed, through the same entry points the fuzz targets drive. Runs on
//! stable so malformed-input panics are caught by `cargo test`.

use std::fs;
use std::path::PathBuf;

use qce_core::io::{
    parse_distribution, parse_game, parse_state, write_distribution, write_game, write_state,
};
use qce_core::report::ReportDocument;
use qce_core::{
    bound_m_lambda, bound_positive_eigs, build_deviation_family, check_qce, lift_diagonal,
    lift_pure, max_gain_general, synthesize_best_deviation, DEFAULT_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MUTATIONS: usize = 150;
const TOKENS: &[&[u8]] = &[
    b"0",
    b"-0",
    b"1e308",
    b"-1e308",
    b"1e999",
    b"5e-324",
    b"NaN",
    b"null",
    b"[]",
    b"{}",
    b"\"x\"",
    b"18446744073709551616",
    b"4294967297",
    b",",
    b"]",
    b"}",
    b"\xff",
];

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut data = seed.to_vec();
    for _ in 0..rng.random_range(1..=3) {
        let at = rng.random_range(0..=data.len());
        match rng.random_range(0..5) {
            0 if !data.is_empty() => {
                let k = rng.random_range(0..data.len());
                data[k] ^= 1 << rng.random_range(0..8);
            }
            1 => data.truncate(at),
            2 => {
                let tok = TOKENS[rng.random_range(0..TOKENS.len())];
                data.splice(at..at, tok.iter().copied());
            }
            3 => {
                // replace the number starting at or after `at`
                let start = data[at.min(data.len())..]
                    .iter()
                    .position(|b| b.is_ascii_digit())
                    .map(|p| p + at);
                if let Some(s) = start {
                    let end = data[s..]
                        .iter()
                        .position(|b| !(b.is_ascii_digit() || b"+-.eE".contains(b)))
                        .map_or(data.len(), |p| p + s);
                    let tok = TOKENS[rng.random_range(0..TOKENS.len())];
                    data.splice(s..end, tok.iter().copied());
                }
            }
            _ if !data.is_empty() => {
                let k = rng.random_range(0..data.len());
                data.remove(k);
            }
            _ => {}
        }
    }
    data
}

fn replay(target: &str, body: impl Fn(&[u8])) {
    let mut rng = ChaCha8Rng::seed_from_u64(target.len() as u64);
    for (name, seed) in seeds(target) {
        body(&seed);
        for k in 0..MUTATIONS {
            let data = mutate(&mut rng, &seed);
            let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| body(&data)));
            assert!(
                result.is_ok(),
                "{target}/{name} mutation {k} panicked on input {:?}",
                String::from_utf8_lossy(&data)
            );
        }
    }
}

#[test]
fn parse_game_corpus() {
    replay("parse_game", |data| {
        if let Ok(game) = parse_game(data) {
            assert_eq!(parse_game(&write_game(&game).unwrap()).unwrap(), game);
        }
    });
}

#[test]
fn parse_state_corpus() {
    replay("parse_state", |data| {
        if let Ok(rho) = parse_state(data) {
            assert_eq!(
                parse_state(&write_state(&rho).unwrap()).unwrap().matrix(),
                rho.matrix()
            );
        }
    });
}

#[test]
fn parse_distribution_corpus() {
    replay("parse_distribution", |data| {
        if let Ok(p) = parse_distribution(data) {
            assert_eq!(
                parse_distribution(&write_distribution(&p).unwrap()).unwrap(),
                p
            );
            if p.probabilities().len() <= 64 {
                let _ = lift_diagonal(&p);
                let _ = lift_pure(&p);
            }
        }
    });
}

#[test]
fn parse_report_corpus() {
    replay("parse_report", |data| {
        if let Ok(doc) = ReportDocument::from_json(data) {
            let bytes = doc.to_json().unwrap();
            let again = ReportDocument::from_json(&bytes).unwrap();
            assert_eq!(again.to_json().unwrap(), bytes);
        }
    });
}

#[test]
fn analyze_corpus() {
    replay("analyze", |data| {
        let Some(split) = data.iter().position(|&b| b == 0) else {
            return;
        };
        let (Ok(game), Ok(rho)) = (parse_game(&data[..split]), parse_state(&data[split + 1..]))
        else {
            return;
        };
        if game.joint_dim() > 16 || rho.dim() != game.joint_dim() {
            return;
        }
        let Ok(verdict) = check_qce(&rho, &game, DEFAULT_TOL) else {
            return;
        };
        for pv in &verdict.players {
            let Ok(fam) = build_deviation_family(&rho, &game, pv.player) else {
                continue;
            };
            let _ = bound_m_lambda(&fam, DEFAULT_TOL);
            let _ = bound_positive_eigs(&fam, DEFAULT_TOL);
            let _ = max_gain_general(&fam, DEFAULT_TOL);
            if !pv.is_qce {
                let _ = synthesize_best_deviation(&rho, &game, pv.player, DEFAULT_TOL);
            }
        }
    });
}
