//! JSON file formats for games, classical distributions and density states.
//!
//! Game: `{"players": k, "strategies": [n1, ..., nk], "utilities": [[...], ...]}`
//! with one flat row-major tensor per player (player 1 slowest).
//! Distribution: `{"strategies": [...], "p": [...]}`.
//! State: `{"dim": N, "re": [N*N], "im": [N*N]}`, both row-major.
//!
//! Writers emit every float with 17 significant digits so files round-trip
//! exactly.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{QceError, Result};
use crate::gamecore::{ClassicalDistribution, DensityState, StrategicGame};
use crate::hermlin::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    pub strategies: Vec<usize>,
    pub utilities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub strategies: Vec<usize>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Compact JSON with floats as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedFloatFormatter;

impl Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            CompactFormatter.write_null(writer)
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` with [`FixedFloatFormatter`] and a trailing newline.
pub fn to_fixed_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| QceError::NumericalBreakdown(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

fn parse_json<'a, T: Deserialize<'a>>(bytes: &'a [u8], what: &str) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| QceError::Parse(format!("{what} file: {e}")))
}

pub fn parse_game(bytes: &[u8]) -> Result<StrategicGame> {
    let file: GameFile = parse_json(bytes, "game")?;
    if file.players != file.strategies.len() {
        return Err(QceError::InvalidGame(format!(
            "field \"players\" is {} but \"strategies\" lists {} players",
            file.players,
            file.strategies.len()
        )));
    }
    StrategicGame::new(file.strategies, file.utilities)
}

pub fn parse_distribution(bytes: &[u8]) -> Result<ClassicalDistribution> {
    let file: DistributionFile = parse_json(bytes, "distribution")?;
    ClassicalDistribution::new(file.strategies, file.p)
}

pub fn parse_state(bytes: &[u8]) -> Result<DensityState> {
    let file: StateFile = parse_json(bytes, "state")?;
    let len = file.dim.checked_mul(file.dim).ok_or_else(|| {
        QceError::InvalidState(format!("field \"dim\" = {} is too large", file.dim))
    })?;
    for (name, v) in [("re", &file.re), ("im", &file.im)] {
        if v.len() != len {
            return Err(QceError::InvalidState(format!(
                "field \"{name}\" has {} entries, expected dim² = {len}",
                v.len()
            )));
        }
    }
    if file.dim == 0 {
        return Err(QceError::InvalidState(
            "field \"dim\" must be positive".into(),
        ));
    }
    DensityState::new(ComplexMatrix::from_re_im(
        file.dim, file.dim, &file.re, &file.im,
    )?)
}

pub fn game_file(game: &StrategicGame) -> GameFile {
    GameFile {
        players: game.player_count(),
        strategies: game.strategy_counts().to_vec(),
        utilities: game.all_utilities().to_vec(),
    }
}

pub fn distribution_file(p: &ClassicalDistribution) -> DistributionFile {
    DistributionFile {
        strategies: p.strategy_counts().to_vec(),
        p: p.probabilities().to_vec(),
    }
}

pub fn state_file(rho: &DensityState) -> StateFile {
    let m = rho.matrix();
    StateFile {
        dim: m.rows(),
        re: m.as_slice().iter().map(|z: &Complex64| z.re).collect(),
        im: m.as_slice().iter().map(|z: &Complex64| z.im).collect(),
    }
}

pub fn write_game(game: &StrategicGame) -> Result<Vec<u8>> {
    to_fixed_json(&game_file(game))
}

pub fn write_distribution(p: &ClassicalDistribution) -> Result<Vec<u8>> {
    to_fixed_json(&distribution_file(p))
}

pub fn write_state(rho: &DensityState) -> Result<Vec<u8>> {
    to_fixed_json(&state_file(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamecore::lift_pure;

    #[test]
    fn fixed_float_format() {
        let out = to_fixed_json(&vec![0.5, 1.0 / 3.0, -0.0, 1e-300]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "[5.0000000000000000e-1,3.3333333333333331e-1,-0.0000000000000000e0,1.0000000000000000e-300]\n"
        );
    }

    #[test]
    fn state_round_trip_is_exact() {
        let p =
            ClassicalDistribution::new(vec![2, 3], vec![0.1, 0.2, 0.3, 0.15, 0.05, 0.2]).unwrap();
        let rho = lift_pure(&p);
        let back = parse_state(&write_state(&rho).unwrap()).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        let q = parse_distribution(&write_distribution(&p).unwrap()).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(matches!(parse_game(b"{"), Err(QceError::Parse(_))));
        assert!(matches!(
            parse_game(br#"{"players":2,"strategies":[2,2],"utilities":[[1,2,3,4],[1,2,3]]}"#),
            Err(QceError::InvalidGame(_))
        ));
        assert!(matches!(
            parse_game(br#"{"players":3,"strategies":[2,2],"utilities":[[1,2,3,4],[1,2,3,4]]}"#),
            Err(QceError::InvalidGame(_))
        ));
        assert!(matches!(
            parse_state(br#"{"dim":2,"re":[1,0,0],"im":[0,0,0,0]}"#),
            Err(QceError::InvalidState(_))
        ));
        assert!(matches!(
            parse_state(br#"{"dim":4294967296,"re":[],"im":[]}"#),
            Err(QceError::InvalidState(_))
        ));
        assert!(parse_state(br#"{"dim":1,"re":[1],"im":[0]}"#).is_ok());
    }
}
