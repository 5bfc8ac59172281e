//! The JSON report emitted by the CLI.
//!
//! Field order is fixed by the struct definitions and floats are written with
//! [`FixedFloatFormatter`](crate::io::FixedFloatFormatter), so equal inputs
//! give byte-identical reports. Player and strategy indices are 1-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analyzer::{PlayerVerdict, Povm, Violation};
use crate::error::{QceError, Result};
use crate::gamecore::EquilibriumCheck;
use crate::hermlin::ComplexMatrix;
use crate::io::to_fixed_json;
use crate::optimizer::GainReport;
use crate::synthesis::{Deviation, PovmDeviation, UnitaryDeviation};

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_qce: Option<bool>,
    pub players: Vec<PlayerReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalReport>,
    /// Wall-clock time; only present when explicitly requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerReport {
    pub player: usize,
    pub is_qce: bool,
    pub hermitian_condition: HermitianReport,
    pub violations: Vec<ViolationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<GainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianReport {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<HermitianPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianPair {
    pub i1: usize,
    pub i2: usize,
    pub difference: ComplexValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorReport {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub strategy: usize,
    pub lambda: f64,
    pub hermitian_violation: bool,
    pub witness: VectorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeviationReport {
    Unitary {
        i1: usize,
        i2: usize,
        block: MatrixReport,
        x: f64,
        r: f64,
        c: f64,
        closed_form_gain: f64,
        achieved_gain: f64,
        povm: Vec<MatrixReport>,
    },
    Povm {
        strategy: usize,
        lambda: f64,
        epsilon: f64,
        relabeling: Vec<usize>,
        achieved_gain: f64,
        povm: Vec<MatrixReport>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSection {
    pub max_gain: f64,
    pub duality_gap: f64,
    pub dual_slack: f64,
    pub dual_y: MatrixReport,
    pub optimal_povm: Vec<MatrixReport>,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSection {
    pub m_lambda: f64,
    pub positive_eigs: f64,
    pub epsilon_certificate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SwitchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    pub gain: f64,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        Self {
            version: REPORT_VERSION.to_string(),
            command: command.to_string(),
            is_qce: None,
            players: Vec::new(),
            classical: None,
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        to_fixed_json(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| QceError::Parse(format!("report: {e}")))
    }
}

impl From<&[Complex64]> for VectorReport {
    fn from(v: &[Complex64]) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }
}

impl From<&ComplexMatrix> for MatrixReport {
    fn from(m: &ComplexMatrix) -> Self {
        let v = VectorReport::from(m.as_slice());
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: v.re,
            im: v.im,
        }
    }
}

impl MatrixReport {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows.checked_mul(self.cols) != Some(self.re.len()) {
            return Err(QceError::Parse(format!(
                "matrix declared {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.re.len()
            )));
        }
        ComplexMatrix::from_re_im(self.rows, self.cols, &self.re, &self.im)
    }
}

fn povm_report(povm: &Povm) -> Vec<MatrixReport> {
    povm.effects().iter().map(MatrixReport::from).collect()
}

impl From<&Violation> for ViolationReport {
    fn from(v: &Violation) -> Self {
        Self {
            strategy: v.strategy + 1,
            lambda: v.lambda_max,
            hermitian_violation: v.hermitian_violation,
            witness: VectorReport::from(v.witness.as_slice()),
        }
    }
}

impl From<&PlayerVerdict> for PlayerReport {
    fn from(v: &PlayerVerdict) -> Self {
        Self {
            player: v.player + 1,
            is_qce: v.is_qce,
            hermitian_condition: HermitianReport {
                holds: v.hermitian_condition.holds,
                violation: v
                    .hermitian_condition
                    .violation
                    .as_ref()
                    .map(|h| HermitianPair {
                        i1: h.i1 + 1,
                        i2: h.i2 + 1,
                        difference: ComplexValue {
                            re: h.difference.re,
                            im: h.difference.im,
                        },
                    }),
            },
            violations: v.violations.iter().map(ViolationReport::from).collect(),
            deviation: None,
            gain: None,
            bounds: None,
        }
    }
}

impl From<&UnitaryDeviation> for DeviationReport {
    fn from(u: &UnitaryDeviation) -> Self {
        let block = ComplexMatrix::new(
            2,
            2,
            vec![u.block[0][0], u.block[0][1], u.block[1][0], u.block[1][1]],
        )
        .expect("2x2 block");
        DeviationReport::Unitary {
            i1: u.i1 + 1,
            i2: u.i2 + 1,
            block: MatrixReport::from(&block),
            x: u.x,
            r: u.r,
            c: u.c,
            closed_form_gain: u.closed_form_gain,
            achieved_gain: u.achieved_gain,
            povm: povm_report(&u.povm),
        }
    }
}

impl From<&PovmDeviation> for DeviationReport {
    fn from(p: &PovmDeviation) -> Self {
        DeviationReport::Povm {
            strategy: p.strategy + 1,
            lambda: p.lambda,
            epsilon: p.epsilon,
            relabeling: p.relabeling.iter().map(|s| s + 1).collect(),
            achieved_gain: p.achieved_gain,
            povm: povm_report(&p.povm),
        }
    }
}

impl From<&Deviation> for DeviationReport {
    fn from(d: &Deviation) -> Self {
        match d {
            Deviation::Unitary(u) => u.into(),
            Deviation::Povm(p) => p.into(),
        }
    }
}

impl DeviationReport {
    pub fn achieved_gain(&self) -> f64 {
        match self {
            DeviationReport::Unitary { achieved_gain, .. }
            | DeviationReport::Povm { achieved_gain, .. } => *achieved_gain,
        }
    }
}

impl From<&GainReport> for GainSection {
    fn from(g: &GainReport) -> Self {
        Self {
            max_gain: g.max_gain,
            duality_gap: g.duality_gap,
            dual_slack: g.dual_slack,
            dual_y: MatrixReport::from(&g.dual_y),
            optimal_povm: povm_report(&g.optimal_povm),
            newton_steps: g.newton_steps,
        }
    }
}

impl From<&EquilibriumCheck> for ClassicalReport {
    fn from(c: &EquilibriumCheck) -> Self {
        Self {
            holds: c.holds,
            witness: c.witness.map(|w| SwitchReport {
                player: w.player + 1,
                from: w.from + 1,
                to: w.to + 1,
                gain: w.gain,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::check_qce;
    use crate::instances::uniform_row_instance;
    use crate::synthesis::synthesize_best_deviation;

    #[test]
    fn round_trip_is_lossless() {
        let (game, rho) = uniform_row_instance(3, 2);
        let verdict = check_qce(&rho, &game, 1e-9).unwrap();
        let mut doc = ReportDocument::new("check");
        doc.is_qce = Some(verdict.is_qce);
        doc.players = verdict.players.iter().map(PlayerReport::from).collect();
        let dev = synthesize_best_deviation(&rho, &game, 0, 1e-9).unwrap();
        doc.players[0].deviation = Some((&dev).into());
        let bytes = doc.to_json().unwrap();
        let back = ReportDocument::from_json(&bytes).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), bytes);
    }
}
