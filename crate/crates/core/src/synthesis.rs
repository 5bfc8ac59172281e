//! Explicit profitable deviations.
//!
//! Two constructions, matching the two ways the equilibrium condition can
//! fail for a player:
//!
//! * the Hermitian condition fails at some pair (i1, i2): a unitary acting
//!   only on span{|i1⟩, |i2⟩} already gains;
//! * the condition holds but some B_i has a positive eigenvalue λ with unit
//!   eigenvector ψ: the POVM with E_i = ε|ψ⟩⟨ψ| + |i⟩⟨i| and arrowhead
//!   completions for the other outcomes gains ελ − O(ε²).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::analyzer::{
    build_deviation_family, check_hermitian_condition, povm_gain, verdict_for_family,
    DeviationFamily, Povm, POVM_TOL,
};
use crate::error::{QceError, Result};
use crate::gamecore::{DensityState, StrategicGame};
use crate::hermlin::{bipartition_diag_blocks, herm_eig, is_psd, ComplexMatrix};

const MAX_HALVINGS: usize = 60;

/// U|i1⟩ = u11|i1⟩ + u12|i2⟩, U|i2⟩ = u21|i1⟩ + u22|i2⟩; the player measures
/// with the rotated basis {U|i⟩⟨i|U†}.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDeviation {
    pub player: usize,
    pub i1: usize,
    pub i2: usize,
    /// [[u11, u12], [u21, u22]]
    pub block: [[Complex64; 2]; 2],
    /// |u12|² = |u21|²
    pub x: f64,
    /// Phase of u12.
    pub r: f64,
    /// Ratio of the larger diagonal penalty to the coherence magnitude,
    /// clamped at zero; any 0 < x < 1/(c² + 1) gains.
    pub c: f64,
    /// Gain predicted by the two-level closed form.
    pub closed_form_gain: f64,
    /// Gain of the induced POVM, recomputed through the deviation family.
    pub achieved_gain: f64,
    pub povm: Povm,
}

impl UnitaryDeviation {
    /// ‖U†U − I‖_F on the 2×2 block.
    pub fn unitarity_defect(&self) -> f64 {
        let u = ComplexMatrix::new(
            2,
            2,
            vec![
                self.block[0][0],
                self.block[1][0],
                self.block[0][1],
                self.block[1][1],
            ],
        )
        .expect("2x2");
        u.adjoint()
            .matmul(&u)
            .expect("2x2")
            .sub(&ComplexMatrix::identity(2))
            .expect("2x2")
            .frobenius_norm()
    }
}

/// Two-level gain 2√(x(1−x))·A − x·P for coherence magnitude `a` ≥ 0 and
/// total diagonal penalty `p`.
pub fn two_level_gain(x: f64, a: f64, p: f64) -> f64 {
    2.0 * (x * (1.0 - x)).sqrt() * a - x * p
}

/// Maximizer of [`two_level_gain`] on [0, 1]. Substituting x = sin²(θ/2)
/// turns the gain into A sin θ − P(1 − cos θ)/2, maximal at θ = atan2(2A, P).
pub fn optimal_two_level_x(a: f64, p: f64) -> f64 {
    let theta = (2.0 * a).atan2(p);
    let half = (theta / 2.0).sin();
    half * half
}

pub fn synthesize_unitary(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    i1: usize,
    i2: usize,
    tol: f64,
) -> Result<UnitaryDeviation> {
    let fam = build_deviation_family(rho, game, player)?;
    let m = fam.m();
    if i1 >= m || i2 >= m || i1 == i2 {
        return Err(QceError::DimensionMismatch(format!(
            "invalid strategy pair ({}, {}) for {m} strategies",
            i1 + 1,
            i2 + 1
        )));
    }
    let table = game.payoff_table(player)?;
    let blocks = bipartition_diag_blocks(rho.matrix(), player, game.strategy_counts())?;
    let n = blocks.n();

    let mut coherence = Complex64::new(0.0, 0.0);
    let (mut d1, mut d2) = (0.0, 0.0);
    for (j, (&a1, &a2)) in table[i1].iter().zip(&table[i2]).enumerate().take(n) {
        let delta = a1 - a2;
        coherence += blocks.get(i1, i2, j) * delta;
        d1 -= delta * blocks.get(i2, i2, j).re;
        d2 += delta * blocks.get(i1, i1, j).re;
    }
    let a = coherence.norm();
    if a.is_nan() || a <= tol {
        return Err(QceError::ConditionNotViolated { i1, i2 });
    }
    let r = -coherence.arg();
    let p = d1 + d2;
    let c = (d1.max(d2) / a).max(0.0);
    let x = optimal_two_level_x(a, p);
    let closed_form_gain = two_level_gain(x, a, p);

    let phase = Complex64::from_polar(1.0, r);
    let cos = Complex64::new((1.0 - x).sqrt(), 0.0);
    let sin = x.sqrt();
    let block = [[cos, phase * sin], [-phase.conj() * sin, cos]];

    let mut effects = Povm::computational_basis(m).effects().to_vec();
    for (row, idx) in [(0, i1), (1, i2)] {
        let mut phi = vec![Complex64::new(0.0, 0.0); m];
        phi[i1] = block[row][0];
        phi[i2] = block[row][1];
        effects[idx] = ComplexMatrix::outer(&phi);
    }
    let povm = Povm::new_unchecked(effects);
    let achieved_gain = povm_gain(&povm, &fam)?;

    Ok(UnitaryDeviation {
        player,
        i1,
        i2,
        block,
        x,
        r: wrap_angle(r),
        c,
        closed_form_gain,
        achieved_gain,
        povm,
    })
}

fn wrap_angle(r: f64) -> f64 {
    let mut r = r % (2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    } else if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Deviation built from a positive eigenpair of one B_i.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmDeviation {
    pub player: usize,
    /// The violated index i (0-based, original labels).
    pub strategy: usize,
    pub povm: Povm,
    pub epsilon: f64,
    pub lambda: f64,
    /// Eigenvector in the relabeled frame; its first entry is 0 and its
    /// second entry has the largest magnitude.
    pub pivot_vector: Vec<Complex64>,
    /// `relabeling[a]` is the original strategy placed at position a.
    pub relabeling: Vec<usize>,
    /// d_{ik} in the relabeled frame: d_table[i][i] is the head of E_i's
    /// arrow, d_table[i][k] (k > i) its tail diagonal.
    pub d_table: Vec<Vec<f64>>,
    pub achieved_gain: f64,
}

pub fn synthesize_povm(fam: &DeviationFamily, tol: f64) -> Result<PovmDeviation> {
    let hermitian = check_hermitian_condition(fam, tol);
    if let Some(v) = hermitian.violation {
        return Err(QceError::HermitianConditionViolated {
            i1: v.i1,
            i2: v.i2,
            difference: v.difference.norm(),
        });
    }
    let m = fam.m();
    let mut best: Option<(usize, f64, Vec<Complex64>)> = None;
    for (i, h) in fam.hermitian_parts().iter().enumerate() {
        let spectrum = herm_eig(h, tol)?;
        let lambda = spectrum.max_eigenvalue();
        if lambda > tol * h.frobenius_norm().max(1.0) && best.as_ref().is_none_or(|b| lambda > b.1)
        {
            best = Some((i, lambda, spectrum.eigenvector(0)));
        }
    }
    let Some((strategy, _, mut psi)) = best else {
        return Err(QceError::NotApplicable(format!(
            "every B_i of player {} is negative semidefinite",
            fam.player() + 1
        )));
    };

    // Row and column `strategy` of B_strategy vanish, so the eigenvector of a
    // non-zero eigenvalue has no weight there.
    psi[strategy] = Complex64::new(0.0, 0.0);
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);

    let pivot = (0..m)
        .filter(|&k| k != strategy)
        .fold(None, |acc: Option<usize>, k| match acc {
            Some(b) if psi[b].norm() >= psi[k].norm() => Some(b),
            _ => Some(k),
        })
        .expect("m ≥ 2 when some B_i has a positive eigenvalue");
    let mut relabeling = vec![strategy, pivot];
    relabeling.extend((0..m).filter(|&k| k != strategy && k != pivot));

    let local = fam.relabeled(&relabeling);
    let v: Vec<Complex64> = relabeling.iter().map(|&k| psi[k]).collect();
    let bv = local.matrices()[0].hermitian_part().mul_vec(&v)?;
    let lambda: f64 = v.iter().zip(&bv).map(|(a, b)| (a.conj() * b).re).sum();

    let mut epsilon = 0.5;
    for _ in 0..=MAX_HALVINGS {
        if let Some((effects, d_table)) = arrowhead_povm(&v, epsilon) {
            let candidate = Povm::new_unchecked(effects);
            let psd = candidate
                .effects()
                .iter()
                .map(|e| is_psd(e, POVM_TOL))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|ok| ok);
            let gain = povm_gain(&candidate, &local)?;
            if psd && gain >= epsilon * lambda / 2.0 {
                let povm = candidate.unrelabeled(&relabeling);
                let achieved_gain = povm_gain(&povm, fam)?;
                return Ok(PovmDeviation {
                    player: fam.player(),
                    strategy,
                    povm,
                    epsilon,
                    lambda,
                    pivot_vector: v,
                    relabeling,
                    d_table,
                    achieved_gain,
                });
            }
        }
        epsilon /= 2.0;
    }
    Err(QceError::NumericalBreakdown(format!(
        "no admissible ε after {MAX_HALVINGS} halvings"
    )))
}

/// Effects for a unit vector `v` with v[0] = 0:
///
/// ```text
/// E_0 = ε|v⟩⟨v| + |0⟩⟨0|
/// E_i (i ≥ 1): head d_ii at (i, i), arrow entries −ε v_i v_k* at (i, k) for
///              k > i, tail diagonal d_ik at (k, k)
/// d_ii = 1 − ε|v_i|² − Σ_{l<i} d_li,   d_ik = t_i ε²|v_i v_k|² / d_ii
/// ```
///
/// with t_i = m − 1 − i the arrow length, which makes every arrowhead's Schur
/// complement vanish so each E_i is PSD. Returns `None` if some head d_ii is
/// not positive.
fn arrowhead_povm(v: &[Complex64], epsilon: f64) -> Option<(Vec<ComplexMatrix>, Vec<Vec<f64>>)> {
    let m = v.len();
    let mut effects = Vec::with_capacity(m);
    let mut first = ComplexMatrix::outer(v).scale(epsilon);
    first[(0, 0)] += Complex64::new(1.0, 0.0);
    effects.push(first);

    let mut d = vec![vec![0.0; m]; m];
    for i in 1..m {
        let above: f64 = (1..i).map(|l| d[l][i]).sum();
        let head = 1.0 - epsilon * v[i].norm_sqr() - above;
        if head.is_nan() || head <= 0.0 {
            return None;
        }
        d[i][i] = head;
        let arrow = (m - 1 - i) as f64;
        let mut e = ComplexMatrix::zeros(m, m);
        e[(i, i)] = Complex64::new(head, 0.0);
        for k in (i + 1)..m {
            let off = -(v[i] * v[k].conj()) * epsilon;
            let tail = arrow * off.norm_sqr() / head;
            d[i][k] = tail;
            e[(i, k)] = off;
            e[(k, i)] = off.conj();
            e[(k, k)] = Complex64::new(tail, 0.0);
        }
        effects.push(e);
    }
    Some((effects, d))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Deviation {
    Unitary(UnitaryDeviation),
    Povm(PovmDeviation),
}

impl Deviation {
    pub fn achieved_gain(&self) -> f64 {
        match self {
            Deviation::Unitary(u) => u.achieved_gain,
            Deviation::Povm(p) => p.achieved_gain,
        }
    }

    pub fn povm(&self) -> &Povm {
        match self {
            Deviation::Unitary(u) => &u.povm,
            Deviation::Povm(p) => &p.povm,
        }
    }
}

/// Unitary deviation at the first Hermitian-condition violation if there is
/// one, otherwise the POVM deviation from the B_i with the largest λ_max.
pub fn synthesize_best_deviation(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    tol: f64,
) -> Result<Deviation> {
    let fam = build_deviation_family(rho, game, player)?;
    let verdict = verdict_for_family(&fam, tol)?;
    if verdict.is_qce {
        return Err(QceError::NotApplicable(format!(
            "the state is an equilibrium for player {}",
            player + 1
        )));
    }
    if let Some(v) = verdict.hermitian_condition.violation {
        return synthesize_unitary(rho, game, player, v.i1, v.i2, tol).map(Deviation::Unitary);
    }
    synthesize_povm(&fam, tol).map(Deviation::Povm)
}
