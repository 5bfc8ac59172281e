//! Deviation matrices, POVM gains and the QCE decision procedure.
//!
//! For the analysed player with m strategies and opponents' joint count n,
//! write a_{ij} for the payoff at own strategy i and opponents' strategy j and
//! ρ^{i1 i2}_{jj} = ⟨i1, j|ρ|i2, j⟩. The deviation family is
//!
//! ```text
//! B_i(i1, i2) = Σ_j ρ^{i1 i2}_{jj} (a_{ij} − a_{i1 j}),   i = 1..m
//! ```
//!
//! and a POVM {E_i} applied before the computational-basis measurement
//! changes the player's payoff by Σ_i tr(E_i B_i). The state is an equilibrium
//! for the player exactly when every B_i is negative semidefinite.

use num_complex::Complex64;

use crate::error::{QceError, Result};
use crate::gamecore::{DensityState, StrategicGame};
use crate::hermlin::{bipartition_diag_blocks, herm_eig, is_psd, ComplexMatrix};

/// The m matrices B_1..B_m of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFamily {
    player: usize,
    n: usize,
    matrices: Vec<ComplexMatrix>,
}

impl DeviationFamily {
    /// Wraps externally supplied matrices; row i of B_i must vanish exactly.
    pub fn from_matrices(player: usize, n: usize, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let m = matrices.len();
        if m == 0 {
            return Err(QceError::DimensionMismatch("empty deviation family".into()));
        }
        for (i, b) in matrices.iter().enumerate() {
            if b.rows() != m || b.cols() != m {
                return Err(QceError::DimensionMismatch(format!(
                    "B_{} is {}x{}, expected {m}x{m}",
                    i + 1,
                    b.rows(),
                    b.cols()
                )));
            }
            if (0..m).any(|c| b[(i, c)] != Complex64::new(0.0, 0.0)) {
                return Err(QceError::DimensionMismatch(format!(
                    "row {} of B_{} must be zero",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self {
            player,
            n,
            matrices,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &ComplexMatrix {
        &self.matrices[i]
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            player: self.player,
            n: self.n,
            matrices: self.matrices.iter().map(|b| b.scale(alpha)).collect(),
        }
    }

    /// Relabels strategies: the result's B'_a(b, c) = B_{perm[a]}(perm[b], perm[c]).
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.m());
        Self {
            player: self.player,
            n: self.n,
            matrices: perm
                .iter()
                .map(|&a| self.matrices[a].permuted(perm))
                .collect(),
        }
    }

    /// The Hermitian parts (B_i + B_i†)/2; they carry the whole POVM gain.
    pub fn hermitian_parts(&self) -> Vec<ComplexMatrix> {
        self.matrices
            .iter()
            .map(ComplexMatrix::hermitian_part)
            .collect()
    }

    /// Largest ‖B_i‖_F.
    pub fn scale_norm(&self) -> f64 {
        self.matrices
            .iter()
            .map(ComplexMatrix::frobenius_norm)
            .fold(0.0, f64::max)
    }
}

pub fn build_deviation_family(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
) -> Result<DeviationFamily> {
    rho.ensure_matches(game)?;
    let table = game.payoff_table(player)?;
    let blocks = bipartition_diag_blocks(rho.matrix(), player, game.strategy_counts())?;
    let (m, n) = (blocks.m(), blocks.n());
    let matrices = (0..m)
        .map(|i| {
            ComplexMatrix::from_fn(m, m, |i1, i2| {
                if i1 == i {
                    return Complex64::new(0.0, 0.0);
                }
                (0..n)
                    .map(|j| blocks.get(i1, i2, j) * (table[i][j] - table[i1][j]))
                    .sum()
            })
        })
        .collect();
    Ok(DeviationFamily {
        player,
        n,
        matrices,
    })
}

/// A POVM on the analysed player's m-dimensional strategy space, outcome i
/// meaning "play strategy i".
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

/// Slack used when validating POVM effects.
pub const POVM_TOL: f64 = 1e-9;

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let povm = Self { effects };
        povm.validate(POVM_TOL)?;
        Ok(povm)
    }

    pub(crate) fn new_unchecked(effects: Vec<ComplexMatrix>) -> Self {
        Self { effects }
    }

    /// {|i⟩⟨i|}: the measurement the player makes when not deviating.
    pub fn computational_basis(m: usize) -> Self {
        Self {
            effects: (0..m)
                .map(|i| {
                    let mut e = ComplexMatrix::zeros(m, m);
                    e[(i, i)] = Complex64::new(1.0, 0.0);
                    e
                })
                .collect(),
        }
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    /// Largest entrywise deviation of Σ E_i from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let m = self.effects.len();
        let mut sum = ComplexMatrix::zeros(m, m);
        for e in &self.effects {
            sum = sum.add(e).expect("validated shape");
        }
        sum.sub(&ComplexMatrix::identity(m))
            .expect("square")
            .max_abs()
    }

    /// Smallest eigenvalue over all effects.
    pub fn min_effect_eigenvalue(&self) -> Result<f64> {
        self.effects
            .iter()
            .map(|e| herm_eig(e, POVM_TOL).map(|s| s.min_eigenvalue()))
            .try_fold(f64::INFINITY, |acc, x| x.map(|x| acc.min(x)))
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.effects.len();
        if m == 0 {
            return Err(QceError::InvalidPovm("no effects".into()));
        }
        for (i, e) in self.effects.iter().enumerate() {
            if e.rows() != m || e.cols() != m {
                return Err(QceError::InvalidPovm(format!(
                    "effect {} is {}x{}, expected {m}x{m}",
                    i + 1,
                    e.rows(),
                    e.cols()
                )));
            }
            let psd = is_psd(e, tol).map_err(|err| {
                QceError::InvalidPovm(format!("effect {} is not Hermitian: {err}", i + 1))
            })?;
            if !psd {
                return Err(QceError::InvalidPovm(format!(
                    "effect {} is not positive semidefinite",
                    i + 1
                )));
            }
        }
        let defect = self.completeness_defect();
        if defect.is_nan() || defect > tol {
            return Err(QceError::InvalidPovm(format!(
                "effects sum to I only within {defect:e}"
            )));
        }
        Ok(())
    }

    /// Relabels outcomes and basis together: E'_a(b, c) = E_{perm[a]}(perm[b], perm[c]).
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self {
            effects: perm
                .iter()
                .map(|&a| self.effects[a].permuted(perm))
                .collect(),
        }
    }

    /// Inverse of [`Povm::relabeled`].
    pub fn unrelabeled(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (a, &p) in perm.iter().enumerate() {
            inverse[p] = a;
        }
        self.relabeled(&inverse)
    }
}

/// Σ_i tr(E_i B_i).
pub fn povm_gain(povm: &Povm, fam: &DeviationFamily) -> Result<f64> {
    if povm.outcome_count() != fam.m() {
        return Err(QceError::DimensionMismatch(format!(
            "POVM has {} outcomes but the player has {} strategies",
            povm.outcome_count(),
            fam.m()
        )));
    }
    povm.effects()
        .iter()
        .zip(fam.matrices())
        .map(|(e, b)| e.trace_product(b).map(|z| z.re))
        .sum()
}

/// Payoff change computed from explicit outcome probabilities
/// p_{ij} = tr((E_i ⊗ |j⟩⟨j|) ρ) over the full joint space, independent of the
/// deviation family.
pub fn measurement_gain_oracle(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    povm: &Povm,
) -> Result<f64> {
    rho.ensure_matches(game)?;
    let split = game.split(player)?;
    let (m, n) = (split.m(), split.n());
    if povm.outcome_count() != m {
        return Err(QceError::DimensionMismatch(format!(
            "POVM has {} outcomes but the player has {m} strategies",
            povm.outcome_count()
        )));
    }
    povm.validate(POVM_TOL)?;
    let dim = rho.dim();
    let u = game.utilities(player);
    let mut gain = 0.0;
    for (i, effect) in povm.effects().iter().enumerate() {
        for j in 0..n {
            let mut op = ComplexMatrix::zeros(dim, dim);
            for a in 0..m {
                for b in 0..m {
                    op[(split.joint(a, j), split.joint(b, j))] = effect[(a, b)];
                }
            }
            let p_ij = op.trace_product(rho.matrix())?.re;
            let s = split.joint(i, j);
            gain += (p_ij - rho.matrix()[(s, s)].re) * u[s];
        }
    }
    Ok(gain)
}

/// A pair (i1, i2) at which Σ_j ρ^{i1 i2}_{jj} a_{i1 j} ≠ Σ_j ρ^{i1 i2}_{jj} a_{i2 j}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianViolation {
    pub i1: usize,
    pub i2: usize,
    /// Σ_j ρ^{i1 i2}_{jj} (a_{i2 j} − a_{i1 j}).
    pub difference: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianConditionCheck {
    pub holds: bool,
    /// Lexicographically first violating pair with i1 < i2.
    pub violation: Option<HermitianViolation>,
}

impl HermitianConditionCheck {
    fn from_violation(violation: Option<HermitianViolation>) -> Self {
        Self {
            holds: violation.is_none(),
            violation,
        }
    }
}

/// Checks the Hermitian condition through the family: the difference at
/// (i1, i2) is exactly B_{i2}(i1, i2).
pub fn check_hermitian_condition(fam: &DeviationFamily, tol: f64) -> HermitianConditionCheck {
    let m = fam.m();
    for i1 in 0..m {
        for i2 in (i1 + 1)..m {
            let difference = fam.matrix(i2)[(i1, i2)];
            if difference.norm() > tol {
                return HermitianConditionCheck::from_violation(Some(HermitianViolation {
                    i1,
                    i2,
                    difference,
                }));
            }
        }
    }
    HermitianConditionCheck::from_violation(None)
}

/// The two sides (Σ_j ρ^{i1 i2}_{jj} a_{i1 j}, Σ_j ρ^{i1 i2}_{jj} a_{i2 j}).
pub fn hermitian_condition_sums(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    i1: usize,
    i2: usize,
) -> Result<(Complex64, Complex64)> {
    rho.ensure_matches(game)?;
    let split = game.split(player)?;
    if i1 >= split.m() || i2 >= split.m() {
        return Err(QceError::DimensionMismatch(format!(
            "strategy pair ({}, {}) out of range for {} strategies",
            i1 + 1,
            i2 + 1,
            split.m()
        )));
    }
    let u = game.utilities(player);
    let r = rho.matrix();
    let mut left = Complex64::new(0.0, 0.0);
    let mut right = Complex64::new(0.0, 0.0);
    for j in 0..split.n() {
        let c = r[(split.joint(i1, j), split.joint(i2, j))];
        left += c * u[split.joint(i1, j)];
        right += c * u[split.joint(i2, j)];
    }
    Ok((left, right))
}

/// Checks the Hermitian condition directly from the state and payoffs.
pub fn check_hermitian_condition_direct(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    tol: f64,
) -> Result<HermitianConditionCheck> {
    let m = game.split(player)?.m();
    for i1 in 0..m {
        for i2 in (i1 + 1)..m {
            let (left, right) = hermitian_condition_sums(rho, game, player, i1, i2)?;
            let difference = right - left;
            if difference.norm() > tol {
                return Ok(HermitianConditionCheck::from_violation(Some(
                    HermitianViolation { i1, i2, difference },
                )));
            }
        }
    }
    Ok(HermitianConditionCheck::from_violation(None))
}

/// A B_i with a positive eigenvalue (taken on its Hermitian part).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub player: usize,
    pub strategy: usize,
    pub lambda_max: f64,
    pub witness: Vec<Complex64>,
    /// Set when the Hermitian condition also fails for this player.
    pub hermitian_violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerVerdict {
    pub player: usize,
    pub is_qce: bool,
    pub hermitian_condition: HermitianConditionCheck,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QceVerdict {
    pub is_qce: bool,
    pub players: Vec<PlayerVerdict>,
}

impl QceVerdict {
    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.players.iter().flat_map(|p| p.violations.iter())
    }
}

pub fn check_player_qce(
    rho: &DensityState,
    game: &StrategicGame,
    player: usize,
    tol: f64,
) -> Result<PlayerVerdict> {
    let fam = build_deviation_family(rho, game, player)?;
    verdict_for_family(&fam, tol)
}

/// Per-player verdict from an already built family.
pub fn verdict_for_family(fam: &DeviationFamily, tol: f64) -> Result<PlayerVerdict> {
    let player = fam.player();
    if fam.m() == 1 {
        return Ok(PlayerVerdict {
            player,
            is_qce: true,
            hermitian_condition: HermitianConditionCheck::from_violation(None),
            violations: Vec::new(),
        });
    }
    let hermitian_condition = check_hermitian_condition(fam, tol);
    let flagged = !hermitian_condition.holds;
    let mut violations = Vec::new();
    let mut strongest: Option<Violation> = None;
    for (strategy, h) in fam.hermitian_parts().iter().enumerate() {
        let spectrum = herm_eig(h, tol)?;
        let lambda_max = spectrum.max_eigenvalue();
        let candidate = Violation {
            player,
            strategy,
            lambda_max,
            witness: spectrum.eigenvector(0),
            hermitian_violation: flagged,
        };
        if lambda_max > tol * h.frobenius_norm().max(1.0) {
            violations.push(candidate);
        } else if flagged
            && strongest
                .as_ref()
                .is_none_or(|s: &Violation| lambda_max > s.lambda_max)
        {
            strongest = Some(candidate);
        }
    }
    // A failed Hermitian condition rules out equilibrium even when every
    // Hermitian part looks NSD within tolerance.
    if flagged && violations.is_empty() {
        violations.extend(strongest);
    }
    Ok(PlayerVerdict {
        player,
        is_qce: violations.is_empty(),
        hermitian_condition,
        violations,
    })
}

pub fn check_qce(rho: &DensityState, game: &StrategicGame, tol: f64) -> Result<QceVerdict> {
    rho.ensure_matches(game)?;
    let players = (0..game.player_count())
        .map(|p| check_player_qce(rho, game, p, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(QceVerdict {
        is_qce: players.iter().all(|p| p.is_qce),
        players,
    })
}
