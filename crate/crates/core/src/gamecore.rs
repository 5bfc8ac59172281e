//! Classical strategic games, joint strategies (classical and quantum) and
//! the classical equilibrium checks.

use num_complex::Complex64;

use crate::error::{QceError, Result};
use crate::hermlin::{herm_eig, Bipartition, ComplexMatrix};

/// Entries in `[-PROB_CLAMP, 0)` are rounded up to zero on ingestion.
pub const PROB_CLAMP: f64 = 1e-12;
/// Slack on Σp = 1 and on the density-state invariants.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A finite k-player game in normal form.
///
/// Utilities are flat tensors over the joint strategy space in row-major
/// order with player 1 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategicGame {
    strategy_counts: Vec<usize>,
    utilities: Vec<Vec<f64>>,
}

impl StrategicGame {
    pub fn new(strategy_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        if strategy_counts.is_empty() {
            return Err(QceError::InvalidGame(
                "a game needs at least one player".into(),
            ));
        }
        if let Some(p) = strategy_counts.iter().position(|&s| s == 0) {
            return Err(QceError::InvalidGame(format!(
                "player {} has no strategies",
                p + 1
            )));
        }
        let joint = strategy_counts
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| QceError::InvalidGame("joint strategy space overflows".into()))?;
        if utilities.len() != strategy_counts.len() {
            return Err(QceError::InvalidGame(format!(
                "{} players but {} utility tensors",
                strategy_counts.len(),
                utilities.len()
            )));
        }
        for (p, u) in utilities.iter().enumerate() {
            if u.len() != joint {
                return Err(QceError::InvalidGame(format!(
                    "utility tensor of player {} has {} entries, expected {}",
                    p + 1,
                    u.len(),
                    joint
                )));
            }
            if let Some(bad) = u.iter().position(|x| !x.is_finite()) {
                return Err(QceError::InvalidGame(format!(
                    "utility of player {} at flat index {} is not finite",
                    p + 1,
                    bad
                )));
            }
        }
        Ok(Self {
            strategy_counts,
            utilities,
        })
    }

    /// Two-player game from payoff matrices `u1[s1][s2]`, `u2[s1][s2]`.
    pub fn bimatrix(u1: &[Vec<f64>], u2: &[Vec<f64>]) -> Result<Self> {
        let rows = u1.len();
        let cols = u1.first().map_or(0, Vec::len);
        let flatten = |u: &[Vec<f64>], name: &str| -> Result<Vec<f64>> {
            if u.len() != rows || u.iter().any(|r| r.len() != cols) {
                return Err(QceError::InvalidGame(format!(
                    "{name} is not {rows}x{cols}"
                )));
            }
            Ok(u.iter().flatten().copied().collect())
        };
        Self::new(
            vec![rows, cols],
            vec![flatten(u1, "u1")?, flatten(u2, "u2")?],
        )
    }

    pub fn player_count(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn joint_dim(&self) -> usize {
        self.strategy_counts.iter().product()
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    pub fn all_utilities(&self) -> &[Vec<f64>] {
        &self.utilities
    }

    /// Flat index of a joint strategy profile (0-based strategies).
    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strategy_counts)
            .fold(0, |acc, (&s, &n)| acc * n + s)
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.player_count() {
            return Err(QceError::DimensionMismatch(format!(
                "player {} does not exist in a {}-player game",
                player + 1,
                self.player_count()
            )));
        }
        Ok(())
    }

    pub(crate) fn split(&self, player: usize) -> Result<Bipartition> {
        self.check_player(player)?;
        Bipartition::new(&self.strategy_counts, player)
    }

    /// a_{ij}: the player's payoff at own strategy `i` and opponents' joint
    /// strategy `j`, materialized as an m×n table.
    pub fn payoff_table(&self, player: usize) -> Result<Vec<Vec<f64>>> {
        let split = self.split(player)?;
        let u = &self.utilities[player];
        Ok((0..split.m())
            .map(|i| (0..split.n()).map(|j| u[split.joint(i, j)]).collect())
            .collect())
    }
}

/// Probability distribution over joint strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    strategy_counts: Vec<usize>,
    probabilities: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(strategy_counts: Vec<usize>, mut probabilities: Vec<f64>) -> Result<Self> {
        if strategy_counts.is_empty() || strategy_counts.contains(&0) {
            return Err(QceError::InvalidDistribution(
                "strategy counts must be non-empty and positive".into(),
            ));
        }
        let joint = strategy_counts
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| QceError::InvalidDistribution("joint space overflows".into()))?;
        if probabilities.len() != joint {
            return Err(QceError::InvalidDistribution(format!(
                "expected {} probabilities, got {}",
                joint,
                probabilities.len()
            )));
        }
        for (idx, p) in probabilities.iter_mut().enumerate() {
            if !p.is_finite() || *p < -PROB_CLAMP {
                return Err(QceError::InvalidDistribution(format!(
                    "entry {idx} is {p}, not a probability"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QceError::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            strategy_counts,
            probabilities,
        })
    }

    /// Product p_1 × … × p_k of per-player distributions.
    pub fn product(factors: &[Vec<f64>]) -> Result<Self> {
        validate_factors(factors)?;
        let counts: Vec<usize> = factors.iter().map(Vec::len).collect();
        let mut probs = vec![1.0];
        for f in factors {
            probs = probs
                .iter()
                .flat_map(|&acc| f.iter().map(move |&x| acc * x.max(0.0)))
                .collect();
        }
        Self::new(counts, probs)
    }

    pub fn point_mass(strategy_counts: Vec<usize>, profile: &[usize]) -> Result<Self> {
        let joint: usize = strategy_counts.iter().product();
        let idx = profile
            .iter()
            .zip(&strategy_counts)
            .fold(0, |acc, (&s, &n)| acc * n + s);
        let mut p = vec![0.0; joint];
        if idx >= joint {
            return Err(QceError::InvalidDistribution("profile out of range".into()));
        }
        p[idx] = 1.0;
        Self::new(strategy_counts, p)
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn ensure_matches(&self, game: &StrategicGame) -> Result<()> {
        if self.strategy_counts != game.strategy_counts {
            return Err(QceError::DimensionMismatch(format!(
                "distribution has shape {:?}, game has {:?}",
                self.strategy_counts, game.strategy_counts
            )));
        }
        Ok(())
    }
}

fn validate_factors(factors: &[Vec<f64>]) -> Result<()> {
    if factors.is_empty() {
        return Err(QceError::InvalidDistribution("no factors".into()));
    }
    for (p, f) in factors.iter().enumerate() {
        if f.is_empty() || f.iter().any(|x| !x.is_finite() || *x < -PROB_CLAMP) {
            return Err(QceError::InvalidDistribution(format!(
                "factor of player {} is not a probability vector",
                p + 1
            )));
        }
        let total: f64 = f.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QceError::InvalidDistribution(format!(
                "factor of player {} sums to {total}",
                p + 1
            )));
        }
    }
    Ok(())
}

/// A quantum joint strategy: Hermitian, unit-trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QceError::InvalidState(format!(
                "matrix is {}x{}, not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix
            .as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(QceError::InvalidState("non-finite entry".into()));
        }
        let defect = matrix.hermitian_defect();
        if defect > NORMALIZATION_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(QceError::InvalidState(format!(
                "not Hermitian (‖ρ − ρ†‖_F = {defect:e})"
            )));
        }
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QceError::InvalidState(format!("trace is {trace}, not 1")));
        }
        let lambda_min = herm_eig(&matrix, NORMALIZATION_TOL)?.min_eigenvalue();
        if lambda_min < -NORMALIZATION_TOL {
            return Err(QceError::InvalidState(format!(
                "not positive semidefinite (λ_min = {lambda_min:e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// |ψ⟩⟨ψ| after normalizing ψ.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm <= 0.0 || !norm.is_finite() {
            return Err(QceError::InvalidState("state vector has zero norm".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&unit))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// ⟨s|ρ|s⟩ for every joint strategy s.
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub(crate) fn ensure_matches(&self, game: &StrategicGame) -> Result<()> {
        if self.dim() != game.joint_dim() {
            return Err(QceError::DimensionMismatch(format!(
                "state dimension {} does not match joint strategy count {} of strategies {:?}",
                self.dim(),
                game.joint_dim(),
                game.strategy_counts()
            )));
        }
        Ok(())
    }
}

/// u_i(ρ) = Σ_s ⟨s|ρ|s⟩ u_i(s).
pub fn expected_payoff(rho: &DensityState, game: &StrategicGame, player: usize) -> Result<f64> {
    rho.ensure_matches(game)?;
    game.check_player(player)?;
    Ok(rho
        .diagonal()
        .iter()
        .zip(game.utilities(player))
        .map(|(p, u)| p * u)
        .sum())
}

/// Σ_s p(s) u_i(s).
pub fn classical_payoff(
    p: &ClassicalDistribution,
    game: &StrategicGame,
    player: usize,
) -> Result<f64> {
    p.ensure_matches(game)?;
    game.check_player(player)?;
    Ok(p.probabilities()
        .iter()
        .zip(game.utilities(player))
        .map(|(p, u)| p * u)
        .sum())
}

/// A profitable switch s_i → s_i' for one player (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySwitch {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    /// Payoff increase from the switch (conditional mass included).
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCheck {
    pub holds: bool,
    /// Lexicographically first violation in (player, from, to) order.
    pub witness: Option<StrategySwitch>,
}

impl EquilibriumCheck {
    fn from_witness(witness: Option<StrategySwitch>) -> Self {
        Self {
            holds: witness.is_none(),
            witness,
        }
    }
}

/// Correlated-equilibrium inequalities with absolute slack `tol`.
pub fn classical_ce_check(
    p: &ClassicalDistribution,
    game: &StrategicGame,
    tol: f64,
) -> Result<EquilibriumCheck> {
    p.ensure_matches(game)?;
    let probs = p.probabilities();
    for player in 0..game.player_count() {
        let split = game.split(player)?;
        let u = game.utilities(player);
        for from in 0..split.m() {
            for to in 0..split.m() {
                if to == from {
                    continue;
                }
                let gain: f64 = (0..split.n())
                    .map(|j| {
                        probs[split.joint(from, j)]
                            * (u[split.joint(to, j)] - u[split.joint(from, j)])
                    })
                    .sum();
                if gain > tol {
                    return Ok(EquilibriumCheck::from_witness(Some(StrategySwitch {
                        player,
                        from,
                        to,
                        gain,
                    })));
                }
            }
        }
    }
    Ok(EquilibriumCheck::from_witness(None))
}

/// Mixed Nash-equilibrium inequalities for a product of per-player factors;
/// only strategies with p_i(s_i) > tol are constrained.
pub fn classical_ne_check(
    factors: &[Vec<f64>],
    game: &StrategicGame,
    tol: f64,
) -> Result<EquilibriumCheck> {
    validate_factors(factors)?;
    if factors.len() != game.player_count()
        || factors
            .iter()
            .zip(game.strategy_counts())
            .any(|(f, &n)| f.len() != n)
    {
        return Err(QceError::DimensionMismatch(format!(
            "factor lengths {:?} do not match strategy counts {:?}",
            factors.iter().map(Vec::len).collect::<Vec<_>>(),
            game.strategy_counts()
        )));
    }
    for player in 0..game.player_count() {
        let split = game.split(player)?;
        let u = game.utilities(player);
        let opponent_factors: Vec<&Vec<f64>> = factors
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != player)
            .map(|(_, f)| f)
            .collect();
        // p_{-i}(j), with j row-major over opponents in original order
        let mut opp = vec![1.0];
        for f in &opponent_factors {
            opp = opp
                .iter()
                .flat_map(|&acc| f.iter().map(move |&x| acc * x))
                .collect();
        }
        let conditional =
            |s: usize| -> f64 { (0..split.n()).map(|j| opp[j] * u[split.joint(s, j)]).sum() };
        let values: Vec<f64> = (0..split.m()).map(conditional).collect();
        for from in 0..split.m() {
            if factors[player][from] <= tol {
                continue;
            }
            for to in 0..split.m() {
                if to == from {
                    continue;
                }
                let gain = values[to] - values[from];
                if gain > tol {
                    return Ok(EquilibriumCheck::from_witness(Some(StrategySwitch {
                        player,
                        from,
                        to,
                        gain,
                    })));
                }
            }
        }
    }
    Ok(EquilibriumCheck::from_witness(None))
}

/// ρ = Σ_s p(s)|s⟩⟨s|.
pub fn lift_diagonal(p: &ClassicalDistribution) -> DensityState {
    DensityState {
        matrix: ComplexMatrix::from_real_diag(p.probabilities()),
    }
}

/// |ψ⟩⟨ψ| with ⟨s|ψ⟩ = √p(s).
pub fn lift_pure(p: &ClassicalDistribution) -> DensityState {
    let amplitudes: Vec<Complex64> = p
        .probabilities()
        .iter()
        .map(|&x| Complex64::new(x.sqrt(), 0.0))
        .collect();
    DensityState {
        matrix: ComplexMatrix::outer(&amplitudes),
    }
}
