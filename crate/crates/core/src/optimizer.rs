//! Maximum gain over all POVMs and its certificates.
//!
//! The best a player can do against a fixed state is the semidefinite program
//!
//! ```text
//! primal:  max Σ_i tr(E_i B_i)   s.t.  E_i ⪰ 0,  Σ_i E_i = I
//! dual:    min tr(Y)             s.t.  Y ⪰ B_i  for every i
//! ```
//!
//! solved here by a dual log-barrier path-following method. On the central
//! path E_i = μ (Y − B_i)⁻¹ is an exact primal point with Σ E_i = I, so both a
//! POVM and a strictly feasible Y come out of every centered iterate with
//! duality gap m²μ.

use num_complex::Complex64;

use crate::analyzer::{check_hermitian_condition, povm_gain, DeviationFamily, Povm};
use crate::error::{QceError, Result};
use crate::hermlin::{
    cholesky, cholesky_inverse, cholesky_logdet, cholesky_solve, herm_eig, ComplexMatrix,
};

const MU_SHRINK: f64 = 8.0;
const MAX_NEWTON_STEPS: usize = 200;
const MAX_OUTER: usize = 60;
/// Target duality gap in units of the family's scale.
const TARGET_REL_GAP: f64 = 1e-12;
/// Newton decrement² at which a point counts as centered. Off-centeredness δ
/// changes the gap by a factor 1 + O(δ).
const CENTERED: f64 = 1e-10;
const NEARLY_CENTERED: f64 = 1e-6;

/// Result of the maximum-gain computation for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub player: usize,
    /// Σ tr(E_i B_i) of `optimal_povm`, recomputed from the family.
    pub max_gain: f64,
    pub optimal_povm: Povm,
    pub dual_y: ComplexMatrix,
    /// tr(Y) − max_gain, clamped at 0.
    pub duality_gap: f64,
    /// min_i λ_min(Y − B_i); non-negative for a feasible dual.
    pub dual_slack: f64,
    pub bound_m_lambda: f64,
    pub bound_positive_eigs: f64,
    pub epsilon_certificate: f64,
    pub newton_steps: usize,
}

/// Exact maximum gain; requires the Hermitian condition.
pub fn max_gain(fam: &DeviationFamily, tol: f64) -> Result<GainReport> {
    if let Some(v) = check_hermitian_condition(fam, tol).violation {
        return Err(QceError::HermitianConditionViolated {
            i1: v.i1,
            i2: v.i2,
            difference: v.difference.norm(),
        });
    }
    gain_report(fam, tol)
}

/// Maximum gain for any family, Hermitian condition or not.
///
/// For a Hermitian effect E, tr(E B) and tr(E (B + B†)/2) have the same real
/// part, and the gain is real, so the program over the Hermitian parts has the
/// same value. When the Hermitian condition fails this value is strictly
/// positive.
pub fn max_gain_general(fam: &DeviationFamily, tol: f64) -> Result<GainReport> {
    gain_report(fam, tol)
}

fn gain_report(fam: &DeviationFamily, tol: f64) -> Result<GainReport> {
    let hs = fam.hermitian_parts();
    let (optimal_povm, dual_y, newton_steps) = solve_gain_sdp(&hs, tol)?;
    let max_gain = povm_gain(&optimal_povm, fam)?;
    let dual_value = dual_y.trace().re;
    let dual_slack = dual_slack(&dual_y, &hs, tol)?;
    let bound_m_lambda = bound_m_lambda_hermitian(&hs, tol)?;
    let bound_positive_eigs = bound_positive_eigs_hermitian(&hs, tol)?;
    Ok(GainReport {
        player: fam.player(),
        max_gain,
        optimal_povm,
        dual_y,
        duality_gap: (dual_value - max_gain).max(0.0),
        dual_slack,
        bound_m_lambda,
        bound_positive_eigs,
        epsilon_certificate: bound_m_lambda.min(bound_positive_eigs).max(0.0),
        newton_steps,
    })
}

/// min_i λ_min(Y − H_i).
pub fn dual_slack(y: &ComplexMatrix, hs: &[ComplexMatrix], tol: f64) -> Result<f64> {
    hs.iter()
        .map(|h| herm_eig(&y.sub(h)?, tol).map(|s| s.min_eigenvalue()))
        .try_fold(f64::INFINITY, |acc, x| x.map(|x| acc.min(x)))
}

/// Solves the primal/dual pair for Hermitian `hs`; returns (POVM, Y, Newton
/// steps taken).
pub fn solve_gain_sdp(hs: &[ComplexMatrix], tol: f64) -> Result<(Povm, ComplexMatrix, usize)> {
    let m = hs.len();
    if m == 0 {
        return Err(QceError::DimensionMismatch("empty family".into()));
    }
    if hs.iter().any(|h| h.rows() != m || h.cols() != m) {
        return Err(QceError::DimensionMismatch(
            "family matrices must be m×m".into(),
        ));
    }
    let mut lambda = f64::NEG_INFINITY;
    let mut all_nsd = true;
    for h in hs {
        let top = herm_eig(h, tol)?.max_eigenvalue();
        lambda = lambda.max(top);
        all_nsd &= top <= tol * h.frobenius_norm().max(1.0);
    }
    if m == 1 || all_nsd {
        return Ok((Povm::computational_basis(m), ComplexMatrix::zeros(m, m), 0));
    }

    let scale = hs
        .iter()
        .map(ComplexMatrix::frobenius_norm)
        .fold(0.0, f64::max);
    let gs: Vec<ComplexMatrix> = hs
        .iter()
        .map(|h| h.hermitian_part().scale(1.0 / scale))
        .collect();
    let lambda = lambda / scale;

    let mut barrier = Barrier::new(
        &gs,
        ComplexMatrix::identity(m).scale(lambda.max(0.0) + 1.0),
        1.0,
    )?;
    let mut steps = barrier.center()?;
    for _ in 0..MAX_OUTER {
        if (m * m) as f64 * barrier.mu <= TARGET_REL_GAP {
            break;
        }
        let snapshot = barrier.clone();
        barrier.mu /= MU_SHRINK;
        match barrier.center() {
            Ok(k) => steps += k,
            // ill-conditioning near the boundary: keep the last centered point
            Err(QceError::NumericalBreakdown(_)) => {
                barrier = snapshot;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let povm = barrier.primal_point()?;
    Ok((povm, barrier.y.scale(scale), steps))
}

/// f(Y) = tr(Y)/μ − Σ_i ln det(Y − G_i).
#[derive(Clone)]
struct Barrier<'a> {
    gs: &'a [ComplexMatrix],
    y: ComplexMatrix,
    mu: f64,
}

struct Local {
    value: f64,
    inverses: Vec<ComplexMatrix>,
}

impl<'a> Barrier<'a> {
    fn new(gs: &'a [ComplexMatrix], y: ComplexMatrix, mu: f64) -> Result<Self> {
        let b = Self { gs, y, mu };
        if b.local(&b.y).is_none() {
            return Err(QceError::NumericalBreakdown(
                "initial dual point is infeasible".into(),
            ));
        }
        Ok(b)
    }

    fn local(&self, y: &ComplexMatrix) -> Option<Local> {
        let mut value = y.trace().re / self.mu;
        let mut inverses = Vec::with_capacity(self.gs.len());
        for g in self.gs {
            let l = cholesky(&y.sub(g).ok()?)?;
            value -= cholesky_logdet(&l);
            inverses.push(cholesky_inverse(&l));
        }
        value.is_finite().then_some(Local { value, inverses })
    }

    /// Damped Newton to the central point for the current μ.
    fn center(&mut self) -> Result<usize> {
        let m = self.y.rows();
        let dim = m * m;
        let mut last_decrement_sq = f64::INFINITY;
        for step in 0..MAX_NEWTON_STEPS {
            let here = self.local(&self.y).ok_or_else(|| {
                QceError::NumericalBreakdown("dual iterate left the feasible region".into())
            })?;
            let mut grad = ComplexMatrix::identity(m).scale(1.0 / self.mu);
            for inv in &here.inverses {
                grad = grad.sub(inv)?;
            }
            // Hessian of −ln det: Δ ↦ Σ S⁻¹ Δ S⁻¹, as an m²×m² matrix on
            // row-major vec(Δ).
            let mut hess = ComplexMatrix::zeros(dim, dim);
            for inv in &here.inverses {
                for r in 0..m {
                    for c in 0..m {
                        for p in 0..m {
                            let a = inv[(r, p)];
                            for q in 0..m {
                                hess[(r * m + c, p * m + q)] += a * inv[(q, c)];
                            }
                        }
                    }
                }
            }
            let hess = hess.hermitian_part();
            let chol = cholesky(&hess).ok_or_else(|| {
                QceError::NumericalBreakdown("barrier Hessian is not positive definite".into())
            })?;
            let rhs: Vec<Complex64> = grad.as_slice().iter().map(|z| -z).collect();
            let delta = ComplexMatrix::new(m, m, cholesky_solve(&chol, &rhs))?.hermitian_part();
            let decrement_sq = -grad.trace_product(&delta)?.re;
            if !decrement_sq.is_finite() {
                return Err(QceError::NumericalBreakdown(
                    "non-finite Newton decrement".into(),
                ));
            }
            // Near the boundary S⁻¹ carries noise of order cond(S)·eps, which
            // puts a floor under the decrement; stop once Newton stops
            // making progress against it.
            if decrement_sq <= CENTERED
                || (decrement_sq < NEARLY_CENTERED && decrement_sq >= 0.5 * last_decrement_sq)
            {
                return Ok(step);
            }
            last_decrement_sq = decrement_sq;
            let decrement = decrement_sq.max(0.0).sqrt();
            let mut t = if decrement > 0.25 {
                1.0 / (1.0 + decrement)
            } else {
                1.0
            };
            let mut accepted = false;
            for _ in 0..60 {
                let trial = self.y.add(&delta.scale(t))?;
                if trial == self.y {
                    // the step is below the resolution of Y
                    break;
                }
                if let Some(next) = self.local(&trial) {
                    if next.value <= here.value - 0.25 * t * decrement_sq
                        || (decrement_sq < 1e-10
                            && next.value <= here.value + 1e-13 * here.value.abs())
                    {
                        self.y = trial;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                if decrement_sq < NEARLY_CENTERED {
                    return Ok(step);
                }
                return Err(QceError::NumericalBreakdown("line search stalled".into()));
            }
        }
        if last_decrement_sq < NEARLY_CENTERED {
            return Ok(MAX_NEWTON_STEPS);
        }
        Err(QceError::NumericalBreakdown(format!(
            "barrier centering did not converge in {MAX_NEWTON_STEPS} Newton steps"
        )))
    }

    /// E_i = μ (Y − G_i)⁻¹, congruence-normalized so that Σ E_i = I exactly up
    /// to rounding while staying PSD.
    fn primal_point(&self) -> Result<Povm> {
        let here = self
            .local(&self.y)
            .ok_or_else(|| QceError::NumericalBreakdown("final dual point infeasible".into()))?;
        let effects: Vec<ComplexMatrix> =
            here.inverses.iter().map(|inv| inv.scale(self.mu)).collect();
        let m = self.y.rows();
        let mut total = ComplexMatrix::zeros(m, m);
        for e in &effects {
            total = total.add(e)?;
        }
        let spectrum = herm_eig(&total.hermitian_part(), 1e-6)?;
        if spectrum.min_eigenvalue() <= 0.0 {
            return Err(QceError::NumericalBreakdown(
                "primal effects do not span".into(),
            ));
        }
        let inv_sqrt = spectrum.map_eigenvalues(|l| 1.0 / l.sqrt());
        let effects = effects
            .iter()
            .map(|e| Ok(inv_sqrt.matmul(e)?.matmul(&inv_sqrt)?.hermitian_part()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Povm::new_unchecked(effects))
    }
}

fn ensure_hermitian_family(fam: &DeviationFamily, tol: f64) -> Result<()> {
    for b in fam.matrices() {
        let defect = b.hermitian_defect();
        let allowed = tol * b.frobenius_norm().max(1.0);
        if defect.is_nan() || defect > allowed {
            return Err(QceError::NotHermitian { defect, allowed });
        }
    }
    Ok(())
}

fn bound_m_lambda_hermitian(hs: &[ComplexMatrix], tol: f64) -> Result<f64> {
    let lambda = hs
        .iter()
        .map(|h| herm_eig(h, tol).map(|s| s.max_eigenvalue()))
        .try_fold(f64::NEG_INFINITY, |acc, x| x.map(|x| acc.max(x)))?;
    Ok(if lambda > 0.0 {
        hs.len() as f64 * lambda
    } else {
        0.0
    })
}

fn bound_positive_eigs_hermitian(hs: &[ComplexMatrix], tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for h in hs {
        total += herm_eig(h, tol)?
            .eigenvalues
            .iter()
            .filter(|&&l| l > 0.0)
            .sum::<f64>();
    }
    Ok(total)
}

/// m · max_i λ_max(B_i), or 0 when that maximum is not positive.
pub fn bound_m_lambda(fam: &DeviationFamily, tol: f64) -> Result<f64> {
    ensure_hermitian_family(fam, tol)?;
    bound_m_lambda_hermitian(&fam.hermitian_parts(), tol)
}

/// Sum of all strictly positive eigenvalues over the family.
pub fn bound_positive_eigs(fam: &DeviationFamily, tol: f64) -> Result<f64> {
    ensure_hermitian_family(fam, tol)?;
    bound_positive_eigs_hermitian(&fam.hermitian_parts(), tol)
}

/// The smaller of the two bounds, clamped at 0: no POVM gains more than this.
pub fn epsilon_certificate(fam: &DeviationFamily, tol: f64) -> Result<f64> {
    Ok(bound_m_lambda(fam, tol)?
        .min(bound_positive_eigs(fam, tol)?)
        .max(0.0))
}

/// Closed-form optimum for two outcomes: with E_2 = I − E_1 the objective is
/// tr(B_2) + tr(E_1 (B_1 − B_2)) over 0 ⪯ E_1 ⪯ I, maximized by the projector
/// onto the positive eigenspace of B_1 − B_2.
pub fn two_outcome_oracle(b1: &ComplexMatrix, b2: &ComplexMatrix, tol: f64) -> Result<f64> {
    herm_eig(b1, tol)?;
    herm_eig(b2, tol)?;
    let diff = b1.sub(b2)?;
    let positive: f64 = herm_eig(&diff, tol)?
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .sum();
    Ok(b2.trace().re + positive)
}
