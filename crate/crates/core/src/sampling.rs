//! Random instances: games, density matrices, POVMs and Hermitian matrices.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::analyzer::Povm;
use crate::gamecore::{ClassicalDistribution, DensityState, StrategicGame};
use crate::hermlin::{herm_eig, ComplexMatrix};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, n).hermitian_part()
}

/// A A† / tr(A A†) with A an n×rank Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DensityState {
    let a = gaussian_matrix(rng, n, rank.max(1));
    let aa = a.matmul(&a.adjoint()).expect("compatible shapes");
    let tr = aa.trace().re;
    DensityState::new(aa.scale(1.0 / tr)).expect("normalized Gram matrix is a state")
}

/// Random effects P_i = A_i A_i† rescaled as T^{-1/2} P_i T^{-1/2}, T = Σ P_i.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Povm {
    let raw: Vec<ComplexMatrix> = (0..m)
        .map(|_| {
            let a = gaussian_matrix(rng, m, m);
            a.matmul(&a.adjoint()).expect("square")
        })
        .collect();
    let mut total = ComplexMatrix::zeros(m, m);
    for p in &raw {
        total = total.add(p).expect("same shape");
    }
    let inv_sqrt = herm_eig(&total.hermitian_part(), 1e-9)
        .expect("Gram sum is Hermitian")
        .map_eigenvalues(|l| 1.0 / l.sqrt());
    let effects = raw
        .iter()
        .map(|p| {
            inv_sqrt
                .matmul(p)
                .and_then(|x| x.matmul(&inv_sqrt))
                .expect("square")
                .hermitian_part()
        })
        .collect();
    Povm::new(effects).expect("congruence-normalized effects form a POVM")
}

/// Game with utilities drawn uniformly from [-scale, scale].
pub fn random_game<R: Rng + ?Sized>(
    rng: &mut R,
    strategy_counts: &[usize],
    scale: f64,
) -> StrategicGame {
    let joint: usize = strategy_counts.iter().product();
    let utilities = (0..strategy_counts.len())
        .map(|_| {
            (0..joint)
                .map(|_| rng.random_range(-scale..=scale))
                .collect()
        })
        .collect();
    StrategicGame::new(strategy_counts.to_vec(), utilities).expect("finite utilities")
}

/// Game with small integer utilities in [-range, range]; ties are common,
/// which makes equilibria common too.
pub fn random_integer_game<R: Rng + ?Sized>(
    rng: &mut R,
    strategy_counts: &[usize],
    range: i32,
) -> StrategicGame {
    let joint: usize = strategy_counts.iter().product();
    let utilities = (0..strategy_counts.len())
        .map(|_| {
            (0..joint)
                .map(|_| rng.random_range(-range..=range) as f64)
                .collect()
        })
        .collect();
    StrategicGame::new(strategy_counts.to_vec(), utilities).expect("finite utilities")
}

/// Distribution with exponential weights; each entry is zeroed with
/// probability `sparsity` (at least one entry survives).
pub fn random_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    strategy_counts: &[usize],
    sparsity: f64,
) -> ClassicalDistribution {
    let joint: usize = strategy_counts.iter().product();
    let keep = rng.random_range(0..joint);
    let mut w: Vec<f64> = (0..joint)
        .map(|idx| {
            if idx != keep && rng.random_bool(sparsity.clamp(0.0, 1.0)) {
                0.0
            } else {
                -rng.random_range(f64::EPSILON..1.0f64).ln()
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    ClassicalDistribution::new(strategy_counts.to_vec(), w).expect("normalized weights")
}
