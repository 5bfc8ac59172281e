use proptest::prelude::*;
use qce_core::gamecore::classical_payoff;
use qce_core::io::{parse_game, parse_state, write_game, write_state};
use qce_core::report::{
    BoundsSection, ComplexValue, DeviationReport, GainSection, HermitianPair, HermitianReport,
    MatrixReport, PlayerReport, ReportDocument, VectorReport, ViolationReport,
};
use qce_core::sampling::{
    random_density, random_distribution, random_game, random_integer_game, random_povm,
};
use qce_core::{
    bound_m_lambda, bound_positive_eigs, build_deviation_family, check_qce, classical_ce_check,
    classical_ne_check, expected_payoff, lift_diagonal, lift_pure, max_gain_general, povm_gain,
    ClassicalDistribution, DensityState, StrategicGame,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn instance(seed: u64, max_m: usize) -> (StrategicGame, DensityState, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = vec![rng.random_range(2..=max_m), rng.random_range(1..=3)];
    let game = random_game(&mut rng, &counts, 1.0);
    let dim = counts[0] * counts[1];
    let rank = rng.random_range(1..=dim);
    let rho = random_density(&mut rng, dim, rank);
    (game, rho, rng)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn matrix(rows: usize) -> impl Strategy<Value = MatrixReport> {
    (
        prop::collection::vec(finite(), rows * rows),
        prop::collection::vec(finite(), rows * rows),
    )
        .prop_map(move |(re, im)| MatrixReport {
            rows,
            cols: rows,
            re,
            im,
        })
}

fn player_report() -> impl Strategy<Value = PlayerReport> {
    (
        1usize..5,
        any::<bool>(),
        prop::option::of((1usize..4, 1usize..4, finite(), finite())),
        prop::collection::vec(
            (
                1usize..4,
                finite(),
                any::<bool>(),
                prop::collection::vec(finite(), 3),
            ),
            0..3,
        ),
        prop::option::of((finite(), finite(), finite(), 1usize..4, matrix(2))),
        prop::option::of((finite(), finite(), finite(), matrix(2), 0usize..300)),
        prop::option::of((finite(), finite(), finite())),
    )
        .prop_map(
            |(player, is_qce, pair, violations, dev, gain, bounds)| PlayerReport {
                player,
                is_qce,
                hermitian_condition: HermitianReport {
                    holds: pair.is_none(),
                    violation: pair.map(|(i1, i2, re, im)| HermitianPair {
                        i1,
                        i2,
                        difference: ComplexValue { re, im },
                    }),
                },
                violations: violations
                    .into_iter()
                    .map(
                        |(strategy, lambda, hermitian_violation, w)| ViolationReport {
                            strategy,
                            lambda,
                            hermitian_violation,
                            witness: VectorReport {
                                im: w.iter().map(|x| -x).collect(),
                                re: w,
                            },
                        },
                    )
                    .collect(),
                deviation: dev.map(|(lambda, epsilon, achieved_gain, strategy, e)| {
                    DeviationReport::Povm {
                        strategy,
                        lambda,
                        epsilon,
                        relabeling: vec![strategy, 1],
                        achieved_gain,
                        povm: vec![e.clone(), e],
                    }
                }),
                gain: gain.map(
                    |(max_gain, duality_gap, dual_slack, dual_y, newton_steps)| GainSection {
                        max_gain,
                        duality_gap,
                        dual_slack,
                        optimal_povm: vec![dual_y.clone()],
                        dual_y,
                        newton_steps,
                    },
                ),
                bounds: bounds.map(|(m_lambda, positive_eigs, epsilon_certificate)| {
                    BoundsSection {
                        m_lambda,
                        positive_eigs,
                        epsilon_certificate,
                    }
                }),
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn report_round_trips_exactly(players in prop::collection::vec(player_report(), 0..3), is_qce in any::<Option<bool>>()) {
        let mut doc = ReportDocument::new("check");
        doc.is_qce = is_qce;
        doc.players = players;
        let bytes = doc.to_json().unwrap();
        let back = ReportDocument::from_json(&bytes).unwrap();
        // bitwise float equality, including the sign of zero
        prop_assert_eq!(format!("{back:?}"), format!("{doc:?}"));
        prop_assert_eq!(back.to_json().unwrap(), bytes);
    }

    #[test]
    fn game_and_state_files_round_trip(seed in any::<u64>()) {
        let (game, rho, _) = instance(seed, 4);
        prop_assert_eq!(parse_game(&write_game(&game).unwrap()).unwrap(), game);
        let back = parse_state(&write_state(&rho).unwrap()).unwrap();
        prop_assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn affine_payoff_change_scales_the_family(seed in any::<u64>(), alpha in 0.01..100.0f64, beta in -10.0..10.0f64) {
        let (game, rho, _) = instance(seed, 4);
        let shifted: Vec<Vec<f64>> = game.all_utilities().iter().map(|u| u.iter().map(|x| alpha * x + beta).collect()).collect();
        let other = StrategicGame::new(game.strategy_counts().to_vec(), shifted).unwrap();
        for player in 0..2 {
            let a = build_deviation_family(&rho, &game, player).unwrap();
            let b = build_deviation_family(&rho, &other, player).unwrap();
            for (x, y) in a.matrices().iter().zip(b.matrices()) {
                let diff = x.scale(alpha).sub(y).unwrap().max_abs();
                prop_assert!(diff <= 1e-12 * alpha.max(1.0) * (1.0 + beta.abs()), "diff {diff:e}");
            }
        }
        prop_assert_eq!(check_qce(&rho, &game, TOL).unwrap().is_qce, check_qce(&rho, &other, TOL).unwrap().is_qce);
    }

    #[test]
    fn lifts_preserve_payoffs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = vec![rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=2)];
        let game = random_game(&mut rng, &counts, 5.0);
        let p = random_distribution(&mut rng, &counts, 0.3);
        for player in 0..3 {
            let classical = classical_payoff(&p, &game, player).unwrap();
            prop_assert!(close(expected_payoff(&lift_diagonal(&p), &game, player).unwrap(), classical, 1e-12));
            prop_assert!(close(expected_payoff(&lift_pure(&p), &game, player).unwrap(), classical, 1e-12));
        }
    }

    #[test]
    fn pure_nash_equilibria_are_correlated_equilibria(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = vec![rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=2)];
        let game = random_integer_game(&mut rng, &counts, 2);
        for s0 in 0..counts[0] {
            for s1 in 0..counts[1] {
                for s2 in 0..counts[2] {
                    let profile = [s0, s1, s2];
                    let factors: Vec<Vec<f64>> = counts
                        .iter()
                        .zip(profile)
                        .map(|(&k, s)| (0..k).map(|t| if t == s { 1.0 } else { 0.0 }).collect())
                        .collect();
                    if classical_ne_check(&factors, &game, TOL).unwrap().holds {
                        let p = ClassicalDistribution::point_mass(counts.clone(), &profile).unwrap();
                        prop_assert!(classical_ce_check(&p, &game, TOL).unwrap().holds);
                        prop_assert!(check_qce(&lift_pure(&p), &game, TOL).unwrap().is_qce);
                    }
                }
            }
        }
    }

    #[test]
    fn relabeling_strategies_permutes_the_family(seed in any::<u64>()) {
        let (game, rho, mut rng) = instance(seed, 4);
        let (m, n) = (game.strategy_counts()[0], game.strategy_counts()[1]);
        let mut perm: Vec<usize> = (0..m).collect();
        for k in (1..m).rev() {
            perm.swap(k, rng.random_range(0..=k));
        }
        let joint: Vec<usize> = (0..m * n).map(|idx| perm[idx / n] * n + idx % n).collect();
        let utilities: Vec<Vec<f64>> = game.all_utilities().iter().map(|u| joint.iter().map(|&s| u[s]).collect()).collect();
        let game2 = StrategicGame::new(vec![m, n], utilities).unwrap();
        let rho2 = DensityState::new(rho.matrix().permuted(&joint)).unwrap();

        let fam = build_deviation_family(&rho, &game, 0).unwrap();
        let fam2 = build_deviation_family(&rho2, &game2, 0).unwrap();
        for (x, y) in fam.relabeled(&perm).matrices().iter().zip(fam2.matrices()) {
            prop_assert!(x.sub(y).unwrap().max_abs() <= 1e-14);
        }
        let g1 = max_gain_general(&fam, TOL).unwrap().max_gain;
        let g2 = max_gain_general(&fam2, TOL).unwrap().max_gain;
        prop_assert!(close(g1, g2, 1e-8), "{g1} vs {g2}");
        prop_assert_eq!(check_qce(&rho, &game, TOL).unwrap().is_qce, check_qce(&rho2, &game2, TOL).unwrap().is_qce);
        let povm = random_povm(&mut rng, m);
        let a = povm_gain(&povm, &fam).unwrap();
        let b = povm_gain(&povm.relabeled(&perm), &fam2).unwrap();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn max_gain_scales_and_dominates(seed in any::<u64>(), alpha in 0.001..1000.0f64) {
        let (game, rho, mut rng) = instance(seed, 4);
        let fam = build_deviation_family(&rho, &game, 0).unwrap();
        let r = max_gain_general(&fam, TOL).unwrap();
        let s = max_gain_general(&fam.scaled(alpha), TOL).unwrap();
        // each optimum is only pinned down to within its own duality gap
        let budget = s.duality_gap + alpha * r.duality_gap + 1e-10 * (1.0 + s.max_gain.abs());
        prop_assert!((s.max_gain - alpha * r.max_gain).abs() <= budget, "{} vs {}", s.max_gain, alpha * r.max_gain);
        let upper = r.max_gain + r.duality_gap + 1e-10;
        for _ in 0..5 {
            let g = povm_gain(&random_povm(&mut rng, fam.m()), &fam).unwrap();
            prop_assert!(g <= upper, "random POVM {g} beats dual bound {upper}");
        }
    }

    #[test]
    fn bounds_dominate_the_exact_gain(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = vec![rng.random_range(2..=4), rng.random_range(1..=3)];
        let game = random_game(&mut rng, &counts, 1.0);
        // diagonal states always satisfy the Hermitian condition
        let rho = lift_diagonal(&random_distribution(&mut rng, &counts, 0.2));
        let fam = build_deviation_family(&rho, &game, 0).unwrap();
        let g = max_gain_general(&fam, TOL).unwrap().max_gain;
        prop_assert!(g <= bound_positive_eigs(&fam, TOL).unwrap() + 1e-8);
        prop_assert!(g <= bound_m_lambda(&fam, TOL).unwrap() + 1e-8);
    }
}
