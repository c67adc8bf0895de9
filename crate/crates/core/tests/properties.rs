//! Randomized invariants over small finite systems.

mod common;

use proptest::prelude::*;
use rand::Rng;

use jsccsj_core::game::{
    bayes_decoder, block_jammer_lp, block_policy_value, jammer_best_response,
    lagrangian_jammer_value, nash_gap, random_feasible_block_policy, NashOptions,
    BLOCK_LP_VARIABLE_LIMIT,
};
use jsccsj_core::matching::{check_jammer_cost, check_matched, check_user_cost, Verdict};
use jsccsj_core::model::{
    conditional_distortion, expected_distortion, expected_jammer_cost, induced_channel,
    input_marginal, kl_divergence, CondKernel, StrategyProfile,
};
use jsccsj_core::systems::binary_example;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(1000))]

    /// KL against `H(p, q) - H(p)` computed in base 2 and converted.
    #[test]
    fn kl_matches_cross_entropy_form(seed in any::<u64>(), len in 1usize..6) {
        let mut rng = common::rng(seed);
        let p = common::pmf(&mut rng, len);
        let q = common::pmf(&mut rng, len);
        let cross: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| -a * b.log2()).sum();
        let entropy: f64 = p.probs().iter().map(|a| -a * a.log2()).sum();
        let oracle = (cross - entropy) * std::f64::consts::LN_2;
        let kl = kl_divergence(&p, &q).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert!((kl - oracle.max(0.0)).abs() < 1e-12);
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(config(200))]

    /// Expected distortion is affine in the jammer kernel.
    #[test]
    fn distortion_linear_in_jammer(seed in any::<u64>(), beta in 0.0f64..=1.0) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let other = common::kernel(&mut rng, d.x, d.j);
        let mixed = p.jammer.mix(&other, beta).unwrap();
        let a = expected_distortion(&sys, &p).unwrap();
        let b = expected_distortion(&sys, &p.with_jammer(other)).unwrap();
        let m = expected_distortion(&sys, &p.with_jammer(mixed)).unwrap();
        prop_assert!((m - (beta * a + (1.0 - beta) * b)).abs() < 1e-12);
    }

    /// Averaging the conditional distortion over `p_X p_{J|X}` gives the
    /// expected distortion.
    #[test]
    fn conditional_distortion_consistent(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let h = conditional_distortion(&sys, &p.encoder, &p.decoder).unwrap();
        let px = input_marginal(&sys, &p.encoder).unwrap();
        let avg: f64 = (0..d.x)
            .map(|x| px[x] * (0..d.j).map(|j| p.jammer.prob(x, j) * h[x][j]).sum::<f64>())
            .sum();
        prop_assert!((avg - expected_distortion(&sys, &p).unwrap()).abs() < 1e-12);
    }

    /// The LP optimum dominates random feasible kernels and respects the
    /// budget; the Lagrangian dual agrees with it.
    #[test]
    fn jammer_lp_dominates_feasible_kernels(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let budget = sys.jammer_budget();
        let br = jammer_best_response(&sys, &p.encoder, &p.decoder, budget).unwrap();
        prop_assert!(br.cost <= budget + 1e-9);
        let dual = lagrangian_jammer_value(&sys, &p.encoder, &p.decoder, budget).unwrap();
        prop_assert!((dual - br.value).abs() < 1e-9);
        let px = input_marginal(&sys, &p.encoder).unwrap();
        for _ in 0..1000 {
            if let Some(k) = common::feasible_jammer(&mut rng, &sys, &px, budget) {
                let v = expected_distortion(&sys, &p.with_jammer(k)).unwrap();
                prop_assert!(v <= br.value + 1e-9, "{} > {}", v, br.value);
            }
        }
    }

    /// More budget never helps the user.
    #[test]
    fn jammer_value_monotone_in_budget(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let mut last = f64::NEG_INFINITY;
        for k in 0..10 {
            let budget = sys.jammer_budget() * (0.5 + 0.1 * k as f64);
            if let Ok(r) = jammer_best_response(&sys, &p.encoder, &p.decoder, budget) {
                prop_assert!(r.value >= last - 1e-9);
                last = r.value;
            }
        }
    }

    /// The Bayes decoder beats every random decoder.
    #[test]
    fn bayes_decoder_dominates(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let bayes = bayes_decoder(&sys, &p.encoder, &p.jammer).unwrap();
        let best = expected_distortion(&sys, &StrategyProfile { decoder: bayes, ..p.clone() }).unwrap();
        for _ in 0..50 {
            let dec = common::kernel(&mut rng, d.y, d.shat);
            let v = expected_distortion(&sys, &StrategyProfile { decoder: dec, ..p.clone() }).unwrap();
            prop_assert!(best <= v + 1e-12);
        }
    }

    /// With the jammer cost set to the conditional distortion and the budget
    /// to the profile's own cost, the LP value equals the profile's value.
    #[test]
    fn cost_equal_to_distortion_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let base = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let h = conditional_distortion(&base, &p.encoder, &p.decoder).unwrap();
        let sys = base.with_jammer_cost(h).unwrap();
        let own = expected_jammer_cost(&sys, &p.encoder, &p.jammer).unwrap();
        let sys = sys.with_budgets(sys.user_budget(), own).unwrap();
        let lp = jammer_best_response(&sys, &p.encoder, &p.decoder, own).unwrap();
        let value = expected_distortion(&sys, &p).unwrap();
        prop_assert!((lp.value - value).abs() < 1e-9, "{} vs {}", lp.value, value);
    }

    /// Jammer costs built as `c1 h + c2` pass the jammer-cost condition
    /// with the same constants.
    #[test]
    fn jammer_cost_fit_recovers_constants(seed in any::<u64>(), c1 in 0.1f64..5.0, c2 in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let base = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let h = conditional_distortion(&base, &p.encoder, &p.decoder).unwrap();
        let spread = h.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - h.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
        prop_assume!(spread > 1e-3);
        let rho: Vec<Vec<f64>> = h.iter().map(|r| r.iter().map(|v| c1 * v + c2).collect()).collect();
        let sys = base.with_jammer_cost(rho.clone()).unwrap();
        let r = check_jammer_cost(&sys, &p, 1e-9).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Pass);
        prop_assert!((r.slope - c1).abs() < 1e-6 * c1.max(1.0));
        prop_assert!((r.intercept - c2).abs() < 1e-6);
        for (x, row) in rho.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((r.slope * h[x][j] + r.intercept - v).abs() < 1e-8);
            }
        }
    }

    /// Rescaling a matched user cost rescales the fitted constants.
    #[test]
    fn user_cost_fit_scales(seed in any::<u64>(), gamma in 0.1f64..10.0, delta in 0.0f64..3.0) {
        let mut rng = common::rng(seed);
        let d = common::dims(&mut rng);
        let base = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let px = input_marginal(&base, &p.encoder).unwrap();
        let induced = induced_channel(base.channel(), &p.jammer).unwrap();
        let py: Vec<f64> = (0..d.y)
            .map(|y| (0..d.x).map(|x| px[x] * induced.prob(x, y)).sum())
            .collect();
        let py = jsccsj_core::Pmf::new(py).unwrap();
        let kl: Vec<f64> = (0..d.x).map(|x| kl_divergence(induced.row(x), &py).unwrap()).collect();
        let spread = kl.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - kl.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        prop_assume!(spread > 1e-3);
        let sys = base.with_user_cost(kl.clone()).unwrap();
        let r1 = check_user_cost(&sys, &p, 1e-9).unwrap();
        prop_assert_eq!(r1.verdict, Verdict::Pass);
        let scaled: Vec<f64> = kl.iter().map(|v| gamma * v + delta).collect();
        let sys2 = sys.with_budgets(100.0, sys.jammer_budget()).unwrap().with_user_cost(scaled).unwrap();
        let r2 = check_user_cost(&sys2, &p, 1e-9).unwrap();
        prop_assert_eq!(r2.verdict, Verdict::Pass);
        prop_assert!((r2.slope - gamma * r1.slope).abs() < 1e-6 * gamma.max(1.0));
        prop_assert!((r2.intercept - (gamma * r1.intercept + delta)).abs() < 1e-6 * gamma.max(1.0));
    }
}

proptest! {
    #![proptest_config(config(20))]

    /// The block LP dominates random non-product block policies.
    #[test]
    fn block_lp_dominates_random_block_policies(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::Dims { s: 2, x: 2, j: 2, y: 2, shat: 2 };
        let sys = common::system(&mut rng, d);
        let p = common::profile(&mut rng, d);
        let lp = block_jammer_lp(&sys, &p.encoder, &p.decoder, 2, BLOCK_LP_VARIABLE_LIMIT).unwrap();
        let single = jammer_best_response(&sys, &p.encoder, &p.decoder, sys.jammer_budget()).unwrap();
        prop_assert!((lp.value - single.value).abs() < 1e-9);
        for _ in 0..100 {
            let policy = random_feasible_block_policy(&sys, &p.encoder, &p.decoder, 2, &mut rng).unwrap();
            let (v, c) = block_policy_value(&sys, &p.encoder, &p.decoder, &policy).unwrap();
            prop_assert!(c <= sys.jammer_budget() + 1e-12);
            prop_assert!(v <= lp.value + 1e-9);
        }
    }
}

/// A passing match report implies zero Nash gaps across the binary family.
#[test]
fn matched_binary_systems_are_equilibria() {
    for i in 1..10 {
        for k in 0..10 {
            let p = 0.045 * i as f64;
            let pj = 0.05 * k as f64;
            let (sys, profile) = binary_example(p, pj).unwrap();
            let m = check_matched(&sys, &profile, 1e-9).unwrap();
            assert!(m.passed(), "p={p} pj={pj}: {:?}", m.failed_conditions());
            let g = nash_gap(&sys, &profile, &NashOptions::default()).unwrap();
            assert!(g.nash_ok, "p={p} pj={pj}: {g:?}");
        }
    }
}

#[test]
fn random_kernel_mix_is_a_kernel() {
    let mut rng = common::rng(5);
    let a = common::kernel(&mut rng, 3, 4);
    let b = CondKernel::identity(4);
    assert!(a
        .mix(&CondKernel::constant(3, b.row(0)), rng.random())
        .is_ok());
}
