mod common;

use bfi_core::{
    log_likelihood, median_from_rate, posterior_prob_median_exceeds, posterior_update, GammaParams,
    Observation, SpecFunConfig, SurvivalDataset,
};
use common::*;
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn observation() -> impl Strategy<Value = Observation> {
    (0.01f64..60.0, any::<bool>()).prop_map(|(t, e)| Observation::new(t, e).unwrap())
}

fn dataset(max: usize) -> impl Strategy<Value = SurvivalDataset> {
    prop::collection::vec(observation(), 1..=max).prop_map(|v| SurvivalDataset::new(v).unwrap())
}

fn prior() -> impl Strategy<Value = GammaParams> {
    (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| GammaParams::new(a, b).unwrap())
}

#[test]
fn conjugacy_oracle_small_datasets() {
    let mut rng = TestRng(2024);
    for _ in 0..20 {
        let n = 1 + rng.below(5);
        let obs = (0..n)
            .map(|_| Observation::new(rng.range(0.1, 20.0), rng.uniform() < 0.6).unwrap())
            .collect();
        let data = SurvivalDataset::new(obs).unwrap();
        let prior = GammaParams::new(rng.range(0.3, 4.0), rng.range(0.2, 3.0)).unwrap();
        let err = conjugacy_discrepancy(&data, &prior, 20);
        assert!(err <= 1e-6, "discrepancy {err} for {data:?} with {prior:?}");
    }
}

#[test]
fn exceedance_equals_quadrature_of_posterior() {
    for (a, b, t0) in [
        (1.5, 5.5, 2.0),
        (3.0, 10.0, 4.0),
        (0.5, 0.5, LN_2),
        (6.0, 40.0, 3.0),
    ] {
        let post = GammaParams::new(a, b).unwrap();
        let p = posterior_prob_median_exceeds(&post, t0, &SpecFunConfig::default()).unwrap();
        let q = reg_lower_inc_gamma_quadrature(a, b * LN_2 / t0);
        assert!((p - q).abs() < 1e-8, "({a}, {b}, {t0}): {p} vs {q}");
    }
}

#[test]
fn exceedance_monotone_on_grids() {
    let cfg = SpecFunConfig::default();
    let post = GammaParams::new(12.5, 90.0).unwrap();
    let probs: Vec<f64> = (1..60)
        .map(|i| posterior_prob_median_exceeds(&post, 0.5 * i as f64, &cfg).unwrap())
        .collect();
    assert!(probs.windows(2).all(|w| w[1] < w[0]));

    let probs: Vec<f64> = (1..60)
        .map(|s| {
            let post = GammaParams::new(s as f64 * 0.5, 90.0).unwrap();
            posterior_prob_median_exceeds(&post, 7.0, &cfg).unwrap()
        })
        .collect();
    assert!(probs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn uncensored_posterior_concentrates_at_true_rate() {
    use bfi_core::{simulate_trial, CensorMechanism, SimSpec};
    let spec = SimSpec::new(20_000, 0.2, CensorMechanism::None, 99).unwrap();
    let data = simulate_trial(&spec);
    let post = posterior_update(&GammaParams::new(0.5, 0.5).unwrap(), &data);
    let median = median_from_rate(post.mean()).unwrap();
    // sd of the median estimate ≈ (ln2/λ)/√n ≈ 0.0245; allow 4 sd
    assert!((median - LN_2 / 0.2).abs() < 0.1, "median {median}");
}

proptest! {
    #[test]
    fn posterior_is_order_invariant(data in dataset(40), prior in prior(), seed in any::<u64>()) {
        let mut obs = data.observations().to_vec();
        let mut rng = TestRng(seed);
        for i in (1..obs.len()).rev() {
            obs.swap(i, rng.below(i + 1));
        }
        let shuffled = SurvivalDataset::new(obs).unwrap();
        prop_assert_eq!(posterior_update(&prior, &data), posterior_update(&prior, &shuffled));
    }

    #[test]
    fn sequential_updates_compose(a in dataset(20), b in dataset(20), prior in prior()) {
        let step = posterior_update(&prior, &a);
        let two_step = posterior_update(&step, &b);
        let mut all = a.observations().to_vec();
        all.extend_from_slice(b.observations());
        let one_step = posterior_update(&prior, &SurvivalDataset::new(all).unwrap());
        prop_assert!((two_step.shape() - one_step.shape()).abs() <= 1e-12 * one_step.shape());
        prop_assert!((two_step.rate() - one_step.rate()).abs() <= 1e-12 * one_step.rate());
    }

    #[test]
    fn log_likelihood_closed_form(data in dataset(30), rate in 0.001f64..10.0) {
        let literal: f64 = data.observations().iter().map(|o| {
            let term = if o.is_event() { rate * (-rate * o.time()).exp() } else { (-rate * o.time()).exp() };
            term.ln()
        }).sum();
        let ll = log_likelihood(&data, rate).unwrap();
        prop_assert!((ll - literal).abs() <= 1e-9 * literal.abs().max(1.0));
    }

    #[test]
    fn median_strictly_decreasing(r in 1e-6f64..1e3, f in 1.0001f64..10.0) {
        prop_assert!(median_from_rate(r * f).unwrap() < median_from_rate(r).unwrap());
    }
}
