mod common;

use bfi_core::{km_estimate, km_to_plot_points, Observation, SurvivalDataset};
use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn dataset(obs: &[(f64, bool)]) -> SurvivalDataset {
    SurvivalDataset::new(
        obs.iter()
            .map(|&(t, e)| Observation::new(t, e).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Integer-valued times in 1..=15 so ties between events and censorings are common.
fn tied_observations(max: usize) -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec(
        (1u32..=15, any::<bool>()).prop_map(|(t, e)| (t as f64, e)),
        1..=max,
    )
}

fn product_from_counts(steps: &[bfi_core::KmStep]) -> Vec<BigRational> {
    let mut s = BigRational::one();
    steps
        .iter()
        .map(|st| {
            s *= BigRational::new(
                BigInt::from(st.at_risk - st.events),
                BigInt::from(st.at_risk),
            );
            s.clone()
        })
        .collect()
}

#[test]
fn twenty_observation_recount() {
    let mut rng = TestRng(20);
    let obs: Vec<(f64, bool)> = (0..20)
        .map(|_| ((1 + rng.below(12)) as f64, rng.uniform() < 0.7))
        .collect();
    let curve = km_estimate(&dataset(&obs));
    let oracle = km_recount(&obs);
    assert_eq!(curve.steps.len(), oracle.len());
    for (step, (t, at_risk, events, s)) in curve.steps.iter().zip(&oracle) {
        assert_eq!(
            (step.time, step.at_risk, step.events),
            (*t, *at_risk, *events)
        );
        assert!((step.survival - rational_to_f64(s)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn matches_brute_force_recount(obs in tied_observations(60)) {
        let curve = km_estimate(&dataset(&obs));
        let oracle = km_recount(&obs);
        prop_assert_eq!(curve.steps.len(), oracle.len());
        let exact = product_from_counts(&curve.steps);
        for ((step, (t, at_risk, events, s)), e) in curve.steps.iter().zip(&oracle).zip(&exact) {
            prop_assert_eq!((step.time, step.at_risk, step.events), (*t, *at_risk, *events));
            prop_assert_eq!(e, s);
            prop_assert!((step.survival - rational_to_f64(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn uncensored_equals_empirical_survival(times in prop::collection::vec(1u32..=30, 1..50)) {
        let times: Vec<f64> = times.into_iter().map(f64::from).collect();
        let obs: Vec<(f64, bool)> = times.iter().map(|&t| (t, true)).collect();
        let curve = km_estimate(&dataset(&obs));
        let exact = product_from_counts(&curve.steps);
        for (step, e) in curve.steps.iter().zip(&exact) {
            prop_assert_eq!(e, &empirical_survival(&times, step.time));
        }
    }

    #[test]
    fn staircase_never_rises(obs in tied_observations(60)) {
        let curve = km_estimate(&dataset(&obs));
        prop_assert!(curve.steps.windows(2).all(|w| w[1].survival <= w[0].survival));
        prop_assert!(curve.steps.windows(2).all(|w| w[1].at_risk < w[0].at_risk));
        prop_assert!(curve.steps.iter().all(|s| (0.0..=1.0).contains(&s.survival)));
        let pts = km_to_plot_points(&curve);
        prop_assert_eq!(pts.line[0], (0.0, 1.0));
        prop_assert!(pts.line.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0));
    }

    #[test]
    fn censoring_outside_event_span_is_inert(obs in tied_observations(40), extra in 0.5f64..10.0) {
        let steps = |o: &[(f64, bool)]| {
            km_estimate(&dataset(o)).steps.iter().map(|s| (s.time, s.survival)).collect::<Vec<_>>()
        };
        // where a censoring past the last event sits does not matter
        let last_event = obs.iter().filter(|o| o.1).map(|o| o.0).fold(0.0, f64::max);
        let mut near = obs.clone();
        near.push((last_event + extra, false));
        let mut far = obs.clone();
        far.push((last_event + 3.0 * extra, false));
        prop_assert_eq!(steps(&near), steps(&far));

        // a censoring before the first event never enters a risk set
        let first_event = obs.iter().filter(|o| o.1).map(|o| o.0).fold(f64::INFINITY, f64::min);
        if first_event.is_finite() {
            let mut early = obs.clone();
            early.push((first_event * 0.5, false));
            prop_assert_eq!(steps(&obs), steps(&early));
        }
    }
}
