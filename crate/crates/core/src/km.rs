//! Kaplan-Meier product-limit estimator.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::survival::SurvivalDataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmStep {
    pub time: f64,
    /// Survival just after `time` (right-continuous), the exact product
    /// rounded once to the nearest `f64`.
    pub survival: f64,
    pub at_risk: usize,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve {
    /// One step per distinct event time, ascending.
    pub steps: Vec<KmStep>,
    /// Censoring times, ascending, one entry per censored observation.
    pub censor_marks: Vec<f64>,
    /// Largest observed time, censored or not.
    pub max_time: f64,
}

impl KmCurve {
    /// `S(t)` with the right-continuous convention.
    pub fn survival_at(&self, t: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|s| s.time <= t)
            .last()
            .map_or(1.0, |s| s.survival)
    }
}

/// Product-limit estimate. An event and a censoring at the same time count
/// the censored subject as still at risk for that event.
pub fn km_estimate(data: &SurvivalDataset) -> KmCurve {
    let mut obs: Vec<(f64, bool)> = data
        .observations()
        .iter()
        .map(|o| (o.time(), o.is_event()))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut steps = Vec::new();
    let mut censor_marks = Vec::new();
    let mut remaining = obs.len();
    let mut exact = BigRational::one();
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut events = 0;
        let mut censored = 0;
        while i < obs.len() && obs[i].0 == t {
            if obs[i].1 {
                events += 1;
            } else {
                censored += 1;
                censor_marks.push(t);
            }
            i += 1;
        }
        if events > 0 {
            exact *= BigRational::new(BigInt::from(remaining - events), BigInt::from(remaining));
            let survival = if exact.is_zero() {
                0.0
            } else {
                exact.to_f64().unwrap_or(0.0)
            };
            steps.push(KmStep {
                time: t,
                survival,
                at_risk: remaining,
                events,
            });
        }
        remaining -= events + censored;
    }
    KmCurve {
        steps,
        censor_marks,
        max_time: data.max_time(),
    }
}

/// Staircase polyline and censor tick positions for plotting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotPoints {
    pub line: Vec<(f64, f64)>,
    pub censor_ticks: Vec<(f64, f64)>,
}

/// Builds the right-continuous staircase: starts at `(0, 1)`, each drop
/// contributes `(t, S_before)` and `(t, S_after)`, and the line is extended
/// flat to the last observed time.
pub fn km_to_plot_points(curve: &KmCurve) -> PlotPoints {
    let mut line = Vec::with_capacity(2 * curve.steps.len() + 2);
    line.push((0.0, 1.0));
    let mut level = 1.0;
    for step in &curve.steps {
        line.push((step.time, level));
        line.push((step.time, step.survival));
        level = step.survival;
    }
    let last_x = line.last().map_or(0.0, |p| p.0);
    if curve.max_time > last_x {
        line.push((curve.max_time, level));
    }
    let censor_ticks = curve
        .censor_marks
        .iter()
        .map(|&t| (t, curve.survival_at(t)))
        .collect();
    PlotPoints { line, censor_ticks }
}
