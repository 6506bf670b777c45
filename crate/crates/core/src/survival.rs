//! Censored survival data and the conjugate exponential / Gamma model.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use libm::{exp, log};

use crate::error::{Error, Result};
use crate::specfun::{reg_lower_inc_gamma, SpecFunConfig};

/// One subject: follow-up time and whether the event was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    time: f64,
    event: bool,
}

impl Observation {
    pub fn new(time: f64, event: bool) -> Result<Self> {
        if !(time > 0.0) || !time.is_finite() {
            return Err(Error::Domain {
                what: "observation time must be finite and positive",
                value: time,
            });
        }
        Ok(Self { time, event })
    }

    pub fn event(time: f64) -> Result<Self> {
        Self::new(time, true)
    }

    pub fn censored(time: f64) -> Result<Self> {
        Self::new(time, false)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `true` when the event was observed, `false` when right-censored.
    pub fn is_event(&self) -> bool {
        self.event
    }

    pub fn is_censored(&self) -> bool {
        !self.event
    }

    /// The indicator as 0/1.
    pub fn status(&self) -> u8 {
        self.event as u8
    }
}

/// A non-empty, ordered collection of observations sharing one time unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    observations: Vec<Observation>,
    time_unit: Option<String>,
}

impl SurvivalDataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            observations,
            time_unit: None,
        })
    }

    /// Attach a time-unit label. Times are never converted.
    pub fn with_time_unit(mut self, unit: impl Into<String>) -> Self {
        self.time_unit = Some(unit.into());
        self
    }

    pub fn time_unit(&self) -> Option<&str> {
        self.time_unit.as_deref()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Always false; kept for the usual `len`/`is_empty` pairing.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn num_events(&self) -> usize {
        self.observations.iter().filter(|o| o.event).count()
    }

    pub fn num_censored(&self) -> usize {
        self.len() - self.num_events()
    }

    /// `ΣT`, correctly rounded, so it does not depend on observation order.
    pub fn total_time(&self) -> f64 {
        exact_sum(self.observations.iter().map(|o| o.time))
    }

    pub fn max_time(&self) -> f64 {
        self.observations.iter().map(|o| o.time).fold(0.0, f64::max)
    }

    pub(crate) fn reclassify_as_event(&mut self, idx: usize) {
        self.observations[idx].event = true;
    }
}

/// Shape/rate pair of a Gamma distribution, used for both prior and posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::Domain {
                what: "gamma shape must be finite and positive",
                value: shape,
            });
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Domain {
                what: "gamma rate must be finite and positive",
                value: rate,
            });
        }
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// `ln` of the density `β^α λ^{α-1} e^{-βλ} / Γ(α)` at `lambda > 0`.
    pub fn ln_pdf(&self, lambda: f64) -> f64 {
        if !(lambda > 0.0) {
            return f64::NEG_INFINITY;
        }
        let ln_norm = self.shape * log(self.rate)
            - crate::specfun::log_gamma(self.shape).expect("shape validated positive");
        ln_norm + (self.shape - 1.0) * log(lambda) - self.rate * lambda
    }

    pub fn pdf(&self, lambda: f64) -> f64 {
        exp(self.ln_pdf(lambda))
    }

    /// `P(λ <= lambda)`.
    pub fn cdf(&self, lambda: f64, cfg: &SpecFunConfig) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::Domain {
                what: "gamma cdf argument must be nonnegative",
                value: lambda,
            });
        }
        reg_lower_inc_gamma(self.shape, self.rate * lambda, cfg)
    }
}

/// Prior, decision threshold and confidence level for one analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub prior: GammaParams,
    /// Median-survival threshold, in the dataset's time unit.
    pub t0: f64,
    /// Confidence level the exceedance probability is compared against.
    pub p0: f64,
    pub specfun: SpecFunConfig,
}

impl AnalysisConfig {
    pub const DEFAULT_PRIOR_SHAPE: f64 = 0.5;
    pub const DEFAULT_PRIOR_RATE: f64 = 0.5;
    pub const DEFAULT_P0: f64 = 0.7;

    /// Config with the default `Gamma(0.5, 0.5)` prior.
    pub fn new(t0: f64, p0: f64) -> Result<Self> {
        let prior = GammaParams::new(Self::DEFAULT_PRIOR_SHAPE, Self::DEFAULT_PRIOR_RATE)?;
        Self::with_prior(prior, t0, p0)
    }

    pub fn with_prior(prior: GammaParams, t0: f64, p0: f64) -> Result<Self> {
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::Domain {
                what: "t0 must be finite and positive",
                value: t0,
            });
        }
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::Domain {
                what: "p0 must lie in (0, 1)",
                value: p0,
            });
        }
        Ok(Self {
            prior,
            t0,
            p0,
            specfun: SpecFunConfig::default(),
        })
    }

    pub fn with_specfun(mut self, specfun: SpecFunConfig) -> Self {
        self.specfun = specfun;
        self
    }
}

// Shewchuk's exactly rounded summation (the algorithm behind Python's
// `math.fsum`), restricted to finite inputs.
fn exact_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if libm::fabs(x) < libm::fabs(y) {
                core::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way correction so the result is correctly rounded.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain {
            what: "rate must be finite and positive",
            value: rate,
        });
    }
    Ok(())
}

/// Censored exponential log-likelihood `(Σδ) ln λ − λ ΣT`.
pub fn log_likelihood(data: &SurvivalDataset, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(data.num_events() as f64 * log(rate) - rate * data.total_time())
}

/// Conjugate update: `Gamma(α + Σδ, β + ΣT)`.
pub fn posterior_update(prior: &GammaParams, data: &SurvivalDataset) -> GammaParams {
    GammaParams {
        shape: prior.shape + data.num_events() as f64,
        rate: prior.rate + data.total_time(),
    }
}

/// `S(t) = e^{−λt}`.
pub fn exp_survival(rate: f64, t: f64) -> Result<f64> {
    check_rate(rate)?;
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "survival time must be nonnegative",
            value: t,
        });
    }
    Ok(exp(-rate * t))
}

/// Constant hazard of the exponential model.
pub fn exp_hazard(rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(rate)
}

/// `ln 2 / λ`.
pub fn median_from_rate(rate: f64) -> Result<f64> {
    check_rate(rate)?;
    Ok(LN_2 / rate)
}

/// Posterior probability that the median survival time exceeds `t0`,
/// i.e. `P(λ < ln 2 / t0)` under the posterior.
pub fn posterior_prob_median_exceeds(
    posterior: &GammaParams,
    t0: f64,
    cfg: &SpecFunConfig,
) -> Result<f64> {
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::Domain {
            what: "t0 must be finite and positive",
            value: t0,
        });
    }
    reg_lower_inc_gamma(posterior.shape, posterior.rate * LN_2 / t0, cfg)
}
