//! Bayesian fragility index for single-arm time-to-event trials.
//!
//! The survival times are modelled as exponential with rate `λ` and a
//! conjugate `Gamma(α, β)` prior. Given censored data the posterior is
//! `Gamma(α + Σδ, β + ΣT)`, and the quantity of interest is the posterior
//! probability that the median survival `ln 2 / λ` exceeds a threshold `t0`.
//!
//! The fragility index is the smallest number of censored observations
//! (shortest censoring times first) that must be reclassified as events
//! before that probability drops below a confidence level `p0`.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and plotting live in the `bfi` crate.
//!
//! ```
//! use bfi_core::{AnalysisConfig, Observation, SurvivalDataset, fragility_index};
//!
//! let data = SurvivalDataset::new(vec![
//!     Observation::event(4.0).unwrap(),
//!     Observation::censored(12.0).unwrap(),
//!     Observation::censored(30.0).unwrap(),
//!     Observation::event(25.0).unwrap(),
//! ]).unwrap();
//! let config = AnalysisConfig::new(5.0, 0.7).unwrap();
//! let result = fragility_index(&data, &config).unwrap();
//! assert!(result.initial_prob > 0.7);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod case_study;
mod error;
pub mod fragility;
pub mod km;
pub mod rational;
pub mod sim;
pub mod specfun;
pub mod survival;

pub use case_study::{CaseStudy, CASE_STUDIES};
pub use error::{Error, Result};
pub use fragility::{
    calibrate, fi_trajectory, fragility_index, fragility_quotient, sensitivity_scan, Axis,
    FragilityIndex, FragilityResult, GridParam, SensitivityCell, SensitivityGrid, TrajectoryPoint,
};
pub use km::{km_estimate, km_to_plot_points, KmCurve, KmStep, PlotPoints};
pub use rational::Ratio;
pub use sim::{fi_distribution, simulate_trial, CensorMechanism, FiHistogram, SimSpec};
pub use specfun::{bisect_root, log_gamma, reg_lower_inc_gamma, SpecFunConfig};
pub use survival::{
    exp_hazard, exp_survival, log_likelihood, median_from_rate, posterior_prob_median_exceeds,
    posterior_update, AnalysisConfig, GammaParams, Observation, SurvivalDataset,
};
