//! Fragility index search, trajectories, sensitivity grids and calibration.
//!
//! Reclassifying a censored observation as an event keeps its recorded time,
//! so under the exponential model each flip raises the posterior shape by one
//! and leaves the posterior rate untouched. The probability after `k` flips is
//! therefore `P(α' + k, β' ln 2 / t0)` regardless of which observations were
//! flipped. The search below still follows the shortest-censoring-time order
//! literally; `fi_trajectory_with_order` exists so tests can confirm the order
//! does not matter.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::rational::Ratio;
use crate::specfun::{bisect_root, reg_lower_inc_gamma, SpecFunConfig};
use crate::survival::{
    posterior_prob_median_exceeds, posterior_update, AnalysisConfig, GammaParams, SurvivalDataset,
};

/// Outcome of the fragility search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragilityIndex {
    /// Smallest number of reclassifications that pushes the probability below `p0`.
    Attained(usize),
    /// Every censored observation was reclassified and the probability stayed
    /// at or above `p0`; read as "FI > censored".
    NotAttained { censored: usize },
}

impl FragilityIndex {
    pub fn value(&self) -> Option<usize> {
        match *self {
            FragilityIndex::Attained(k) => Some(k),
            FragilityIndex::NotAttained { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// Number of censored observations reclassified so far.
    pub k: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragilityResult {
    pub fi: FragilityIndex,
    /// Exceedance probability for `k = 0 ..= stop`.
    pub trajectory: Vec<TrajectoryPoint>,
    pub initial_prob: f64,
    /// `fi / n`, present only when the index was attained.
    pub fq: Option<Ratio>,
    /// Sample size.
    pub n: usize,
    pub config: AnalysisConfig,
}

impl FragilityResult {
    /// Largest `k` whose probability is still at or above `p0`.
    pub fn last_k_at_or_above_p0(&self) -> usize {
        self.trajectory
            .iter()
            .filter(|pt| pt.prob >= self.config.p0)
            .map(|pt| pt.k)
            .max()
            .unwrap_or(0)
    }
}

/// Indices of the censored observations, shortest censoring time first.
/// Equal times keep their input order.
pub fn censored_order(data: &SurvivalDataset) -> Vec<usize> {
    let obs = data.observations();
    let mut order: Vec<usize> = (0..obs.len()).filter(|&i| obs[i].is_censored()).collect();
    order.sort_by(|&a, &b| obs[a].time().total_cmp(&obs[b].time()));
    order
}

struct Reclassifier<'a> {
    working: SurvivalDataset,
    order: &'a [usize],
    prior: GammaParams,
    t0: f64,
    specfun: SpecFunConfig,
    flipped: usize,
}

impl<'a> Reclassifier<'a> {
    fn new(data: &SurvivalDataset, config: &AnalysisConfig, order: &'a [usize]) -> Self {
        Self {
            working: data.clone(),
            order,
            prior: config.prior,
            t0: config.t0,
            specfun: config.specfun,
            flipped: 0,
        }
    }

    fn probability(&self) -> Result<f64> {
        let posterior = posterior_update(&self.prior, &self.working);
        posterior_prob_median_exceeds(&posterior, self.t0, &self.specfun)
    }

    /// Flips the next observation in the order; `None` once exhausted.
    fn advance(&mut self) -> Option<Result<f64>> {
        let &idx = self.order.get(self.flipped)?;
        self.working.reclassify_as_event(idx);
        self.flipped += 1;
        Some(self.probability())
    }
}

/// Runs the fragility search.
///
/// Fails with [`Error::NotFragileApplicable`] when the baseline probability
/// is not strictly above `p0`. Stops at the first `k` whose probability is
/// strictly below `p0`.
pub fn fragility_index(data: &SurvivalDataset, config: &AnalysisConfig) -> Result<FragilityResult> {
    let order = censored_order(data);
    let mut walker = Reclassifier::new(data, config, &order);
    let initial_prob = walker.probability()?;
    if !(initial_prob > config.p0) {
        return Err(Error::NotFragileApplicable {
            initial_prob,
            p0: config.p0,
        });
    }
    let mut trajectory = vec![TrajectoryPoint {
        k: 0,
        prob: initial_prob,
    }];
    let mut fi = FragilityIndex::NotAttained {
        censored: order.len(),
    };
    while let Some(prob) = walker.advance() {
        let prob = prob?;
        let k = walker.flipped;
        trajectory.push(TrajectoryPoint { k, prob });
        if prob < config.p0 {
            fi = FragilityIndex::Attained(k);
            break;
        }
    }
    let fq = fi
        .value()
        .and_then(|k| fragility_quotient(k, data.len()).ok());
    Ok(FragilityResult {
        fi,
        trajectory,
        initial_prob,
        fq,
        n: data.len(),
        config: *config,
    })
}

/// `fi / n` as an exact fraction.
pub fn fragility_quotient(fi: usize, n: usize) -> Result<Ratio> {
    if fi == 0 || n == 0 || fi > n {
        return Err(Error::Domain {
            what: "fragility quotient needs 1 <= fi <= n",
            value: fi as f64,
        });
    }
    Ok(Ratio::new(fi as u64, n as u64).expect("n is nonzero"))
}

/// Probabilities for `k = 0 ..= k_max` reclassifications in the
/// shortest-censoring-time order. No stopping rule is applied.
pub fn fi_trajectory(
    data: &SurvivalDataset,
    config: &AnalysisConfig,
    k_max: usize,
) -> Result<Vec<TrajectoryPoint>> {
    fi_trajectory_with_order(data, config, &censored_order(data), k_max)
}

/// Same as [`fi_trajectory`] but flipping observations in the given order.
/// `order` must list distinct indices of censored observations.
pub fn fi_trajectory_with_order(
    data: &SurvivalDataset,
    config: &AnalysisConfig,
    order: &[usize],
    k_max: usize,
) -> Result<Vec<TrajectoryPoint>> {
    let obs = data.observations();
    let mut seen = vec![false; obs.len()];
    for &i in order {
        if i >= obs.len() || !obs[i].is_censored() || seen[i] {
            return Err(Error::Invalid(
                "reclassification order must list distinct censored observations",
            ));
        }
        seen[i] = true;
    }
    if k_max > order.len() {
        return Err(Error::Range {
            requested: k_max,
            available: order.len(),
        });
    }
    let order = &order[..k_max];
    let mut walker = Reclassifier::new(data, config, order);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(TrajectoryPoint {
        k: 0,
        prob: walker.probability()?,
    });
    while let Some(prob) = walker.advance() {
        out.push(TrajectoryPoint {
            k: walker.flipped,
            prob: prob?,
        });
    }
    Ok(out)
}

/// Lower end of the rate bracket used by [`calibrate`].
pub const CALIBRATE_RATE_FLOOR: f64 = 1e-12;
/// Bisection tolerance used by [`calibrate`].
pub const CALIBRATE_TOLERANCE: f64 = 1e-12;
/// How many times the upper end of the bracket may double before giving up.
pub const CALIBRATE_MAX_DOUBLINGS: usize = 1_000;

/// Finds the posterior rate `b` with `P(shape, b ln 2 / t0) = target_prob`.
///
/// The left side is strictly increasing in `b`, so the bracket
/// `[1e-12, B]` is grown by doubling `B` from 1 until it straddles the target.
pub fn calibrate(shape: f64, target_prob: f64, t0: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(target_prob > 0.0 && target_prob < 1.0) {
        return Err(Error::Domain {
            what: "calibration target must lie in (0, 1)",
            value: target_prob,
        });
    }
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::Domain {
            what: "gamma shape must be finite and positive",
            value: shape,
        });
    }
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::Domain {
            what: "t0 must be finite and positive",
            value: t0,
        });
    }
    let scale = LN_2 / t0;
    // Errors inside the closure are surfaced as NaN and re-checked below.
    let objective = |b: f64| match reg_lower_inc_gamma(shape, b * scale, cfg) {
        Ok(p) => p - target_prob,
        Err(_) => f64::NAN,
    };
    let lo = CALIBRATE_RATE_FLOOR;
    let f_lo = objective(lo);
    if !(f_lo < 0.0) {
        // The target is below anything reachable from the floor of the bracket.
        return Err(Error::Bracket {
            lo,
            hi: lo,
            f_lo,
            f_hi: f_lo,
        });
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    loop {
        let f_hi = objective(hi);
        if f_hi.is_nan() {
            reg_lower_inc_gamma(shape, hi * scale, cfg)?;
        }
        if f_hi >= 0.0 {
            break;
        }
        if doublings == CALIBRATE_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Convergence {
                method: "calibration bracket growth",
                iterations: doublings,
            });
        }
        hi *= 2.0;
        doublings += 1;
    }
    let rate = bisect_root(objective, lo, hi, CALIBRATE_TOLERANCE)?;
    reg_lower_inc_gamma(shape, rate * scale, cfg)?;
    Ok(rate)
}

/// A parameter that a sensitivity grid can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridParam {
    PriorShape,
    PriorRate,
    T0,
    P0,
}

impl GridParam {
    pub const ALL: [GridParam; 4] = [
        GridParam::PriorShape,
        GridParam::PriorRate,
        GridParam::T0,
        GridParam::P0,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GridParam::PriorShape => "prior-shape",
            GridParam::PriorRate => "prior-rate",
            GridParam::T0 => "t0",
            GridParam::P0 => "p0",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: GridParam,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: GridParam, values: Vec<f64>) -> Self {
        Self { param, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCell {
    /// One `(param, value)` per axis, in axis order.
    pub coords: Vec<(GridParam, f64)>,
    /// `None` when the coordinates do not form a valid configuration.
    pub config: Option<AnalysisConfig>,
    pub outcome: Result<FragilityResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityGrid {
    pub axes: Vec<Axis>,
    /// Row-major over `axes`: the last axis varies fastest.
    pub cells: Vec<SensitivityCell>,
}

fn validate_axes(axes: &[Axis]) -> Result<usize> {
    if axes.is_empty() {
        return Err(Error::Invalid("sensitivity grid needs at least one axis"));
    }
    for (i, axis) in axes.iter().enumerate() {
        if axis.values.is_empty() {
            return Err(Error::Invalid("sensitivity axis has no values"));
        }
        if axes[..i].iter().any(|a| a.param == axis.param) {
            return Err(Error::Invalid(
                "sensitivity axes must name distinct parameters",
            ));
        }
    }
    Ok(axes.iter().map(|a| a.values.len()).product())
}

/// Number of cells in the grid spanned by `axes`.
pub fn grid_len(axes: &[Axis]) -> Result<usize> {
    validate_axes(axes)
}

/// Evaluates cell `index` of the grid independently of every other cell.
pub fn sensitivity_cell(
    data: &SurvivalDataset,
    base: &AnalysisConfig,
    axes: &[Axis],
    index: usize,
) -> SensitivityCell {
    let mut coords = vec![(GridParam::T0, 0.0); axes.len()];
    let mut rem = index;
    for (slot, axis) in coords.iter_mut().zip(axes).rev() {
        let n = axis.values.len();
        *slot = (axis.param, axis.values[rem % n]);
        rem /= n;
    }
    let mut shape = base.prior.shape();
    let mut rate = base.prior.rate();
    let mut t0 = base.t0;
    let mut p0 = base.p0;
    for &(param, v) in &coords {
        match param {
            GridParam::PriorShape => shape = v,
            GridParam::PriorRate => rate = v,
            GridParam::T0 => t0 = v,
            GridParam::P0 => p0 = v,
        }
    }
    let config = GammaParams::new(shape, rate)
        .and_then(|prior| AnalysisConfig::with_prior(prior, t0, p0))
        .map(|c| c.with_specfun(base.specfun));
    match config {
        Ok(config) => SensitivityCell {
            coords,
            config: Some(config),
            outcome: fragility_index(data, &config),
        },
        Err(e) => SensitivityCell {
            coords,
            config: None,
            outcome: Err(e),
        },
    }
}

/// Runs [`fragility_index`] at every point of the grid. Per-cell failures are
/// stored in the cell; only malformed axes abort.
pub fn sensitivity_scan(
    data: &SurvivalDataset,
    base: &AnalysisConfig,
    axes: &[Axis],
) -> Result<SensitivityGrid> {
    let len = validate_axes(axes)?;
    let cells = (0..len)
        .map(|i| sensitivity_cell(data, base, axes, i))
        .collect();
    Ok(SensitivityGrid {
        axes: axes.to_vec(),
        cells,
    })
}
