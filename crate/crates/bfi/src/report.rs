//! Report structures and their JSON / text renderings.
//!
//! The JSON field names and their order are the stable machine interface.
//! Text output is meant for people and may change.

use std::fmt::Write as _;

use bfi_core::{
    km_estimate, posterior_prob_median_exceeds, posterior_update, AnalysisConfig, Error,
    FragilityIndex, FragilityResult, KmCurve, SensitivityGrid, SurvivalDataset,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "bfi";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DatasetSummary {
    pub n: usize,
    pub events: usize,
    pub censored: usize,
    pub total_time: f64,
    pub time_unit: Option<String>,
}

impl DatasetSummary {
    pub fn of(data: &SurvivalDataset) -> Self {
        Self {
            n: data.len(),
            events: data.num_events(),
            censored: data.num_censored(),
            total_time: data.total_time(),
            time_unit: data.time_unit().map(str::to_owned),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct GammaSummary {
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TrajectoryEntry {
    pub k: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FragilityStatus {
    Attained,
    NotAttained,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FragilitySection {
    pub status: FragilityStatus,
    /// The index when attained.
    pub fi: Option<usize>,
    /// When not attained, the index exceeds this many reclassifications.
    pub fi_exceeds: Option<usize>,
    /// Exact `fi/n`, e.g. `"1/6"`.
    pub fq: Option<String>,
    pub fq_decimal: Option<f64>,
    /// Largest k whose probability is still at or above p0.
    pub last_k_at_or_above_p0: Option<usize>,
    pub trajectory: Vec<TrajectoryEntry>,
}

impl FragilitySection {
    pub fn from_result(r: &FragilityResult) -> Self {
        let (status, fi, fi_exceeds) = match r.fi {
            FragilityIndex::Attained(k) => (FragilityStatus::Attained, Some(k), None),
            FragilityIndex::NotAttained { censored } => {
                (FragilityStatus::NotAttained, None, Some(censored))
            }
        };
        Self {
            status,
            fi,
            fi_exceeds,
            fq: r.fq.map(|q| q.to_string()),
            fq_decimal: r.fq.map(|q| q.to_f64()),
            last_k_at_or_above_p0: Some(r.last_k_at_or_above_p0()),
            trajectory: r
                .trajectory
                .iter()
                .map(|p| TrajectoryEntry {
                    k: p.k,
                    prob: p.prob,
                })
                .collect(),
        }
    }

    pub fn not_applicable(initial_prob: f64) -> Self {
        Self {
            status: FragilityStatus::NotApplicable,
            fi: None,
            fi_exceeds: None,
            fq: None,
            fq_decimal: None,
            last_k_at_or_above_p0: None,
            trajectory: vec![TrajectoryEntry {
                k: 0,
                prob: initial_prob,
            }],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct KmStepEntry {
    pub time: f64,
    pub survival: f64,
    pub at_risk: usize,
    pub events: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct KmSection {
    pub steps: Vec<KmStepEntry>,
    pub censor_marks: Vec<f64>,
}

impl KmSection {
    pub fn from_curve(c: &KmCurve) -> Self {
        Self {
            steps: c
                .steps
                .iter()
                .map(|s| KmStepEntry {
                    time: s.time,
                    survival: s.survival,
                    at_risk: s.at_risk,
                    events: s.events,
                })
                .collect(),
            censor_marks: c.censor_marks.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the input bytes, when the dataset came from a file.
    pub input_sha256: Option<String>,
    pub dataset: DatasetSummary,
    pub prior: GammaSummary,
    pub posterior: GammaSummary,
    pub t0: f64,
    pub p0: f64,
    pub initial_prob: f64,
    pub fragility: FragilitySection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub km: Option<KmSection>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds the full report. Returns the report together with whether the
/// analysis was inapplicable, so callers can choose an exit code; numerical
/// failures are returned as errors.
pub fn build_report(
    data: &SurvivalDataset,
    config: &AnalysisConfig,
    input_bytes: Option<&[u8]>,
    with_km: bool,
) -> Result<Report, Error> {
    let posterior = posterior_update(&config.prior, data);
    let (initial_prob, fragility) = match bfi_core::fragility_index(data, config) {
        Ok(r) => (r.initial_prob, FragilitySection::from_result(&r)),
        Err(Error::NotFragileApplicable { initial_prob, .. }) => {
            (initial_prob, FragilitySection::not_applicable(initial_prob))
        }
        Err(e) => return Err(e),
    };
    debug_assert_eq!(
        Ok(initial_prob),
        posterior_prob_median_exceeds(&posterior, config.t0, &config.specfun)
    );
    Ok(Report {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        input_sha256: input_bytes.map(sha256_hex),
        dataset: DatasetSummary::of(data),
        prior: GammaSummary {
            shape: config.prior.shape(),
            rate: config.prior.rate(),
        },
        posterior: GammaSummary {
            shape: posterior.shape(),
            rate: posterior.rate(),
        },
        t0: config.t0,
        p0: config.p0,
        initial_prob,
        fragility,
        km: with_km.then(|| KmSection::from_curve(&km_estimate(data))),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

fn unit_suffix(unit: Option<&str>) -> String {
    unit.map(|u| format!(" {u}")).unwrap_or_default()
}

pub fn render_text(r: &Report) -> String {
    let unit = unit_suffix(r.dataset.time_unit.as_deref());
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", r.tool, r.version);
    if let Some(d) = &r.input_sha256 {
        let _ = writeln!(s, "input sha256      {d}");
    }
    let _ = writeln!(
        s,
        "observations      n = {}, events = {}, censored = {}, total time = {}{unit}",
        r.dataset.n, r.dataset.events, r.dataset.censored, r.dataset.total_time
    );
    let _ = writeln!(
        s,
        "prior             Gamma(shape = {}, rate = {})",
        r.prior.shape, r.prior.rate
    );
    let _ = writeln!(
        s,
        "posterior         Gamma(shape = {}, rate = {})",
        r.posterior.shape, r.posterior.rate
    );
    let _ = writeln!(s, "threshold         t0 = {}{unit}, p0 = {}", r.t0, r.p0);
    let _ = writeln!(s, "P(median > t0)    {}", r.initial_prob);
    let f = &r.fragility;
    match f.status {
        FragilityStatus::Attained => {
            let _ = writeln!(
                s,
                "fragility index   {} (FQ = {} = {})",
                f.fi.unwrap_or_default(),
                f.fq.as_deref().unwrap_or("-"),
                f.fq_decimal.unwrap_or(f64::NAN)
            );
        }
        FragilityStatus::NotAttained => {
            let _ = writeln!(
                s,
                "fragility index   > {}",
                f.fi_exceeds.unwrap_or_default()
            );
        }
        FragilityStatus::NotApplicable => {
            let _ = writeln!(s, "fragility index   not applicable (P(median > t0) <= p0)");
        }
    }
    if f.status != FragilityStatus::NotApplicable {
        let _ = writeln!(s, "trajectory");
        for e in &f.trajectory {
            let _ = writeln!(s, "  k = {:>3}   {}", e.k, e.prob);
        }
    }
    if let Some(km) = &r.km {
        let _ = writeln!(s, "kaplan-meier");
        for st in &km.steps {
            let _ = writeln!(
                s,
                "  t = {}{unit}   S = {}   at risk = {}   events = {}",
                st.time, st.survival, st.at_risk, st.events
            );
        }
    }
    s
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GridCellEntry {
    pub coords: Vec<(String, f64)>,
    pub status: FragilityStatus,
    pub error: Option<String>,
    pub initial_prob: Option<f64>,
    pub fi: Option<usize>,
    pub fi_exceeds: Option<usize>,
    pub fq: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GridAxisEntry {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SensitivityReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_sha256: Option<String>,
    pub dataset: DatasetSummary,
    pub axes: Vec<GridAxisEntry>,
    pub cells: Vec<GridCellEntry>,
}

impl SensitivityReport {
    pub fn new(data: &SurvivalDataset, grid: &SensitivityGrid, input_bytes: Option<&[u8]>) -> Self {
        let cells = grid
            .cells
            .iter()
            .map(|c| {
                let coords = c
                    .coords
                    .iter()
                    .map(|(p, v)| (p.name().to_owned(), *v))
                    .collect();
                let base = GridCellEntry {
                    coords,
                    status: FragilityStatus::NotApplicable,
                    error: None,
                    initial_prob: None,
                    fi: None,
                    fi_exceeds: None,
                    fq: None,
                };
                match &c.outcome {
                    Ok(r) => {
                        let f = FragilitySection::from_result(r);
                        GridCellEntry {
                            status: f.status,
                            initial_prob: Some(r.initial_prob),
                            fi: f.fi,
                            fi_exceeds: f.fi_exceeds,
                            fq: f.fq,
                            ..base
                        }
                    }
                    Err(Error::NotFragileApplicable { initial_prob, .. }) => GridCellEntry {
                        initial_prob: Some(*initial_prob),
                        ..base
                    },
                    Err(e) => GridCellEntry {
                        error: Some(e.to_string()),
                        ..base
                    },
                }
            })
            .collect();
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            input_sha256: input_bytes.map(sha256_hex),
            dataset: DatasetSummary::of(data),
            axes: grid
                .axes
                .iter()
                .map(|a| GridAxisEntry {
                    param: a.param.name().to_owned(),
                    values: a.values.clone(),
                })
                .collect(),
            cells,
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let header: Vec<&str> = self.axes.iter().map(|a| a.param.as_str()).collect();
        let _ = writeln!(s, "{}   initial_prob   fi", header.join("  "));
        for c in &self.cells {
            let coords: Vec<String> = c.coords.iter().map(|(_, v)| v.to_string()).collect();
            let fi = match c.status {
                FragilityStatus::Attained => c.fi.map(|k| k.to_string()).unwrap_or_default(),
                FragilityStatus::NotAttained => format!("> {}", c.fi_exceeds.unwrap_or_default()),
                FragilityStatus::NotApplicable => match &c.error {
                    Some(e) => format!("error: {e}"),
                    None => "n/a".to_owned(),
                },
            };
            let p = c
                .initial_prob
                .map(|p| format!("{p:.6}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{}   {p}   {fi}", coords.join("  "));
        }
        s
    }
}
