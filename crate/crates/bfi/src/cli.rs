//! Argument parsing, subcommand dispatch and the exit-code taxonomy.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, including a fragility index that was not attained |
//! | 1 | `reproduce-paper` found a case whose index differs from the published one |
//! | 2 | not applicable: the baseline probability does not exceed `p0` |
//! | 3 | input error: unreadable file, malformed CSV, invalid flag values |
//! | 4 | numerical failure in the special-function or root-finding kernels |
//!
//! Every failure writes exactly one line `bfi: <kind>: <message>` to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use bfi_core::{
    fragility::{grid_len, sensitivity_cell},
    km_estimate, km_to_plot_points, simulate_trial, AnalysisConfig, Axis, CensorMechanism, Error,
    GammaParams, GridParam, SensitivityGrid, SimSpec, SpecFunConfig, SurvivalDataset, CASE_STUDIES,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{ingest_csv, write_csv, IngestError};
use crate::report::{self, build_report, to_json, FragilityStatus, Report, SensitivityReport};
use crate::svg::render_km_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REPRODUCTION_MISMATCH: i32 = 1;
pub const EXIT_NOT_APPLICABLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "bfi",
    version,
    about = "Bayesian fragility index for single-arm time-to-event data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Posterior summary, fragility index and Kaplan-Meier table
    Analyze(AnalysisArgs),
    /// Fragility index report
    Fi(AnalysisArgs),
    /// Kaplan-Meier curve as SVG
    Km(KmArgs),
    /// Fragility index over a grid of prior / threshold settings
    Sensitivity(SensitivityArgs),
    /// Simulate a trial (CSV) or a fragility histogram over replications (JSON)
    Simulate(SimulateArgs),
    /// Rebuild the three published case studies and check their indices
    ReproducePaper(ReproduceArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct PriorArgs {
    /// Shape of the Gamma prior on the event rate
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_PRIOR_SHAPE)]
    pub prior_shape: f64,
    /// Rate of the Gamma prior on the event rate
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_PRIOR_RATE)]
    pub prior_rate: f64,
    /// Median survival threshold, in the data's time unit (required)
    #[arg(long)]
    pub t0: f64,
    /// Confidence level
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_P0)]
    pub p0: f64,
    /// Iteration cap for the incomplete gamma series / continued fraction
    #[arg(long, default_value_t = SpecFunConfig::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
}

impl PriorArgs {
    fn config(&self) -> Result<AnalysisConfig, CliError> {
        let prior = GammaParams::new(self.prior_shape, self.prior_rate).map_err(CliError::flag)?;
        let specfun = SpecFunConfig::new(SpecFunConfig::DEFAULT_EPSILON, self.max_iterations)
            .map_err(CliError::flag)?;
        Ok(AnalysisConfig::with_prior(prior, self.t0, self.p0)
            .map_err(CliError::flag)?
            .with_specfun(specfun))
    }
}

#[derive(Args, Debug)]
pub struct AnalysisArgs {
    /// CSV file with header `time,status`
    pub input: PathBuf,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Label for the time unit
    #[arg(long, default_value = "months")]
    pub unit: String,
}

#[derive(Args, Debug)]
pub struct KmArgs {
    pub input: PathBuf,
    /// Write the SVG here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the staircase points as CSV (`x,y,kind`)
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long, default_value = "months")]
    pub unit: String,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args, Debug)]
pub struct SensitivityArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Grid axes, e.g. `p0=0.6,0.7,0.8;t0=5,7,9`. Names: prior-shape,
    /// prior-rate, t0, p0.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "months")]
    pub unit: String,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Subjects per trial
    #[arg(long)]
    pub n: usize,
    /// True event rate
    #[arg(long)]
    pub rate: f64,
    /// Administrative censoring at this time
    #[arg(long, conflicts_with = "censor_rate")]
    pub cutoff: Option<f64>,
    /// Independent exponential censoring with this rate
    #[arg(long)]
    pub censor_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run this many replications and report the fragility histogram
    #[arg(long, requires = "t0")]
    pub replications: Option<usize>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_PRIOR_SHAPE)]
    pub prior_shape: f64,
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_PRIOR_RATE)]
    pub prior_rate: f64,
    #[arg(long, default_value_t = AnalysisConfig::DEFAULT_P0)]
    pub p0: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn flag(e: Error) -> Self {
        CliError::Input(format!("invalid flag value: {e}"))
    }

    fn from_core(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Numerical(_) => "numerical",
            CliError::Output(_) => "output",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Output(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// What a subcommand produced: the main output plus a non-error status that
/// still selects a nonzero exit code.
pub struct Outcome {
    pub output: String,
    pub out_path: Option<PathBuf>,
    pub code: i32,
    pub notice: Option<(&'static str, String)>,
}

impl Outcome {
    fn ok(output: String, out_path: Option<PathBuf>) -> Self {
        Self {
            output,
            out_path,
            code: EXIT_OK,
            notice: None,
        }
    }
}

fn load(path: &Path, unit: &str) -> Result<(SurvivalDataset, Vec<u8>), CliError> {
    let (data, bytes) = ingest_csv(path)?;
    Ok((data.with_time_unit(unit), bytes))
}

fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Text => report::render_text(r),
    }
}

pub fn run_fi(args: &AnalysisArgs, with_km: bool) -> Result<Outcome, CliError> {
    let config = args.prior.config()?;
    let (data, bytes) = load(&args.input, &args.unit)?;
    let report =
        build_report(&data, &config, Some(&bytes), with_km).map_err(CliError::from_core)?;
    let mut outcome = Outcome::ok(render_report(&report, args.format), args.out.clone());
    if report.fragility.status == FragilityStatus::NotApplicable {
        outcome.code = EXIT_NOT_APPLICABLE;
        outcome.notice = Some((
            "not-applicable",
            format!(
                "posterior probability {} does not exceed p0 = {}",
                report.initial_prob, report.p0
            ),
        ));
    }
    Ok(outcome)
}

pub fn run_km(args: &KmArgs) -> Result<Outcome, CliError> {
    let (data, _) = load(&args.input, &args.unit)?;
    let points = km_to_plot_points(&km_estimate(&data));
    let svg = render_km_svg(&points, data.time_unit(), args.title.as_deref());
    if let Some(path) = &args.points {
        let mut csv = String::from("x,y,kind\n");
        for (x, y) in &points.line {
            csv.push_str(&format!("{x},{y},line\n"));
        }
        for (x, y) in &points.censor_ticks {
            csv.push_str(&format!("{x},{y},censor\n"));
        }
        write_file(path, &csv)?;
    }
    Ok(Outcome::ok(svg, args.out.clone()))
}

/// Parses `name=v1,v2;name=v3` into grid axes.
pub fn parse_grid(spec: &str) -> Result<Vec<Axis>, CliError> {
    let bad = |msg: String| CliError::Input(format!("invalid --grid: {msg}"));
    spec.split(';')
        .filter(|part| !part.trim().is_empty())
        .map(|part| {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("`{part}` is not name=values")))?;
            let param = GridParam::from_name(name.trim())
                .ok_or_else(|| bad(format!("unknown parameter `{}`", name.trim())))?;
            let values = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("`{}` is not a number", v.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Axis::new(param, values))
        })
        .collect()
}

pub fn run_sensitivity(args: &SensitivityArgs) -> Result<Outcome, CliError> {
    let base = args.prior.config()?;
    let axes = parse_grid(&args.grid)?;
    let len = grid_len(&axes).map_err(|e| CliError::Input(format!("invalid --grid: {e}")))?;
    let (data, bytes) = load(&args.input, &args.unit)?;
    // cells are independent; collect keeps index order
    let cells = (0..len)
        .into_par_iter()
        .map(|i| sensitivity_cell(&data, &base, &axes, i))
        .collect();
    let grid = SensitivityGrid { axes, cells };
    let report = SensitivityReport::new(&data, &grid, Some(&bytes));
    let output = match args.format {
        Format::Json => to_json(&report),
        Format::Text => report.render_text(),
    };
    Ok(Outcome::ok(output, args.out.clone()))
}

#[derive(Serialize)]
struct HistogramReport {
    tool: &'static str,
    version: &'static str,
    n: usize,
    event_rate: f64,
    censoring: String,
    seed: u64,
    t0: f64,
    p0: f64,
    replications: usize,
    not_applicable: usize,
    attained: std::collections::BTreeMap<usize, usize>,
    not_attained: usize,
    errors: usize,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let censoring = match (args.cutoff, args.censor_rate) {
        (Some(cutoff), _) => CensorMechanism::Administrative { cutoff },
        (None, Some(rate)) => CensorMechanism::Exponential { rate },
        (None, None) => CensorMechanism::None,
    };
    let spec = SimSpec::new(args.n, args.rate, censoring, args.seed).map_err(CliError::flag)?;
    let Some(replications) = args.replications else {
        let mut buf = Vec::new();
        write_csv(&simulate_trial(&spec), &mut buf).expect("writing to memory");
        return Ok(Outcome::ok(
            String::from_utf8(buf).expect("ascii"),
            args.out.clone(),
        ));
    };
    let t0 = args.t0.expect("clap enforces --t0 with --replications");
    let prior = GammaParams::new(args.prior_shape, args.prior_rate).map_err(CliError::flag)?;
    let config = AnalysisConfig::with_prior(prior, t0, args.p0).map_err(CliError::flag)?;
    let hist = bfi_core::fi_distribution(&spec, &config, replications).map_err(CliError::flag)?;
    let report = HistogramReport {
        tool: report::TOOL_NAME,
        version: report::TOOL_VERSION,
        n: spec.n,
        event_rate: spec.event_rate,
        censoring: match censoring {
            CensorMechanism::None => "none".to_owned(),
            CensorMechanism::Administrative { cutoff } => format!("administrative:{cutoff}"),
            CensorMechanism::Exponential { rate } => format!("exponential:{rate}"),
        },
        seed: spec.seed,
        t0,
        p0: args.p0,
        replications,
        not_applicable: hist.not_applicable,
        attained: hist.attained,
        not_attained: hist.not_attained,
        errors: hist.errors,
    };
    Ok(Outcome::ok(to_json(&report), args.out.clone()))
}

#[derive(Debug, Serialize)]
pub struct CaseReport {
    pub id: u8,
    pub name: &'static str,
    /// How the per-patient data were obtained.
    pub reconstruction: &'static str,
    pub reported_prob: f64,
    pub reported_fi: usize,
    pub calibrated_posterior_rate: f64,
    pub computed_fi: Option<usize>,
    pub matches_reported: bool,
    pub report: Report,
}

#[derive(Debug, Serialize)]
pub struct ReproductionBundle {
    pub tool: &'static str,
    pub version: &'static str,
    pub all_match: bool,
    pub cases: Vec<CaseReport>,
}

const RECONSTRUCTION_NOTE: &str = "per-patient times unavailable; dataset rebuilt from published \
event/censoring counts with total follow-up calibrated to the reported posterior probability";

pub fn reproduce_paper() -> Result<ReproductionBundle, CliError> {
    let mut cases = Vec::new();
    for case in CASE_STUDIES {
        let data = case.reconstruct().map_err(CliError::from_core)?;
        let config = case.config();
        let report = build_report(&data, &config, None, true).map_err(CliError::from_core)?;
        let computed_fi = report.fragility.fi;
        cases.push(CaseReport {
            id: case.id,
            name: case.name,
            reconstruction: RECONSTRUCTION_NOTE,
            reported_prob: case.reported_prob,
            reported_fi: case.reported_fi,
            calibrated_posterior_rate: report.posterior.rate,
            computed_fi,
            matches_reported: computed_fi == Some(case.reported_fi),
            report,
        });
    }
    Ok(ReproductionBundle {
        tool: report::TOOL_NAME,
        version: report::TOOL_VERSION,
        all_match: cases.iter().all(|c| c.matches_reported),
        cases,
    })
}

pub fn run_reproduce_paper(args: &ReproduceArgs) -> Result<Outcome, CliError> {
    let bundle = reproduce_paper()?;
    let output = match args.format {
        Format::Json => to_json(&bundle),
        Format::Text => {
            let mut s = String::new();
            for c in &bundle.cases {
                s.push_str(&format!(
                    "case {} ({}): reported FI {}, computed FI {}, calibrated posterior rate {} -> {}\n",
                    c.id,
                    c.name,
                    c.reported_fi,
                    c.computed_fi.map_or("-".to_owned(), |k| k.to_string()),
                    c.calibrated_posterior_rate,
                    if c.matches_reported { "match" } else { "MISMATCH" }
                ));
            }
            s
        }
    };
    let mut outcome = Outcome::ok(output, args.out.clone());
    let mismatched: Vec<String> = bundle
        .cases
        .iter()
        .filter(|c| !c.matches_reported)
        .map(|c| {
            format!(
                "case {} reported FI {} but computed {}",
                c.id,
                c.reported_fi,
                c.computed_fi.map_or("none".to_owned(), |k| k.to_string())
            )
        })
        .collect();
    if !mismatched.is_empty() {
        outcome.code = EXIT_REPRODUCTION_MISMATCH;
        outcome.notice = Some(("reproduction", mismatched.join("; ")));
    }
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

pub fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze(a) => run_fi(a, true),
        Command::Fi(a) => run_fi(a, false),
        Command::Km(a) => run_km(a),
        Command::Sensitivity(a) => run_sensitivity(a),
        Command::Simulate(a) => run_simulate(a),
        Command::ReproducePaper(a) => run_reproduce_paper(a),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses arguments, runs the command, writes output and returns the exit code.
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let detail = e.to_string();
            let summary: Vec<&str> = detail
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(|l| l.trim().trim_start_matches("error: "))
                .filter(|l| !l.is_empty())
                .collect();
            let msg = if summary.is_empty() {
                e.kind().as_str().unwrap_or("invalid arguments").to_owned()
            } else {
                summary.join(" ")
            };
            let _ = writeln!(stderr, "bfi: input: {}", one_line(&msg));
            return EXIT_INPUT;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            let written = match &outcome.out_path {
                Some(path) => write_file(path, &outcome.output),
                None => stdout
                    .write_all(outcome.output.as_bytes())
                    .map_err(|e| CliError::Output(e.to_string())),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "bfi: {}: {}", e.kind(), one_line(&e.to_string()));
                return e.exit_code();
            }
            if let Some((kind, msg)) = &outcome.notice {
                let _ = writeln!(stderr, "bfi: {kind}: {}", one_line(msg));
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "bfi: {}: {}", e.kind(), one_line(&e.to_string()));
            e.exit_code()
        }
    }
}
