//! Experiment descriptions and batch execution.
//!
//! An experiment is a TOML document. Scenario keys sit at the top level,
//! solver settings under `[solver]`, and per-variant options under
//! `[variant.<name>]`:
//!
//! ```toml
//! distance_m = 2000.0
//! altitude_m = 100.0
//! period_s = 100.0
//! slots = 400
//! max_speed_mps = 40.0
//! gamma0_db = 80.0        # reference SNR at 1 m for 1 W
//! power_dbm = 15.0        # average power of S and the UAV
//! endpoints = "free"      # or "fixed" with start_m / end_m
//! start_m = [0.0, 0.0]
//! end_m = [2000.0, 0.0]
//! variants = ["saf", "iaf", "static_af", "saf_delay"]
//! sweep_dbm = [5.0, 10.0, 15.0]
//! output_dir = "results"
//! seed = 0
//!
//! [solver]
//! ao_tolerance = 0.01
//! ao_measure = "total"
//!
//! [variant.static_af]
//! grid_points = 2001
//!
//! [variant.saf_delay]
//! max_delay = [10, 100]
//! ```
//!
//! Every key is optional.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{export_run, RunSummary};
use crate::optimizer::{
    solve_iaf, solve_saf, solve_saf_delay_constrained, solve_static_af, SolveResult,
};
use crate::scenario::{
    db_to_linear, gamma0_from_db, Endpoints, ScenarioConfig, SolverParams, Waypoint,
};

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const TOP_SUMMARY_CSV: &str = "summary.csv";
pub const TOP_SUMMARY_JSON: &str = "summary.json";

/// Slack allowed when checking the nesting of variant throughputs.
const ORDERING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Variant {
    Saf,
    Iaf,
    StaticAf { grid_points: usize },
    /// One run per delay bound, in slots.
    SafDelay { max_delay: Vec<usize> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Saf => "saf",
            Variant::Iaf => "iaf",
            Variant::StaticAf { .. } => "static_af",
            Variant::SafDelay { .. } => "saf_delay",
        }
    }

    /// Variant with default options, from its config name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "saf" => Variant::Saf,
            "iaf" => Variant::Iaf,
            "static_af" => Variant::StaticAf {
                grid_points: DEFAULT_GRID_POINTS,
            },
            "saf_delay" => Variant::SafDelay {
                max_delay: vec![10, 100],
            },
            _ => return None,
        })
    }
}

/// A single solver call of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Saf,
    Iaf,
    StaticAf { grid_points: usize },
    SafDelay { max_delay: usize },
}

impl RunKind {
    pub fn label(&self) -> String {
        match self {
            RunKind::Saf => "saf".into(),
            RunKind::Iaf => "iaf".into(),
            RunKind::StaticAf { .. } => "static_af".into(),
            RunKind::SafDelay { max_delay } => format!("saf_delay{max_delay}"),
        }
    }

    pub fn solve(&self, config: &ScenarioConfig) -> Result<SolveResult> {
        match *self {
            RunKind::Saf => solve_saf(config),
            RunKind::Iaf => solve_iaf(config),
            RunKind::StaticAf { grid_points } => solve_static_af(config, grid_points),
            RunKind::SafDelay { max_delay } => solve_saf_delay_constrained(config, max_delay),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub distance: f64,
    pub altitude: f64,
    pub period: f64,
    pub slots: usize,
    pub max_speed: f64,
    /// Reference SNR at 1 m for a 1 W transmitter, dB.
    pub gamma0_db: f64,
    /// Average per-slot power of both S and the UAV, dBm.
    pub power_dbm: f64,
    pub endpoints: Endpoints,
    pub solver: SolverParams,
    pub variants: Vec<Variant>,
    /// Power levels to run, dBm; empty means `power_dbm` only.
    pub sweep_dbm: Vec<f64>,
    pub output_dir: PathBuf,
    /// Reserved; every solver is deterministic.
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let base = ScenarioConfig::default();
        Self {
            distance: base.distance,
            altitude: base.altitude,
            period: base.period,
            slots: base.slots,
            max_speed: base.max_speed,
            gamma0_db: 80.0,
            power_dbm: 15.0,
            endpoints: base.endpoints,
            solver: base.solver,
            variants: vec![Variant::Saf],
            sweep_dbm: Vec::new(),
            output_dir: PathBuf::from("results"),
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    /// Scenario at average power `p_dbm` (E_s = E_u = N 10^(P/10) mW).
    pub fn scenario(&self, p_dbm: f64) -> ScenarioConfig {
        let energy = self.slots as f64 * db_to_linear(p_dbm);
        ScenarioConfig {
            distance: self.distance,
            altitude: self.altitude,
            period: self.period,
            slots: self.slots,
            max_speed: self.max_speed,
            gamma0: gamma0_from_db(self.gamma0_db),
            energy_source: energy,
            energy_uav: energy,
            endpoints: self.endpoints,
            max_delay: None,
            solver: self.solver.clone(),
        }
    }

    pub fn power_levels(&self) -> Vec<f64> {
        if self.sweep_dbm.is_empty() {
            vec![self.power_dbm]
        } else {
            self.sweep_dbm.clone()
        }
    }

    pub fn runs(&self) -> Vec<RunKind> {
        let mut out = Vec::new();
        for v in &self.variants {
            match v {
                Variant::Saf => out.push(RunKind::Saf),
                Variant::Iaf => out.push(RunKind::Iaf),
                Variant::StaticAf { grid_points } => out.push(RunKind::StaticAf {
                    grid_points: *grid_points,
                }),
                Variant::SafDelay { max_delay } => out.extend(
                    max_delay
                        .iter()
                        .map(|&d| RunKind::SafDelay { max_delay: d }),
                ),
            }
        }
        out
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.variants.is_empty() {
            out.push("variants must not be empty".to_string());
        }
        let mut seen = Vec::new();
        for v in &self.variants {
            if seen.contains(&v.name()) {
                out.push(format!("variant {} listed twice", v.name()));
            }
            seen.push(v.name());
            match v {
                Variant::StaticAf { grid_points } if *grid_points < 2 => {
                    out.push(format!("variant.static_af.grid_points must be >= 2 (got {grid_points})"))
                }
                Variant::SafDelay { max_delay } if max_delay.is_empty() => {
                    out.push("variant.saf_delay.max_delay must not be empty".to_string())
                }
                _ => {}
            }
        }
        for (name, v) in [("power_dbm", self.power_dbm), ("gamma0_db", self.gamma0_db)] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite (got {v})"));
            }
        }
        for v in &self.sweep_dbm {
            if !v.is_finite() {
                out.push(format!("sweep_dbm values must be finite (got {v})"));
            }
        }
        // Linear gamma0 and energies follow from fields checked above.
        for p in self.scenario(self.power_dbm).problems() {
            if !(p.starts_with("energy_") || p.starts_with("gamma0 ")) {
                out.push(rename_problem(&p));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// TOML text that parses back to `self`.
    pub fn render(&self) -> String {
        let raw = RawSpec::from(self);
        toml::to_string(&raw).expect("experiment serializes to TOML")
    }
}

/// Maps scenario field names to their config keys in diagnostics.
fn rename_problem(p: &str) -> String {
    const KEYS: [(&str, &str); 4] = [
        ("distance", "distance_m"),
        ("altitude", "altitude_m"),
        ("period", "period_s"),
        ("max_speed", "max_speed_mps"),
    ];
    for (field, key) in KEYS {
        if let Some(rest) = p.strip_prefix(field) {
            if rest.starts_with(' ') {
                return format!("{key}{rest}");
            }
        }
    }
    p.to_string()
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    altitude_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_speed_mps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma0_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoints: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start_m: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    end_m: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variants: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_dbm: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
    #[serde(skip_serializing_if = "Option::is_none", rename = "variant")]
    variant_options: Option<RawVariantOptions>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    ao_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ao_measure: Option<crate::scenario::AoMeasure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ao_max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    barrier_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    barrier_growth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    newton_max_iterations: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariantOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    static_af: Option<RawStaticAf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    saf_delay: Option<RawSafDelay>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStaticAf {
    grid_points: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafDelay {
    max_delay: Option<Vec<usize>>,
}

impl From<&ExperimentSpec> for RawSpec {
    fn from(s: &ExperimentSpec) -> Self {
        let (endpoints, start_m, end_m) = match s.endpoints {
            Endpoints::Free => ("free", None, None),
            Endpoints::Fixed { start, end } => {
                ("fixed", Some([start.x, start.y]), Some([end.x, end.y]))
            }
        };
        let mut options = RawVariantOptions::default();
        for v in &s.variants {
            match v {
                Variant::StaticAf { grid_points } => {
                    options.static_af = Some(RawStaticAf {
                        grid_points: Some(*grid_points),
                    })
                }
                Variant::SafDelay { max_delay } => {
                    options.saf_delay = Some(RawSafDelay {
                        max_delay: Some(max_delay.clone()),
                    })
                }
                _ => {}
            }
        }
        let p = &s.solver;
        RawSpec {
            distance_m: Some(s.distance),
            altitude_m: Some(s.altitude),
            period_s: Some(s.period),
            slots: Some(s.slots),
            max_speed_mps: Some(s.max_speed),
            gamma0_db: Some(s.gamma0_db),
            power_dbm: Some(s.power_dbm),
            endpoints: Some(endpoints.to_string()),
            start_m,
            end_m,
            variants: Some(s.variants.iter().map(|v| v.name().to_string()).collect()),
            sweep_dbm: Some(s.sweep_dbm.clone()),
            output_dir: Some(s.output_dir.clone()),
            seed: Some(s.seed),
            solver: Some(RawSolver {
                ao_tolerance: Some(p.ao_tolerance),
                ao_measure: Some(p.ao_measure),
                ao_max_iterations: Some(p.ao_max_iterations),
                power_tolerance: Some(p.power_tolerance),
                power_max_iterations: Some(p.power_max_iterations),
                trajectory_tolerance: Some(p.trajectory_tolerance),
                trajectory_max_iterations: Some(p.trajectory_max_iterations),
                barrier_tolerance: Some(p.barrier_tolerance),
                barrier_growth: Some(p.barrier_growth),
                newton_max_iterations: Some(p.newton_max_iterations),
            }),
            variant_options: Some(options),
        }
    }
}

/// Parses and validates an experiment document. Every invalid field is
/// reported, not just the first.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let mut problems = Vec::new();
    let mut spec = ExperimentSpec::default();

    macro_rules! take {
        ($($field:ident => $key:ident),* $(,)?) => {
            $(if let Some(v) = raw.$key { spec.$field = v; })*
        };
    }
    take!(
        distance => distance_m,
        altitude => altitude_m,
        period => period_s,
        slots => slots,
        max_speed => max_speed_mps,
        gamma0_db => gamma0_db,
        power_dbm => power_dbm,
        sweep_dbm => sweep_dbm,
        output_dir => output_dir,
        seed => seed,
    );

    match raw.endpoints.as_deref() {
        None | Some("free") => {
            if raw.start_m.is_some() || raw.end_m.is_some() {
                problems.push("start_m/end_m need endpoints = \"fixed\"".to_string());
            }
        }
        Some("fixed") => match (raw.start_m, raw.end_m) {
            (Some(a), Some(b)) => {
                spec.endpoints = Endpoints::Fixed {
                    start: Waypoint::new(a[0], a[1]),
                    end: Waypoint::new(b[0], b[1]),
                }
            }
            _ => problems.push("endpoints = \"fixed\" needs both start_m and end_m".to_string()),
        },
        Some(other) => problems.push(format!("endpoints must be \"free\" or \"fixed\" (got {other:?})")),
    }

    if let Some(s) = raw.solver {
        let p = &mut spec.solver;
        macro_rules! solver {
            ($($field:ident),*) => { $(if let Some(v) = s.$field { p.$field = v; })* };
        }
        solver!(
            ao_tolerance,
            ao_measure,
            ao_max_iterations,
            power_tolerance,
            power_max_iterations,
            trajectory_tolerance,
            trajectory_max_iterations,
            barrier_tolerance,
            barrier_growth,
            newton_max_iterations
        );
    }

    let options = raw.variant_options.unwrap_or_default();
    if let Some(names) = raw.variants {
        spec.variants = Vec::new();
        for name in names {
            match Variant::from_name(&name) {
                Some(v) => spec.variants.push(v),
                None => problems.push(format!(
                    "unknown variant {name:?} (expected saf, iaf, static_af or saf_delay)"
                )),
            }
        }
    }
    for v in &mut spec.variants {
        match v {
            Variant::StaticAf { grid_points } => {
                if let Some(g) = options.static_af.as_ref().and_then(|o| o.grid_points) {
                    *grid_points = g;
                }
            }
            Variant::SafDelay { max_delay } => {
                if let Some(d) = options.saf_delay.as_ref().and_then(|o| o.max_delay.clone()) {
                    *max_delay = d;
                }
            }
            _ => {}
        }
    }

    problems.extend(spec.problems());
    if problems.is_empty() {
        Ok(spec)
    } else {
        Err(Error::Config(problems))
    }
}

pub fn read_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(p) => Error::Config(
            p.into_iter()
                .map(|m| format!("{}: {m}", path.display()))
                .collect(),
        ),
        other => other,
    })
}

/// Outcome of one (run kind, power level) pair.
#[derive(Debug)]
pub struct RunOutcome {
    pub kind: RunKind,
    pub p_dbm: f64,
    pub dir: PathBuf,
    pub result: Result<RunSummary>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    /// Power levels where the variant throughputs are not nested.
    pub ordering_violations: Vec<String>,
}

impl ExperimentReport {
    pub fn failures(&self) -> impl Iterator<Item = &RunOutcome> {
        self.runs.iter().filter(|r| r.result.is_err())
    }

    pub fn summaries(&self) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter_map(|r| r.result.as_ref().ok())
    }
}

pub fn run_directory(kind: &RunKind, p_dbm: f64) -> String {
    format!("{}_P{}dBm", kind.label(), p_dbm)
}

fn execute(spec: &ExperimentSpec, kind: RunKind, p_dbm: f64) -> RunOutcome {
    let dir = spec.output_dir.join(run_directory(&kind, p_dbm));
    let config = spec.scenario(p_dbm);
    let result = kind.solve(&config).and_then(|r| {
        let summary = RunSummary::new(kind.label(), p_dbm, &r);
        export_run(&dir, &r, &config, &summary)?;
        Ok(summary)
    });
    match &result {
        Ok(s) => log::info!(
            "{} at {p_dbm} dBm: {:.6} bps/Hz, mean delay {:.2} s, {} AO iterations",
            kind.label(),
            s.throughput_bpshz,
            s.mean_delay_s,
            s.ao_iterations
        ),
        Err(e) => log::error!("{} at {p_dbm} dBm failed: {e}", kind.label()),
    }
    RunOutcome {
        kind,
        p_dbm,
        dir,
        result,
    }
}

/// Pairs of labels that must satisfy `throughput(lo) <= throughput(hi)`.
fn nesting_checks(summaries: &[&RunSummary]) -> Vec<String> {
    let rank = |label: &str| match label {
        "static_af" => Some(0),
        "iaf" => Some(1),
        "saf" => Some(3),
        l if l.starts_with("saf_delay") => Some(2),
        _ => None,
    };
    let mut out = Vec::new();
    for lo in summaries {
        for hi in summaries {
            let (Some(a), Some(b)) = (rank(&lo.variant), rank(&hi.variant)) else {
                continue;
            };
            if a < b && lo.throughput_bpshz > hi.throughput_bpshz + ORDERING_SLACK {
                out.push(format!(
                    "{} dBm: {} ({}) exceeds {} ({})",
                    lo.p_dbm, lo.variant, lo.throughput_bpshz, hi.variant, hi.throughput_bpshz
                ));
            }
        }
    }
    out
}

/// Runs every variant at every power level (in parallel), writes one
/// directory per run plus top-level `summary.csv` / `summary.json`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir).map_err(|e| Error::io(&spec.output_dir, e))?;
    let jobs: Vec<(RunKind, f64)> = spec
        .power_levels()
        .into_iter()
        .flat_map(|p| spec.runs().into_iter().map(move |k| (k, p)))
        .collect();
    let runs: Vec<RunOutcome> = jobs
        .into_par_iter()
        .map(|(k, p)| execute(spec, k, p))
        .collect();

    let mut ordering_violations = Vec::new();
    for p in spec.power_levels() {
        let row: Vec<&RunSummary> = runs
            .iter()
            .filter(|r| r.p_dbm == p)
            .filter_map(|r| r.result.as_ref().ok())
            .collect();
        ordering_violations.extend(nesting_checks(&row));
    }
    for v in &ordering_violations {
        log::warn!("throughput ordering violated: {v}");
    }

    let report = ExperimentReport {
        runs,
        ordering_violations,
    };
    write_top_summary(&spec.output_dir, &report)?;
    Ok(report)
}

fn write_top_summary(dir: &Path, report: &ExperimentReport) -> Result<()> {
    let summaries: Vec<&RunSummary> = report.summaries().collect();
    let csv_path = dir.join(TOP_SUMMARY_CSV);
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("{}: {e}", csv_path.display()));
    w.write_record([
        "variant",
        "P_dBm",
        "throughput_bpshz",
        "mean_delay_s",
        "max_delay_s",
        "ao_iterations",
        "converged",
    ])
    .map_err(io_err)?;
    for s in &summaries {
        w.write_record([
            s.variant.clone(),
            format!("{}", s.p_dbm),
            format!("{}", s.throughput_bpshz),
            format!("{}", s.mean_delay_s),
            format!("{}", s.max_delay_s),
            s.ao_iterations.to_string(),
            s.converged.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let json_path = dir.join(TOP_SUMMARY_JSON);
    let text = serde_json::to_string_pretty(&summaries)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", json_path.display())))?;
    std::fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let spec = parse_config("").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        assert_eq!(spec.variants, vec![Variant::Saf]);
        let c = spec.scenario(spec.power_dbm);
        assert_eq!((c.distance, c.altitude, c.period, c.slots), (2000.0, 100.0, 100.0, 400));
        assert_eq!(c.max_speed, 40.0);
        assert_eq!(c.slot_duration(), 0.25);
        assert_eq!(c.solver.ao_tolerance, 0.01);
    }

    #[test]
    fn zero_slots_named_in_error() {
        let Err(Error::Config(p)) = parse_config("slots = 0") else {
            panic!("expected a config error");
        };
        assert!(p.iter().any(|m| m.contains("slots")), "{p:?}");
    }

    #[test]
    fn every_problem_is_listed() {
        let text = "altitude_m = -1.0\nvariants = [\"saf\", \"bogus\"]\n[variant.static_af]\ngrid_points = 1\n";
        let Err(Error::Config(p)) = parse_config(text) else {
            panic!("expected a config error");
        };
        assert!(p.iter().any(|m| m.contains("altitude_m")), "{p:?}");
        assert!(p.iter().any(|m| m.contains("bogus")), "{p:?}");
    }

    #[test]
    fn syntax_error_has_location() {
        let Err(Error::Config(p)) = parse_config("slots = = 3") else {
            panic!("expected a config error");
        };
        assert!(p[0].contains("line 1"), "{p:?}");
        assert!(parse_config("no_such_key = 1").is_err());
    }

    #[test]
    fn sweep_expands_to_energies() {
        let spec = parse_config("sweep_dbm = [5.0, 10.0, 15.0]").unwrap();
        let levels = spec.power_levels();
        assert_eq!(levels, vec![5.0, 10.0, 15.0]);
        for p in levels {
            let c = spec.scenario(p);
            let expected = 400.0 * 10f64.powf(p / 10.0);
            assert!((c.energy_source - expected).abs() < 1e-12 * expected);
            assert_eq!(c.energy_source, c.energy_uav);
        }
    }

    #[test]
    fn variant_sections_apply() {
        let text = r#"
variants = ["static_af", "saf_delay", "iaf"]
endpoints = "fixed"
start_m = [0.0, 0.0]
end_m = [2000.0, 0.0]
[variant.static_af]
grid_points = 11
[variant.saf_delay]
max_delay = [0, 5]
"#;
        let spec = parse_config(text).unwrap();
        assert_eq!(
            spec.runs(),
            vec![
                RunKind::StaticAf { grid_points: 11 },
                RunKind::SafDelay { max_delay: 0 },
                RunKind::SafDelay { max_delay: 5 },
                RunKind::Iaf
            ]
        );
        assert!(matches!(spec.endpoints, Endpoints::Fixed { .. }));
        assert_eq!(parse_config(&spec.render()).unwrap(), spec);
    }
}
