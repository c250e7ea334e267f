//! CSV and JSON result files.
//!
//! Slot indices in files are 1-based. Numbers use the shortest decimal
//! representation that round-trips to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{compute_gains, pair_rate};
use crate::error::{Error, Result};
use crate::optimizer::{SolveResult, Status};
use crate::pairing::Pairing;
use crate::power::PowerProfile;
use crate::scenario::{ScenarioConfig, Trajectory, Waypoint};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const PAIRING_FILE: &str = "pairing.csv";
pub const POWERS_FILE: &str = "powers.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const TRAJECTORY_HEADER: [&str; 3] = ["slot", "x_m", "y_m"];
pub const PAIRING_HEADER: [&str; 4] = ["recv_slot", "send_slot", "rate_bpshz", "delay_slots"];
pub const POWERS_HEADER: [&str; 3] = ["slot", "P_s", "P_u"];

/// One run's headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: String,
    #[serde(rename = "P_dBm")]
    pub p_dbm: f64,
    pub throughput_bpshz: f64,
    pub mean_delay_s: f64,
    pub max_delay_s: f64,
    pub ao_iterations: usize,
    pub converged: bool,
}

impl RunSummary {
    pub fn new(variant: impl Into<String>, p_dbm: f64, result: &SolveResult) -> Self {
        Self {
            variant: variant.into(),
            p_dbm,
            throughput_bpshz: result.objective(),
            mean_delay_s: result.delay_stats.mean_s,
            max_delay_s: result.delay_stats.max_s,
            ao_iterations: result.iterations,
            converged: result.status == Status::Converged,
        }
    }
}

/// `f64` formatted as plain decimal (never exponent form).
fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("{}: {other:?}", path.display())),
    }
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let rows = traj
        .waypoints
        .iter()
        .enumerate()
        .map(|(k, p)| vec![(k + 1).to_string(), num(p.x), num(p.y)]);
    write_rows(path, &TRAJECTORY_HEADER, rows)
}

/// Pair rates are evaluated at the result's powers and trajectory.
pub fn write_pairing_csv(path: &Path, result: &SolveResult, config: &ScenarioConfig) -> Result<()> {
    let gains = compute_gains(config, &result.trajectory);
    let rows = result.pairing.pairs.iter().map(|&(i, j)| {
        vec![
            (i + 1).to_string(),
            (j + 1).to_string(),
            num(pair_rate(&gains, &result.powers, i, j)),
            (j - i).to_string(),
        ]
    });
    write_rows(path, &PAIRING_HEADER, rows)
}

pub fn write_powers_csv(path: &Path, powers: &PowerProfile) -> Result<()> {
    let rows = (0..powers.len())
        .map(|k| vec![(k + 1).to_string(), num(powers.source[k]), num(powers.uav[k])]);
    write_rows(path, &POWERS_HEADER, rows)
}

pub fn write_summary_json(path: &Path, summary: &RunSummary) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the four files of one run into `dir` (created if missing) and
/// returns their paths.
pub fn export_run(
    dir: &Path,
    result: &SolveResult,
    config: &ScenarioConfig,
    summary: &RunSummary,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = [TRAJECTORY_FILE, PAIRING_FILE, POWERS_FILE, SUMMARY_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_trajectory_csv(&paths[0], &result.trajectory)?;
    write_pairing_csv(&paths[1], result, config)?;
    write_powers_csv(&paths[2], &result.powers)?;
    write_summary_json(&paths[3], summary)?;
    Ok(paths)
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let found = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "{}: expected header {}, found {}",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn zero_based(slot: usize, path: &Path) -> Result<usize> {
    slot.checked_sub(1)
        .ok_or_else(|| Error::InvalidArgument(format!("{}: slot numbers start at 1", path.display())))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let rows: Vec<(usize, f64, f64)> = read_rows(path, &TRAJECTORY_HEADER)?;
    let mut waypoints = Vec::with_capacity(rows.len());
    for (k, (slot, x, y)) in rows.into_iter().enumerate() {
        if zero_based(slot, path)? != k {
            return Err(Error::InvalidArgument(format!(
                "{}: row {} has slot {slot}",
                path.display(),
                k + 1
            )));
        }
        waypoints.push(Waypoint::new(x, y));
    }
    Ok(Trajectory::new(waypoints))
}

/// Pairs with the stored per-pair rate.
pub fn read_pairing_csv(path: &Path) -> Result<(Pairing, Vec<f64>)> {
    let rows: Vec<(usize, usize, f64, usize)> = read_rows(path, &PAIRING_HEADER)?;
    let mut pairs = Vec::with_capacity(rows.len());
    let mut rates = Vec::with_capacity(rows.len());
    for (i, j, rate, delay) in rows {
        let (i, j) = (zero_based(i, path)?, zero_based(j, path)?);
        if j < i || j - i != delay {
            return Err(Error::InvalidArgument(format!(
                "{}: inconsistent pair ({}, {}) with delay {delay}",
                path.display(),
                i + 1,
                j + 1
            )));
        }
        pairs.push((i, j));
        rates.push(rate);
    }
    Ok((Pairing::new(pairs), rates))
}

pub fn read_powers_csv(path: &Path) -> Result<PowerProfile> {
    let rows: Vec<(usize, f64, f64)> = read_rows(path, &POWERS_HEADER)?;
    let mut powers = PowerProfile::zeros(rows.len());
    for (k, (slot, ps, pu)) in rows.into_iter().enumerate() {
        if zero_based(slot, path)? != k {
            return Err(Error::InvalidArgument(format!(
                "{}: row {} has slot {slot}",
                path.display(),
                k + 1
            )));
        }
        powers.source[k] = ps;
        powers.uav[k] = pu;
    }
    Ok(powers)
}

pub fn read_summary_json(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::{solve_iaf, solve_saf};

    #[test]
    fn decimal_formatting_round_trips() {
        for v in [0.1, 1e-7, 123456.789, 1.0 / 3.0, 2000.0, -0.0] {
            let s = num(v);
            assert!(!s.contains('e') && !s.contains(','), "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn files_have_headers_and_rows() {
        let config = ScenarioConfig::default().with_slots(2);
        let result = solve_iaf(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = RunSummary::new("iaf", 15.0, &result);
        let paths = export_run(dir.path(), &result, &config, &summary).unwrap();

        let traj = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(traj.lines().count(), 3);
        assert!(traj.starts_with("slot,x_m,y_m\n"));
        assert!(!traj.contains('\r'));

        let pairing = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(pairing.starts_with("recv_slot,send_slot,rate_bpshz,delay_slots\n"));
        assert!(pairing.lines().skip(1).all(|l| l.ends_with(",0")));

        let powers = std::fs::read_to_string(&paths[2]).unwrap();
        assert!(powers.starts_with("slot,P_s,P_u\n"));

        assert_eq!(read_trajectory_csv(&paths[0]).unwrap(), result.trajectory);
        assert_eq!(read_powers_csv(&paths[2]).unwrap(), result.powers);
        assert_eq!(read_pairing_csv(&paths[1]).unwrap().0, result.pairing);
        assert_eq!(read_summary_json(&paths[3]).unwrap(), summary);
    }

    #[test]
    fn summary_keys() {
        let config = ScenarioConfig::default().with_slots(3);
        let result = solve_saf(&config).unwrap();
        let json = serde_json::to_value(RunSummary::new("saf", 15.0, &result)).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        for k in [
            "variant",
            "P_dBm",
            "throughput_bpshz",
            "mean_delay_s",
            "max_delay_s",
            "ao_iterations",
            "converged",
        ] {
            assert!(keys.contains(&k), "{k}");
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "slot,x,y\n1,0,0\n").unwrap();
        assert!(read_trajectory_csv(&path).is_err());
    }
}
