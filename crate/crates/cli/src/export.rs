//! CSV and JSON writers. Column order and headers are fixed.

use std::io::Write;
use std::path::Path;

use aoijam_core::equilibrium::EquilibriumReport;
use aoijam_core::montecarlo::SimResult;
use aoijam_core::AgeSeries;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const SIM_FILE: &str = "sim.csv";
pub const EQUILIBRIUM_FILE: &str = "equilibrium.csv";
pub const DYNAMICS_FILE: &str = "dynamics.csv";
pub const RESULTS_FILE: &str = "results.json";
pub const SCENARIO_FILE: &str = "scenario.json";

fn write_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: Vec<Vec<String>>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn to_file(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| write_err(path, e))?;
    write_rows(file, header, rows).map_err(|e| write_err(path, e))
}

/// One row per user and slot; users 0-indexed, slots 1-indexed.
pub fn trajectory_rows(series: &AgeSeries) -> Vec<Vec<String>> {
    series
        .per_user
        .iter()
        .enumerate()
        .flat_map(|(user, row)| {
            row.iter()
                .enumerate()
                .map(move |(s, age)| vec![user.to_string(), (s + 1).to_string(), age.to_string()])
        })
        .collect()
}

pub fn write_trajectories(path: &Path, series: &AgeSeries) -> Result<()> {
    to_file(
        path,
        &["user", "slot", "expected_age"],
        trajectory_rows(series),
    )
}

pub fn write_sim(path: &Path, result: &SimResult) -> Result<()> {
    let row = vec![
        result.runs.to_string(),
        result.mean_system_age.to_string(),
        result.std_error.to_string(),
        result.seed.to_string(),
    ];
    to_file(path, &["runs", "mean", "std_error", "seed"], vec![row])
}

pub fn write_equilibrium(path: &Path, reports: &[&EquilibriumReport]) -> Result<()> {
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.kind.as_str().to_string(),
                r.holds.map(|h| h.to_string()).unwrap_or_default(),
                r.payoff.map(|p| p.to_string()).unwrap_or_default(),
                r.witness
                    .as_ref()
                    .map(|w| serde_json::to_string(w).expect("witness serializes"))
                    .unwrap_or_default(),
            ]
        })
        .collect();
    to_file(path, &["kind", "holds", "payoff", "witness"], rows)
}

pub fn write_dynamics(path: &Path, report: &EquilibriumReport) -> Result<()> {
    let rows = report
        .trace
        .iter()
        .map(|e| {
            vec![
                e.iteration.to_string(),
                e.blocked_user.to_string(),
                serde_json::to_string(&e.policy).expect("vector serializes"),
                e.payoff.to_string(),
            ]
        })
        .collect();
    to_file(
        path,
        &["iteration", "blocked_user", "p_vector", "payoff"],
        rows,
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| write_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| write_err(path, e))
}
