//! Re-checks the first and second laws on a trajectory CSV.

use std::path::Path;

use heomflux_core::currents::{self, ClausiusAudit, FirstLawAudit, Grid, Sample};
use serde::Serialize;

use crate::RunError;

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub rows: usize,
    pub first_law: FirstLawAudit,
    /// Skipped for transient trajectories.
    pub second_law: Option<ClausiusAudit>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.first_law.passed && self.second_law.is_none_or(|s| s.passed)
    }
}

#[derive(Debug, Clone)]
pub struct AuditInput {
    pub grid: Grid,
    pub kind: String,
    pub temperatures: Vec<f64>,
}

impl AuditInput {
    pub fn from_manifest(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| RunError::Config(e.to_string()))?;
        let grid = match v["grid"].as_str() {
            Some("cycle") => Grid::Cycle,
            Some("open") => Grid::Open,
            other => return Err(RunError::Config(format!("manifest grid {other:?}"))),
        };
        let temperatures = v["temperatures"]
            .as_array()
            .ok_or_else(|| RunError::Config("manifest lacks temperatures".into()))?
            .iter()
            .map(|t| {
                t.as_f64()
                    .ok_or_else(|| RunError::Config("bad temperature".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            grid,
            kind: v["kind"].as_str().unwrap_or("steady").to_string(),
            temperatures,
        })
    }
}

fn column(header: &csv::StringRecord, name: &str) -> Result<usize, RunError> {
    header
        .iter()
        .position(|h| h.split_whitespace().next() == Some(name))
        .ok_or_else(|| RunError::Config(format!("trajectory lacks column {name}")))
}

/// Rebuilds samples from the CSV energies and currents.
pub fn read_samples(path: &Path) -> Result<Vec<Sample>, RunError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RunError::Config(e.to_string()))?;
    let header = r
        .headers()
        .map_err(|e| RunError::Config(e.to_string()))?
        .clone();
    let n_baths = header.iter().filter(|h| h.starts_with("Qdot_B_")).count();
    let t = column(&header, "t")?;
    let w = column(&header, "W_dot")?;
    let hs = column(&header, "H_S")?;
    let idx = |stem: &str| -> Result<Vec<usize>, RunError> {
        (1..=n_baths)
            .map(|k| column(&header, &format!("{stem}_{k}")))
            .collect()
    };
    let (qs, qb, hi) = (idx("Qdot_S")?, idx("Qdot_B")?, idx("H_int")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| RunError::Config(e.to_string()))?;
        let f = |i: usize| -> Result<f64, RunError> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| RunError::Config(format!("bad number in column {i}")))
        };
        out.push(Sample {
            t: f(t)?,
            q_s: qs.iter().map(|&i| f(i)).collect::<Result<_, _>>()?,
            q_b: qb.iter().map(|&i| f(i)).collect::<Result<_, _>>()?,
            power: f(w)?,
            h_s: f(hs)?,
            h_int: hi.iter().map(|&i| f(i)).collect::<Result<_, _>>()?,
        });
    }
    Ok(out)
}

pub fn audit_trajectory(
    path: &Path,
    input: &AuditInput,
    tol_first_law: f64,
    tol_second_law: f64,
) -> Result<AuditReport, RunError> {
    let samples = read_samples(path)?;
    if samples.len() < 6 {
        return Err(RunError::Config(format!(
            "{} rows are too few to audit",
            samples.len()
        )));
    }
    let records = currents::records(&samples, input.grid)?;
    let first_law = currents::first_law_audit(&records, tol_first_law);
    let heats = match (input.grid, input.kind.as_str()) {
        (Grid::Cycle, _) => {
            let period = records[records.len() - 1].t - records[0].t;
            Some(currents::cycle_average(&records, period, true)?.q_b)
        }
        (Grid::Open, "steady") => Some(records[records.len() / 2].q_b.clone()),
        _ => None,
    };
    let second_law = heats
        .map(|q| currents::second_law_check(&q, &input.temperatures, tol_second_law))
        .transpose()?;
    Ok(AuditReport {
        rows: samples.len(),
        first_law,
        second_law,
    })
}
