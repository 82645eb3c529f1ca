//! Trajectory CSV, summary CSV and JSON manifest.
//!
//! Units: ħ = k_B = 1, energies in ħω_ref, time in 1/ω_ref, currents in
//! ħω_ref². Heat currents are positive when energy leaves bath k; Ẇ is
//! positive when work is done on the system.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::converge::Ladder;
use crate::runner::{AuditOutcome, Diagnostics, Outcome, Resolution};
use crate::sweep::SweepOutcome;
use crate::RunError;

pub const TRAJECTORY_SUFFIX: &str = ".trajectory.csv";
pub const SUMMARY_SUFFIX: &str = ".summary.csv";
pub const MANIFEST_SUFFIX: &str = ".manifest.json";

pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.to_toml().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn artifact(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

fn ensure_parent(path: &Path) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> RunError {
    RunError::Io(e.to_string())
}

fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn trajectory_header(dim: usize, n_baths: usize) -> Vec<String> {
    let mut h = vec!["t [1/w_ref]".to_string()];
    h.extend((0..dim).map(|i| format!("pop_{i}")));
    for i in 0..dim {
        for j in i + 1..dim {
            h.push(format!("re_rho_{i}{j}"));
            h.push(format!("im_rho_{i}{j}"));
        }
    }
    h.extend((1..=n_baths).map(|k| format!("Qdot_S_{k} [hbar w_ref^2; >0 leaves bath {k}]")));
    h.extend((1..=n_baths).map(|k| format!("Qdot_B_{k} [hbar w_ref^2; >0 leaves bath {k}]")));
    h.push("W_dot [hbar w_ref^2; >0 work on system]".into());
    h.push("H_S [hbar w_ref]".into());
    h.extend((1..=n_baths).map(|k| format!("H_int_{k} [hbar w_ref]")));
    h.extend((1..=n_baths).map(|k| format!("casbi_{k} [hbar w_ref^2]")));
    h.push("first_law_residual [hbar w_ref^2]".into());
    h
}

pub fn write_trajectory(path: &Path, out: &Outcome) -> Result<(), RunError> {
    ensure_parent(path)?;
    let dim = out.trajectory.rho.first().map_or(0, |r| r.nrows());
    let n_baths = out.temperatures.len();
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(trajectory_header(dim, n_baths))
        .map_err(csv_err)?;
    for (rho, r) in out.trajectory.rho.iter().zip(&out.trajectory.records) {
        let mut row = vec![num(r.t)];
        row.extend((0..dim).map(|i| num(rho[(i, i)].re)));
        for i in 0..dim {
            for j in i + 1..dim {
                row.push(num(rho[(i, j)].re));
                row.push(num(rho[(i, j)].im));
            }
        }
        row.extend(r.q_s.iter().map(|&x| num(x)));
        row.extend(r.q_b.iter().map(|&x| num(x)));
        row.push(num(r.power));
        row.push(num(r.h_s));
        row.extend(r.h_int.iter().map(|&x| num(x)));
        row.extend(r.casbi.iter().map(|&x| num(x)));
        row.push(num(r.first_law_residual));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary columns of one run; `point` labels the sweep value.
pub fn summary_columns(point: Option<(&str, f64)>, out: &Outcome) -> Vec<(String, String)> {
    let mut c: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| c.push((k.to_string(), v));
    if let Some((name, v)) = point {
        put("parameter", name.to_string());
        put("value", num(v));
    }
    put("kind", out.kind.as_str().to_string());
    put("depth", out.resolution.depth.to_string());
    for (k, j) in out.resolution.pade_terms.iter().enumerate() {
        put(&format!("pade_terms_{}", k + 1), j.to_string());
    }
    put("ados", out.resolution.ados.to_string());
    put("dt", num(out.resolution.dt_used));
    if let Some(cur) = &out.currents {
        put("t", num(cur.t));
        for (k, x) in cur.q_s.iter().enumerate() {
            put(&format!("Qdot_S_{}", k + 1), num(*x));
        }
        for (k, x) in cur.q_b.iter().enumerate() {
            put(&format!("Qdot_B_{}", k + 1), num(*x));
        }
        put("W_dot", num(cur.power));
        for (k, x) in cur.h_int.iter().enumerate() {
            put(&format!("H_int_{}", k + 1), num(*x));
        }
        for (k, x) in cur.casbi.iter().enumerate() {
            put(&format!("casbi_{}", k + 1), num(*x));
        }
    }
    if let Some(cy) = &out.cycle {
        put("period", num(cy.integrals.period));
        put("W_cyc", num(cy.integrals.work));
        for (k, x) in cy.integrals.q_s.iter().enumerate() {
            put(&format!("Q_S_cyc_{}", k + 1), num(*x));
        }
        for (k, x) in cy.integrals.q_b.iter().enumerate() {
            put(&format!("Q_B_cyc_{}", k + 1), num(*x));
        }
        put("eps_S", opt(cy.efficiencies.system));
        put("eps_B", opt(cy.efficiencies.bath));
        let h = |x: Option<usize>| x.map(|h| h.to_string()).unwrap_or_default();
        put("harmonic_Qdot_S_1", h(cy.dominant_harmonic[0]));
        put("harmonic_Qdot_S_2", h(cy.dominant_harmonic[1]));
        put("harmonic_W_dot", h(cy.dominant_harmonic[2]));
        put("lag_Qdot_S_1", num(cy.lag_q_s1));
    }
    audit_columns(&mut c, &out.audit);
    let d = &out.diagnostics;
    c.push(("max_trace_deviation".into(), num(d.max_trace_deviation)));
    c.push((
        "max_hermiticity_deviation".into(),
        num(d.max_hermiticity_deviation),
    ));
    c.push(("iterations".into(), d.iterations.to_string()));
    c
}

fn audit_columns(c: &mut Vec<(String, String)>, a: &AuditOutcome) {
    if let Some(f) = &a.first_law {
        c.push(("first_law_max_residual".into(), num(f.max_residual)));
        c.push(("first_law_scale".into(), num(f.scale)));
        c.push(("first_law_ok".into(), f.passed.to_string()));
    }
    if let Some(s) = &a.second_law {
        c.push(("clausius".into(), num(s.value)));
        c.push(("second_law_ok".into(), s.passed.to_string()));
    }
}

pub fn write_summary(path: &Path, rows: &[Vec<(String, String)>]) -> Result<(), RunError> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| k))
            .map_err(csv_err)?;
    }
    for row in rows {
        w.write_record(row.iter().map(|(_, v)| v))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct PointRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub resolution: &'a Resolution,
    pub diagnostics: &'a Diagnostics,
    pub audit: &'a AuditOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<&'a Ladder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
}

#[derive(Serialize)]
pub struct Failure<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<&'a Ladder>,
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub threads: usize,
    pub model: &'static str,
    pub kind: &'static str,
    /// "open" or "cycle": how trajectory rows are spaced.
    pub grid: &'static str,
    pub temperatures: Vec<f64>,
    pub points: Vec<PointRecord<'a>>,
    pub failures: Vec<Failure<'a>>,
    pub summary: String,
}

impl<'a> Manifest<'a> {
    pub fn new(cfg: &'a RunConfig, threads: usize, summary: &Path) -> Self {
        Self {
            tool: "heomflux",
            version: env!("CARGO_PKG_VERSION"),
            config_hash: config_hash(cfg),
            config: cfg,
            threads,
            model: cfg.model.name(),
            kind: cfg.run.kind.as_str(),
            grid: match cfg.run.kind {
                crate::RunKind::Periodic => "cycle",
                _ => "open",
            },
            temperatures: cfg.model.temperatures(),
            points: Vec::new(),
            failures: Vec::new(),
            summary: summary.display().to_string(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        ensure_parent(path)?;
        let text = serde_json::to_string_pretty(self).map_err(|e| RunError::Io(e.to_string()))?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Files written by one run or sweep.
pub struct Written {
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub trajectories: Vec<PathBuf>,
}

pub fn write_run(
    cfg: &RunConfig,
    threads: usize,
    ladder: Option<&Ladder>,
    out: &Outcome,
) -> Result<Written, RunError> {
    let prefix = &cfg.output.prefix;
    let summary = artifact(prefix, SUMMARY_SUFFIX);
    let manifest_path = artifact(prefix, MANIFEST_SUFFIX);
    let mut trajectories = Vec::new();
    if cfg.output.trajectory {
        let p = artifact(prefix, TRAJECTORY_SUFFIX);
        write_trajectory(&p, out)?;
        trajectories.push(p);
    }
    write_summary(&summary, &[summary_columns(None, out)])?;
    let mut m = Manifest::new(cfg, threads, &summary);
    m.points.push(PointRecord {
        value: None,
        resolution: &out.resolution,
        diagnostics: &out.diagnostics,
        audit: &out.audit,
        ladder,
        trajectory: trajectories.first().map(|p| p.display().to_string()),
    });
    m.write(&manifest_path)?;
    Ok(Written {
        summary,
        manifest: manifest_path,
        trajectories,
    })
}

pub fn write_sweep(
    cfg: &RunConfig,
    threads: usize,
    sw: &SweepOutcome,
) -> Result<Written, RunError> {
    let prefix = &cfg.output.prefix;
    let summary = artifact(prefix, SUMMARY_SUFFIX);
    let manifest_path = artifact(prefix, MANIFEST_SUFFIX);
    let mut rows = Vec::new();
    let mut trajectories = Vec::new();
    let mut m = Manifest::new(cfg, threads, &summary);
    for (i, p) in sw.points.iter().enumerate() {
        match &p.outcome {
            Ok(out) => {
                let traj = if cfg.output.trajectory {
                    let path = artifact(&format!("{prefix}.p{i:03}"), TRAJECTORY_SUFFIX);
                    write_trajectory(&path, out)?;
                    trajectories.push(path.clone());
                    Some(path.display().to_string())
                } else {
                    None
                };
                rows.push(summary_columns(Some((&sw.parameter, p.value)), out));
                m.points.push(PointRecord {
                    value: Some(p.value),
                    resolution: &out.resolution,
                    diagnostics: &out.diagnostics,
                    audit: &out.audit,
                    ladder: p.ladder.as_ref(),
                    trajectory: traj,
                });
            }
            Err(e) => m.failures.push(Failure {
                value: Some(p.value),
                error: e.to_string(),
                ladder: p.ladder.as_ref(),
            }),
        }
    }
    write_summary(&summary, &rows)?;
    m.write(&manifest_path)?;
    Ok(Written {
        summary,
        manifest: manifest_path,
        trajectories,
    })
}

/// Manifest that sits next to a trajectory written by [`write_run`] or
/// [`write_sweep`].
pub fn manifest_for_trajectory(path: &Path) -> Option<PathBuf> {
    let s = path.to_str()?;
    let stem = s.strip_suffix(TRAJECTORY_SUFFIX)?;
    let stem = match stem.rsplit_once(".p") {
        Some((head, tail)) if tail.len() == 3 && tail.bytes().all(|b| b.is_ascii_digit()) => head,
        _ => stem,
    };
    Some(PathBuf::from(format!("{stem}{MANIFEST_SUFFIX}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_path_strips_point_suffix() {
        assert_eq!(
            manifest_for_trajectory(Path::new("out/a.trajectory.csv")),
            Some(PathBuf::from("out/a.manifest.json"))
        );
        assert_eq!(
            manifest_for_trajectory(Path::new("out/a.p007.trajectory.csv")),
            Some(PathBuf::from("out/a.manifest.json"))
        );
        assert_eq!(manifest_for_trajectory(Path::new("out/a.csv")), None);
    }

    #[test]
    fn header_lists_every_column_once() {
        let h = trajectory_header(3, 2);
        assert_eq!(h.len(), 1 + 3 + 6 + 2 + 2 + 1 + 1 + 2 + 2 + 1);
        assert!(h[0].starts_with("t "));
        assert!(h.iter().any(|c| c.starts_with("W_dot")));
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::for_preset("spin-boson").unwrap();
        let b = a.with_value("model.s_x", 0.5).unwrap();
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
