//! A single run: build the model, propagate, evaluate currents, audit.

use heomflux_core::bath::auto_pade_terms;
use heomflux_core::currents::{
    self, ClausiusAudit, CycleIntegrals, Efficiencies, FirstLawAudit, Grid,
};
use heomflux_core::hierarchy::{
    propagate_periodic, propagate_to_steady, propagate_transient, AndersonOptions, HeomOperator,
    HierarchyConfig, HierarchyState, PeriodicOptions, Snapshot, SteadyOptions, TransientOptions,
};
use heomflux_core::models::{self, decomposition_fingerprint, model_fingerprint, to_hex};
use heomflux_core::{
    BathSpec, CMatrix, Complex64, CurrentRecord, NoiseDecomposition, Sample, SystemModel,
};
use serde::Serialize;

use crate::analysis;
use crate::config::{ModelConfig, RunConfig, RunKind};
use crate::RunError;

/// Model, decompositions and hierarchy settings resolved from a config.
pub struct Prepared {
    pub model: SystemModel,
    pub decompositions: Vec<NoiseDecomposition>,
    pub baths: [BathSpec; 2],
    pub pade_terms: Vec<usize>,
    pub hierarchy: HierarchyConfig,
    pub rho0: CMatrix,
}

pub fn resolve_pade_terms(cfg: &RunConfig) -> Result<Vec<usize>, RunError> {
    if let Some(j) = &cfg.decomposition.pade_terms {
        return Ok(j.clone());
    }
    cfg.model
        .baths(&[0, 0])
        .iter()
        .map(|b| {
            auto_pade_terms(
                b,
                cfg.decomposition.tol_decomp,
                cfg.decomposition.max_pade_terms,
            )
            .map(|(d, _)| d.terms().len() - 1)
            .map_err(RunError::from)
        })
        .collect()
}

pub fn prepare(cfg: &RunConfig, threads: usize) -> Result<Prepared, RunError> {
    cfg.validate()?;
    let pade_terms = resolve_pade_terms(cfg)?;
    let baths = cfg.model.baths(&pade_terms);
    let (model, decompositions) = match &cfg.model {
        ModelConfig::SpinBoson(m) => {
            models::build_spin_boson(&ModelConfig::spin_boson_params(m, baths))?
        }
        ModelConfig::ThreeLevelEngine(m) => {
            models::build_three_level(&ModelConfig::engine_params(m, baths))?
        }
    };
    let h = &cfg.hierarchy;
    let hierarchy = HierarchyConfig {
        depth: h.depth,
        bath_caps: h.bath_caps.iter().map(|c| c.limit()).collect(),
        pade_cap: h.pade_cap,
        max_ados: h.max_ados,
        threads: threads.max(1),
    };
    let dim = model.dim();
    let rho0 = match cfg.model.initial_populations() {
        Some(pops) => {
            let mut m = CMatrix::zeros(dim, dim);
            for (i, &x) in pops.iter().enumerate() {
                m[(i, i)] = Complex64::new(x, 0.0);
            }
            m
        }
        None => CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
    };
    Ok(Prepared {
        model,
        decompositions,
        baths,
        pade_terms,
        hierarchy,
        rho0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub depth: usize,
    pub pade_terms: Vec<usize>,
    pub dt_used: f64,
    pub ados: usize,
    pub model_fingerprint: String,
    pub decomposition_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Propagated time until convergence.
    pub elapsed: f64,
    /// Steady-state windows or drive cycles used.
    pub iterations: usize,
    pub final_residual: f64,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
}

/// Instantaneous currents at one representative record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Currents {
    pub t: f64,
    pub q_s: Vec<f64>,
    pub q_b: Vec<f64>,
    pub power: f64,
    pub h_int: Vec<f64>,
    pub casbi: Vec<f64>,
}

impl Currents {
    fn from_record(r: &CurrentRecord) -> Self {
        Self {
            t: r.t,
            q_s: r.q_s.clone(),
            q_b: r.q_b.clone(),
            power: r.power,
            h_int: r.h_int.clone(),
            casbi: r.casbi.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleSummary {
    pub integrals: CycleIntegrals,
    pub efficiencies: Efficiencies,
    /// Dominant non-zero harmonic (in units of Ω) of Q̇_S^1, Q̇_S^2 and Ẇ.
    pub dominant_harmonic: [Option<usize>; 3],
    /// Delay from a drive maximum to the next minimum of Q̇_S^1's 2Ω component.
    pub lag_q_s1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditOutcome {
    pub first_law: Option<FirstLawAudit>,
    pub second_law: Option<ClausiusAudit>,
}

impl AuditOutcome {
    pub fn passed(&self) -> bool {
        self.first_law.is_none_or(|a| a.passed) && self.second_law.is_none_or(|a| a.passed)
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(a) = &self.first_law {
            parts.push(format!(
                "first law {} (max residual {:.3e}, bound {:.3e})",
                if a.passed { "ok" } else { "VIOLATED" },
                a.max_residual,
                (a.relative_tolerance * a.scale).max(a.rounding_floor)
            ));
        }
        if let Some(a) = &self.second_law {
            parts.push(format!(
                "second law {} (-sum Q/T = {:.3e}, tolerance {:.1e})",
                if a.passed { "ok" } else { "VIOLATED" },
                a.value,
                a.tolerance
            ));
        }
        parts.join("; ")
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub rho: Vec<CMatrix>,
    pub records: Vec<CurrentRecord>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: RunKind,
    pub resolution: Resolution,
    pub diagnostics: Diagnostics,
    pub trajectory: Trajectory,
    /// Steady and transient runs.
    pub currents: Option<Currents>,
    /// Periodic runs.
    pub cycle: Option<CycleSummary>,
    pub audit: AuditOutcome,
    pub temperatures: Vec<f64>,
    pub drive_frequency: Option<f64>,
    /// Final hierarchy state, for restarts and initial-condition checks.
    pub final_state: HierarchyState,
}

impl Outcome {
    /// Target observables for convergence ladders and robustness checks.
    pub fn observables(&self) -> Vec<f64> {
        match (&self.currents, &self.cycle) {
            (_, Some(c)) => {
                let mut v = vec![c.integrals.work];
                v.extend(&c.integrals.q_s);
                v.extend(&c.integrals.q_b);
                v
            }
            (Some(c), None) => {
                let mut v = c.q_s.clone();
                v.extend(&c.q_b);
                v
            }
            (None, None) => Vec::new(),
        }
    }
}

fn samples_of(snaps: &[Snapshot], p: &Prepared) -> Result<Vec<Sample>, RunError> {
    snaps
        .iter()
        .map(|s| currents::sample(s, &p.model, &p.decompositions).map_err(RunError::from))
        .collect()
}

fn snapshot_diagnostics(snaps: &[Snapshot]) -> (f64, f64) {
    snaps.iter().fold((0.0f64, 0.0f64), |(tr, herm), s| {
        let trace: Complex64 = s.rho0.trace();
        (
            tr.max((trace - Complex64::new(1.0, 0.0)).norm()),
            herm.max(heomflux_core::system::hermiticity_deviation(&s.rho0)),
        )
    })
}

fn audits(
    cfg: &RunConfig,
    records: &[CurrentRecord],
    heats: Option<&[f64]>,
) -> Result<AuditOutcome, RunError> {
    let temps = cfg.model.temperatures();
    Ok(AuditOutcome {
        first_law: cfg
            .audit
            .first_law
            .then(|| currents::first_law_audit(records, cfg.audit.tol_first_law)),
        second_law: match heats {
            Some(q) if cfg.audit.second_law => Some(currents::second_law_check(
                q,
                &temps,
                cfg.audit.tol_second_law,
            )?),
            _ => None,
        },
    })
}

/// Runs one configuration at its stated depth and Padé counts.
pub fn execute(cfg: &RunConfig, threads: usize) -> Result<Outcome, RunError> {
    let p = prepare(cfg, threads)?;
    execute_prepared(cfg, &p, None)
}

/// Like [`execute`], starting from `initial` instead of the factorized state.
pub fn execute_prepared(
    cfg: &RunConfig,
    p: &Prepared,
    initial: Option<HierarchyState>,
) -> Result<Outcome, RunError> {
    let op = HeomOperator::new(p.model.clone(), p.decompositions.clone(), &p.hierarchy)?;
    let start = match initial {
        Some(s) => s,
        None => op.initial_state(&p.rho0)?,
    };
    let h = &cfg.hierarchy;
    let anderson = AndersonOptions::default();
    let mut resolution = Resolution {
        depth: h.depth,
        pade_terms: p.pade_terms.clone(),
        dt_used: h.dt,
        ados: op.table().len(),
        model_fingerprint: to_hex(&model_fingerprint(&p.model)),
        decomposition_fingerprint: to_hex(&decomposition_fingerprint(&p.decompositions)),
    };
    let temperatures = cfg.model.temperatures();
    let drive_frequency = p.model.drive().map(|d| d.frequency);

    match cfg.run.kind {
        RunKind::Steady => {
            let opts = SteadyOptions {
                dt: h.dt,
                tol: h.tol,
                obs_tol: h.obs_tol,
                t_max: h.t_max,
                window: h.window,
                anderson,
            };
            let mut observe =
                |s: &HierarchyState| match currents::sample(s, &p.model, &p.decompositions) {
                    Ok(x) => x.q_s.iter().chain(&x.q_b).copied().collect(),
                    Err(_) => vec![f64::NAN],
                };
            let (state, report) = propagate_to_steady(&op, start, &opts, &mut observe)?;
            resolution.dt_used = report.dt_used;
            let (final_state, snaps) = propagate_transient(
                &op,
                state,
                &TransientOptions {
                    dt: report.dt_used,
                    duration: h.record_span,
                    sample_every: h.sample_every,
                },
            )?;
            let samples = samples_of(&snaps, p)?;
            let records = currents::records(&samples, Grid::Open)?;
            let mid = Currents::from_record(&records[records.len() / 2]);
            let audit = audits(cfg, &records, Some(&mid.q_b))?;
            let (tr, herm) = snapshot_diagnostics(&snaps);
            Ok(Outcome {
                kind: RunKind::Steady,
                resolution,
                diagnostics: Diagnostics {
                    elapsed: report.elapsed,
                    iterations: report.windows,
                    final_residual: report.residual_history.last().copied().unwrap_or(0.0),
                    max_trace_deviation: report.max_trace_deviation.max(tr),
                    max_hermiticity_deviation: report
                        .max_hermiticity_deviation
                        .max(herm)
                        .max(final_state.max_hermiticity_deviation()),
                },
                trajectory: Trajectory {
                    grid: Grid::Open,
                    rho: snaps.iter().map(|s| s.rho0.clone()).collect(),
                    records,
                },
                currents: Some(mid),
                cycle: None,
                audit,
                temperatures,
                drive_frequency,
                final_state,
            })
        }
        RunKind::Periodic => {
            let opts = PeriodicOptions {
                dt: h.dt,
                tol: h.tol,
                obs_tol: h.obs_tol,
                max_cycles: h.max_cycles,
                samples_per_cycle: h.samples_per_cycle,
                anderson,
            };
            let mut observe = |snaps: &[Snapshot]| -> Vec<f64> {
                let Ok(samples) = samples_of(snaps, p) else {
                    return vec![f64::NAN];
                };
                let n = samples.len();
                let trap = |f: &dyn Fn(&Sample) -> f64| {
                    0.5 * (f(&samples[0]) + f(&samples[n - 1]))
                        + samples[1..n - 1].iter().map(f).sum::<f64>()
                };
                let mut v = vec![trap(&|s| s.power)];
                for k in 0..2 {
                    v.push(trap(&|s| s.q_s[k]));
                    v.push(trap(&|s| s.q_b[k]));
                }
                let dt = (samples[n - 1].t - samples[0].t) / (n - 1) as f64;
                v.iter().map(|x| x * dt).collect()
            };
            let tr = propagate_periodic(&op, start, &opts, &mut observe)?;
            resolution.dt_used = tr.dt_used;
            let samples = samples_of(&tr.samples, p)?;
            let records = currents::records(&samples, Grid::Cycle)?;
            let integrals = currents::cycle_average(&records, tr.period, true)?;
            let efficiencies = currents::efficiencies(&integrals);
            let times: Vec<f64> = records.iter().map(|r| r.t).collect();
            let om = drive_frequency.expect("periodic runs are driven");
            let series =
                |f: &dyn Fn(&CurrentRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
            let qs1 = series(&|r| r.q_s[0]);
            let cycle = CycleSummary {
                dominant_harmonic: [
                    analysis::dominant_harmonic(&times, &qs1, om),
                    analysis::dominant_harmonic(&times, &series(&|r| r.q_s[1]), om),
                    analysis::dominant_harmonic(&times, &series(&|r| r.power), om),
                ],
                lag_q_s1: analysis::lag_to_second_harmonic_minimum(&times, &qs1, om),
                integrals,
                efficiencies,
            };
            let audit = audits(cfg, &records, Some(&cycle.integrals.q_b))?;
            let (trd, herm) = snapshot_diagnostics(&tr.samples);
            let final_state = tr.cycle_start;
            Ok(Outcome {
                kind: RunKind::Periodic,
                resolution,
                diagnostics: Diagnostics {
                    elapsed: tr.cycles as f64 * tr.period,
                    iterations: tr.cycles,
                    final_residual: tr.residual_history.last().copied().unwrap_or(0.0),
                    max_trace_deviation: tr.max_trace_deviation.max(trd),
                    max_hermiticity_deviation: tr.max_hermiticity_deviation.max(herm),
                },
                trajectory: Trajectory {
                    grid: Grid::Cycle,
                    rho: tr.samples.iter().map(|s| s.rho0.clone()).collect(),
                    records,
                },
                currents: None,
                cycle: Some(cycle),
                audit,
                temperatures,
                drive_frequency,
                final_state,
            })
        }
        RunKind::Transient => {
            let (final_state, snaps) = propagate_transient(
                &op,
                start,
                &TransientOptions {
                    dt: h.dt,
                    duration: cfg.run.duration,
                    sample_every: h.sample_every,
                },
            )?;
            resolution.dt_used = heomflux_core::hierarchy::propagate::stable_dt(&op, h.dt);
            let samples = samples_of(&snaps, p)?;
            let records = currents::records(&samples, Grid::Open)?;
            let last = Currents::from_record(records.last().expect("at least one record"));
            let audit = audits(cfg, &records, None)?;
            let (tr, herm) = snapshot_diagnostics(&snaps);
            Ok(Outcome {
                kind: RunKind::Transient,
                resolution,
                diagnostics: Diagnostics {
                    elapsed: cfg.run.duration,
                    iterations: snaps.len() - 1,
                    final_residual: f64::NAN,
                    max_trace_deviation: tr,
                    max_hermiticity_deviation: herm.max(final_state.max_hermiticity_deviation()),
                },
                trajectory: Trajectory {
                    grid: Grid::Open,
                    rho: snaps.iter().map(|s| s.rho0.clone()).collect(),
                    records,
                },
                currents: Some(last),
                cycle: None,
                audit,
                temperatures,
                drive_frequency,
                final_state,
            })
        }
    }
}
