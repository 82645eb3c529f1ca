//! Parameter sweeps: independent runs over a value grid.

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::converge::{converge, Ladder};
use crate::runner::{execute, Outcome};
use crate::RunError;

pub struct PointResult {
    pub value: f64,
    pub config: RunConfig,
    pub ladder: Option<Ladder>,
    pub outcome: Result<Outcome, RunError>,
}

pub struct SweepOutcome {
    pub parameter: String,
    pub points: Vec<PointResult>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }
}

/// One run, through the convergence ladder when it is enabled.
pub fn run_point(cfg: &RunConfig, threads: usize) -> (Option<Ladder>, Result<Outcome, RunError>) {
    if cfg.convergence.enabled {
        let (ladder, out) = converge(cfg, threads);
        (Some(ladder), out)
    } else {
        (None, execute(cfg, threads))
    }
}

/// Runs every grid value in grid order. With more than one thread the
/// points run concurrently, each single-threaded.
pub fn sweep(cfg: &RunConfig, threads: usize) -> Result<SweepOutcome, RunError> {
    cfg.validate()?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Config("no [sweep] section".into()))?;
    let configs = spec
        .values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            c.sweep = None;
            for path in spec.paths() {
                c = c.with_value(path, v)?;
            }
            c.validate()?;
            Ok((v, c))
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let run = |(value, config): (f64, RunConfig), inner: usize| {
        let (ladder, outcome) = run_point(&config, inner);
        PointResult {
            value,
            config,
            ladder,
            outcome,
        }
    };
    let points = if threads > 1 && configs.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
        pool.install(|| configs.into_par_iter().map(|c| run(c, 1)).collect())
    } else {
        configs.into_iter().map(|c| run(c, threads)).collect()
    };
    Ok(SweepOutcome {
        parameter: spec.parameter.clone(),
        points,
    })
}
