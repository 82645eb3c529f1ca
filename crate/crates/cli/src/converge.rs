//! Convergence ladder over hierarchy depth and Padé term counts.

use heomflux_core::bath::pade_decompose;
use serde::Serialize;

use crate::config::RunConfig;
use crate::runner::{execute, resolve_pade_terms, Outcome};
use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rung {
    pub depth: usize,
    pub pade_terms: Vec<usize>,
    pub ados: usize,
    pub dt_used: f64,
    pub observables: Vec<f64>,
    /// Largest change against the previous rung, relative to the largest
    /// observable magnitude of this rung.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    pub tol: f64,
    pub rungs: Vec<Rung>,
    pub converged: bool,
}

pub fn relative_change(prev: &[f64], next: &[f64]) -> f64 {
    let scale = next.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let diff = prev
        .iter()
        .zip(next)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

/// Smallest count ≥ `from` whose decomposition is valid for every bath.
fn next_valid_terms(cfg: &RunConfig, bath: usize, from: usize) -> Option<usize> {
    (from..=cfg.convergence.max_pade_terms).find(|&j| {
        let mut terms = vec![0; 2];
        terms[bath] = j;
        pade_decompose(&cfg.model.baths(&terms)[bath]).is_ok()
    })
}

/// Raises depth by 2 and every Padé count by 1 per rung until the target
/// observables change by less than `convergence.tol`. Returns the ladder so
/// far together with the finest run or the failure that stopped it.
pub fn converge(cfg: &RunConfig, threads: usize) -> (Ladder, Result<Outcome, RunError>) {
    let mut ladder = Ladder {
        tol: cfg.convergence.tol,
        rungs: Vec::new(),
        converged: false,
    };
    let mut pade = match resolve_pade_terms(cfg) {
        Ok(j) => j,
        Err(e) => return (ladder, Err(e)),
    };
    let mut depth = cfg.hierarchy.depth;
    let c = &cfg.convergence;
    loop {
        if ladder.rungs.len() >= c.max_rungs || depth > c.max_depth {
            return (
                ladder,
                Err(RunError::Convergence(format!(
                    "ladder exhausted (max_rungs {}, max_depth {}) before observables settled",
                    c.max_rungs, c.max_depth
                ))),
            );
        }
        let mut rung_cfg = cfg.clone();
        rung_cfg.hierarchy.depth = depth;
        rung_cfg.decomposition.pade_terms = Some(pade.clone());
        let outcome = match execute(&rung_cfg, threads) {
            Ok(o) => o,
            Err(e) => return (ladder, Err(e)),
        };
        let observables = outcome.observables();
        let delta = ladder
            .rungs
            .last()
            .map(|r| relative_change(&r.observables, &observables));
        ladder.rungs.push(Rung {
            depth,
            pade_terms: pade.clone(),
            ados: outcome.resolution.ados,
            dt_used: outcome.resolution.dt_used,
            observables,
            delta,
        });
        if delta.is_some_and(|d| d < c.tol) {
            ladder.converged = true;
            return (ladder, Ok(outcome));
        }
        depth += 2;
        let mut next = Vec::with_capacity(pade.len());
        for (k, &j) in pade.iter().enumerate() {
            match next_valid_terms(cfg, k, j + 1) {
                Some(n) => next.push(n),
                None => {
                    return (
                        ladder,
                        Err(RunError::Convergence(format!(
                            "no valid Padé count for bath {} up to {}",
                            k + 1,
                            c.max_pade_terms
                        ))),
                    )
                }
            }
        }
        pade = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_change_uses_largest_magnitude() {
        assert_eq!(relative_change(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((relative_change(&[1.0, 2.0], &[1.1, 2.0]) - 0.05).abs() < 1e-12);
        assert_eq!(relative_change(&[0.0], &[0.0]), 0.0);
        assert!(relative_change(&[1.0], &[0.0]).is_infinite());
    }

    #[test]
    fn uncoupled_model_settles_on_the_second_rung() {
        let mut cfg = RunConfig::for_preset("spin-boson").unwrap();
        cfg = cfg
            .with_value("model.eta1", 0.0)
            .unwrap()
            .with_value("model.eta2", 0.0)
            .unwrap();
        cfg.hierarchy.depth = 1;
        cfg.decomposition.pade_terms = Some(vec![0, 0]);
        cfg.hierarchy.record_span = 0.5;
        let (ladder, out) = converge(&cfg, 1);
        assert!(ladder.converged);
        assert_eq!(ladder.rungs.len(), 2);
        assert_eq!(ladder.rungs[1].delta, Some(0.0));
        assert!(out.is_ok());
    }
}
