#![allow(dead_code)]

use heomflux_core::currents::{self, Grid};
use heomflux_core::hierarchy::{
    propagate_to_steady, propagate_transient, HeomOperator, HierarchyConfig, HierarchyState,
    SteadyOptions, TransientOptions,
};
use heomflux_core::models::{build_spin_boson, SpinBosonParams};
use heomflux_core::{CMatrix, Complex64, CurrentRecord, NoiseDecomposition, SystemModel};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn spin_boson(
    eta: f64,
    s_x: f64,
    s_z: f64,
    pade_terms: usize,
) -> (SystemModel, Vec<NoiseDecomposition>) {
    let mut p = SpinBosonParams::standard(eta, pade_terms);
    p.s_x = s_x;
    p.s_z = s_z;
    build_spin_boson(&p).unwrap()
}

pub fn operator(
    model: &SystemModel,
    decs: &[NoiseDecomposition],
    depth: usize,
    pade_cap: Option<usize>,
) -> HeomOperator {
    let cfg = HierarchyConfig {
        pade_cap,
        ..HierarchyConfig::new(depth)
    };
    HeomOperator::new(model.clone(), decs.to_vec(), &cfg).unwrap()
}

pub fn diag(pops: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(pops.len(), pops.len());
    for (i, &p) in pops.iter().enumerate() {
        m[(i, i)] = c(p);
    }
    m
}

/// Steady state from `start`, then a short uniformly sampled stretch.
pub fn steady_records(
    op: &HeomOperator,
    start: HierarchyState,
) -> (HierarchyState, Vec<CurrentRecord>) {
    let opts = SteadyOptions {
        obs_tol: 1e-12,
        ..SteadyOptions::default()
    };
    let model = op.model().clone();
    let decs = op.decompositions().to_vec();
    let mut observe = |s: &HierarchyState| currents::sample(s, &model, &decs).unwrap().q_b;
    let (state, _) = propagate_to_steady(op, start, &opts, &mut observe).unwrap();
    let (end, snaps) = propagate_transient(
        op,
        state,
        &TransientOptions {
            dt: 0.01,
            duration: 1.0,
            sample_every: 2,
        },
    )
    .unwrap();
    let samples: Vec<_> = snaps
        .iter()
        .map(|s| currents::sample(s, &model, &decs).unwrap())
        .collect();
    (end, currents::records(&samples, Grid::Open).unwrap())
}
