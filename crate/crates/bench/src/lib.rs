//! Fixtures shared by the benchmarks.

use heomflux_core::hierarchy::{HeomOperator, HierarchyConfig};
use heomflux_core::models::{
    build_spin_boson, build_three_level, SpinBosonParams, ThreeLevelParams,
};

pub fn spin_boson_operator(
    eta: f64,
    pade_terms: usize,
    depth: usize,
    threads: usize,
) -> HeomOperator {
    let (model, decs) =
        build_spin_boson(&SpinBosonParams::standard(eta, pade_terms)).expect("valid model");
    let cfg = HierarchyConfig {
        threads,
        pade_cap: Some(2),
        ..HierarchyConfig::new(depth)
    };
    HeomOperator::new(model, decs, &cfg).expect("hierarchy fits")
}

pub fn engine_operator(depth: usize, threads: usize) -> HeomOperator {
    let (model, decs) = build_three_level(&ThreeLevelParams::standard(0.1, 10.0, 1.0, [3, 3]))
        .expect("valid model");
    let cfg = HierarchyConfig {
        threads,
        bath_caps: vec![None, Some(1)],
        pade_cap: Some(2),
        ..HierarchyConfig::new(depth)
    };
    HeomOperator::new(model, decs, &cfg).expect("hierarchy fits")
}
