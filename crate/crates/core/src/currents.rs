//! Heat currents, power, and interaction energies evaluated from the
//! hierarchy, plus first- and second-law audits.
//!
//! Sign convention: every heat current is positive when energy flows from
//! the bath into the system.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::NoiseDecomposition;
use crate::error::{Error, Result};
use crate::hierarchy::ReducedView;
use crate::system::{commutator, trace_product, CMatrix, SystemModel, I};

fn mode_range(decompositions: &[NoiseDecomposition], k: usize) -> Result<std::ops::Range<usize>> {
    if k >= decompositions.len() {
        return Err(Error::IndexOutOfRange {
            what: "bath",
            index: k,
            len: decompositions.len(),
        });
    }
    let start: usize = decompositions[..k].iter().map(|d| d.terms().len()).sum();
    Ok(start..start + decompositions[k].terms().len())
}

/// Σ_j ρ_{e_kj}, the summed first tier of bath k.
fn first_tier_sum(
    view: &impl ReducedView,
    decompositions: &[NoiseDecomposition],
    k: usize,
) -> Result<Vec<CMatrix>> {
    mode_range(decompositions, k)?
        .map(|m| view.first_tier(m).ok_or(Error::DepthTooShallow))
        .collect()
}

fn check_shapes(
    view: &impl ReducedView,
    model: &SystemModel,
    decompositions: &[NoiseDecomposition],
) -> Result<()> {
    let modes: usize = decompositions.iter().map(|d| d.terms().len()).sum();
    if decompositions.len() != model.n_baths() || modes != view.n_modes() {
        return Err(Error::InvalidParameter(
            "state, model and decompositions disagree on the bath layout".into(),
        ));
    }
    Ok(())
}

/// System heat current Q̇_S^k = −Σ_j Tr{A_k ρ_{e_kj}} + iΔ_k Tr{[A_k, V_k] ρ₀}.
pub fn shc(
    view: &impl ReducedView,
    model: &SystemModel,
    decompositions: &[NoiseDecomposition],
    k: usize,
) -> Result<f64> {
    check_shapes(view, model, decompositions)?;
    let tier = first_tier_sum(view, decompositions, k)?;
    let t = view.time();
    let a = model.a_operator(k, t)?;
    let v = model.coupling(k)?;
    let mut q = C64::new(0.0, 0.0);
    for rho in &tier {
        q -= trace_product(&a, rho);
    }
    let delta = decompositions[k].delta_weight();
    if delta != 0.0 {
        q += I * delta * trace_product(&commutator(&a, v), &view.rho0());
    }
    Ok(q.re)
}

/// Bath heat current Q̇_B^k = −d⟨H_B^k⟩/dt.
pub fn bhc(
    view: &impl ReducedView,
    model: &SystemModel,
    decompositions: &[NoiseDecomposition],
    k: usize,
) -> Result<f64> {
    check_shapes(view, model, decompositions)?;
    let tier = first_tier_sum(view, decompositions, k)?;
    let t = view.time();
    let v = model.coupling(k)?;
    let rho0 = view.rho0();
    let dec = &decompositions[k];
    let mut q = C64::new(0.0, 0.0);
    for (rho, term) in tier.iter().zip(dec.terms()) {
        q -= trace_product(v, rho) * term.rate;
    }
    q += 2.0 * dec.c_imag_at_zero() * trace_product(&(v * v), &rho0);
    let delta = dec.delta_weight();
    if delta != 0.0 {
        let a = model.a_operator(k, t)?;
        q += I * delta * trace_product(&commutator(&a, v), &rho0);
        for kp in 0..model.n_baths() {
            if kp == k {
                continue;
            }
            let b = model.b_operator(k, kp)?;
            for rho in first_tier_sum(view, decompositions, kp)? {
                q -= trace_product(&b, &rho) * delta;
            }
            let delta_p = decompositions[kp].delta_weight();
            if delta_p != 0.0 {
                let vp = model.coupling(kp)?;
                q += I * delta * delta_p * trace_product(&commutator(&b, vp), &rho0);
            }
        }
    }
    Ok(q.re)
}

/// ⟨H_I^k⟩ = Σ_j Tr{V_k ρ_{e_kj}}.
pub fn interaction_energy(
    view: &impl ReducedView,
    model: &SystemModel,
    decompositions: &[NoiseDecomposition],
    k: usize,
) -> Result<f64> {
    check_shapes(view, model, decompositions)?;
    let v = model.coupling(k)?;
    Ok(first_tier_sum(view, decompositions, k)?
        .iter()
        .map(|rho| trace_product(v, rho).re)
        .sum())
}

/// Ẇ = Tr{∂_t H_S(t) ρ₀}.
pub fn power(view: &impl ReducedView, model: &SystemModel) -> f64 {
    trace_product(&model.power_operator(view.time()), &view.rho0()).re
}

/// ⟨H_S(t)⟩.
pub fn system_energy(view: &impl ReducedView, model: &SystemModel) -> f64 {
    trace_product(&model.hamiltonian_at(view.time()), &view.rho0()).re
}

/// Every instantaneous observable at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q_s: Vec<f64>,
    pub q_b: Vec<f64>,
    pub power: f64,
    pub h_s: f64,
    pub h_int: Vec<f64>,
}

pub fn sample(
    view: &impl ReducedView,
    model: &SystemModel,
    decompositions: &[NoiseDecomposition],
) -> Result<Sample> {
    let k_max = model.n_baths();
    let mut s = Sample {
        t: view.time(),
        q_s: Vec::with_capacity(k_max),
        q_b: Vec::with_capacity(k_max),
        power: power(view, model),
        h_s: system_energy(view, model),
        h_int: Vec::with_capacity(k_max),
    };
    for k in 0..k_max {
        s.q_s.push(shc(view, model, decompositions, k)?);
        s.q_b.push(bhc(view, model, decompositions, k)?);
        s.h_int
            .push(interaction_energy(view, model, decompositions, k)?);
    }
    Ok(s)
}

/// One row of a trajectory with derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentRecord {
    pub t: f64,
    pub q_s: Vec<f64>,
    pub q_b: Vec<f64>,
    pub power: f64,
    pub h_s: f64,
    pub h_int: Vec<f64>,
    /// Σ_{k′≠k} q̇_{k,k′} = Q̇_B^k − Q̇_S^k − d⟨H_I^k⟩/dt.
    pub casbi: Vec<f64>,
    /// d⟨H_S⟩/dt from the trajectory.
    pub dh_s: f64,
    /// d⟨H_I^k⟩/dt from the trajectory.
    pub dh_int: Vec<f64>,
    /// |Σ_k Q̇_B^k − d⟨H_S + Σ_k H_I^k⟩/dt + Ẇ|.
    pub first_law_residual: f64,
}

impl CurrentRecord {
    /// Largest magnitude among the energy flows entering the first law.
    pub fn flow_scale(&self) -> f64 {
        self.q_b
            .iter()
            .chain(&self.q_s)
            .chain(&self.dh_int)
            .chain([&self.power, &self.dh_s])
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

/// Layout of a sampled trajectory for finite differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grid {
    /// Uniform samples of an open time interval.
    Open,
    /// Uniform samples spanning one full period: the last sample repeats the first.
    Cycle,
}

/// Five-point centred derivative on a uniform grid. Open grids fall back to
/// one-sided five-point stencils at the ends.
pub fn derivative(values: &[f64], h: f64, index: usize, grid: Grid) -> Result<f64> {
    const NEEDED: usize = 5;
    match grid {
        Grid::Cycle => {
            let n = values.len().saturating_sub(1);
            if n < NEEDED {
                return Err(Error::InsufficientSamples {
                    needed: NEEDED + 1,
                    index,
                    available: values.len(),
                });
            }
            let at = |o: isize| values[((index as isize + o).rem_euclid(n as isize)) as usize];
            Ok((at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h))
        }
        Grid::Open => {
            let n = values.len();
            if n < NEEDED || index >= n {
                return Err(Error::InsufficientSamples {
                    needed: NEEDED,
                    index,
                    available: n,
                });
            }
            let f = |i: usize| values[i];
            Ok(if index >= 2 && index + 2 < n {
                (f(index - 2) - 8.0 * f(index - 1) + 8.0 * f(index + 1) - f(index + 2)) / (12.0 * h)
            } else if index < 2 {
                let i = index;
                let s = [-25.0, 48.0, -36.0, 16.0, -3.0];
                let base = (0..5).map(|j| s[j] * f(j)).sum::<f64>() / (12.0 * h);
                if i == 0 {
                    base
                } else {
                    (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h)
                }
            } else if index == n - 1 {
                let s = [3.0, -16.0, 36.0, -48.0, 25.0];
                (0..5).map(|j| s[j] * f(n - 5 + j)).sum::<f64>() / (12.0 * h)
            } else {
                (-f(n - 5) + 6.0 * f(n - 4) - 18.0 * f(n - 3) + 10.0 * f(n - 2) + 3.0 * f(n - 1))
                    / (12.0 * h)
            })
        }
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            index: 0,
            available: times.len(),
        });
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uneven = times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300));
    if uneven || !(h > 0.0) {
        return Err(Error::InvalidParameter(
            "trajectory samples are not uniformly spaced".into(),
        ));
    }
    Ok(h)
}

/// Records with finite-difference derivatives along a uniformly sampled
/// trajectory.
pub fn records(samples: &[Sample], grid: Grid) -> Result<Vec<CurrentRecord>> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let h = uniform_step(&times)?;
    let n_baths = samples.first().map_or(0, |s| s.q_b.len());
    let h_s: Vec<f64> = samples.iter().map(|s| s.h_s).collect();
    let h_int: Vec<Vec<f64>> = (0..n_baths)
        .map(|k| samples.iter().map(|s| s.h_int[k]).collect())
        .collect();
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let dh_s = derivative(&h_s, h, i, grid)?;
            let dh_int = h_int
                .iter()
                .map(|series| derivative(series, h, i, grid))
                .collect::<Result<Vec<_>>>()?;
            let casbi = (0..n_baths)
                .map(|k| s.q_b[k] - s.q_s[k] - dh_int[k])
                .collect();
            let residual =
                (s.q_b.iter().sum::<f64>() - dh_s - dh_int.iter().sum::<f64>() + s.power).abs();
            Ok(CurrentRecord {
                t: s.t,
                q_s: s.q_s.clone(),
                q_b: s.q_b.clone(),
                power: s.power,
                h_s: s.h_s,
                h_int: s.h_int.clone(),
                casbi,
                dh_s,
                dh_int,
                first_law_residual: residual,
            })
        })
        .collect()
}

/// Σ_{k′≠k} q̇_{k,k′} at sample `index` of a trajectory.
pub fn casbi_total(samples: &[Sample], index: usize, k: usize, grid: Grid) -> Result<f64> {
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let h = uniform_step(&times)?;
    let series: Vec<f64> = samples.iter().map(|s| s.h_int[k]).collect();
    let s = &samples[index];
    Ok(s.q_b[k] - s.q_s[k] - derivative(&series, h, index, grid)?)
}

/// Per-cycle integrals of the work and heats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleIntegrals {
    pub period: f64,
    pub work: f64,
    pub q_s: Vec<f64>,
    pub q_b: Vec<f64>,
}

/// Trapezoidal integrals over exactly one period of a periodic steady
/// trajectory sampled uniformly (first and last samples one period apart).
pub fn cycle_average(
    records: &[CurrentRecord],
    period: f64,
    periodic_steady: bool,
) -> Result<CycleIntegrals> {
    if !periodic_steady {
        return Err(Error::NotPeriodicSteady);
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let h = uniform_step(&times)?;
    let span = times[times.len() - 1] - times[0];
    if (span - period).abs() > 1e-9 * period {
        return Err(Error::InvalidParameter(format!(
            "trajectory spans {span}, expected exactly one period {period}"
        )));
    }
    let trap = |f: &dyn Fn(&CurrentRecord) -> f64| {
        let n = records.len();
        h * (0.5 * f(&records[0])
            + records[1..n - 1].iter().map(f).sum::<f64>()
            + 0.5 * f(&records[n - 1]))
    };
    let n_baths = records[0].q_b.len();
    Ok(CycleIntegrals {
        period,
        work: trap(&|r| r.power),
        q_s: (0..n_baths).map(|k| trap(&|r| r.q_s[k])).collect(),
        q_b: (0..n_baths).map(|k| trap(&|r| r.q_b[k])).collect(),
    })
}

/// Below this heat magnitude an efficiency is reported as undefined.
pub const EFFICIENCY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiencies {
    /// −W^cyc / Q_S^{cyc,1}
    pub system: Option<f64>,
    /// −W^cyc / Q_B^{cyc,1}
    pub bath: Option<f64>,
}

pub fn efficiencies(cycle: &CycleIntegrals) -> Efficiencies {
    let ratio = |q: f64| (q.abs() >= EFFICIENCY_GUARD).then(|| -cycle.work / q);
    Efficiencies {
        system: cycle.q_s.first().and_then(|&q| ratio(q)),
        bath: cycle.q_b.first().and_then(|&q| ratio(q)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClausiusAudit {
    /// −Σ_k Q_k / T_k
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Clausius functional −Σ_k Q_k/T_k for steady currents or per-cycle heats;
/// passes iff it is ≥ −tol.
pub fn second_law_check(heats: &[f64], temperatures: &[f64], tol: f64) -> Result<ClausiusAudit> {
    if heats.len() != temperatures.len() {
        return Err(Error::InvalidParameter(
            "one temperature per heat is required".into(),
        ));
    }
    if temperatures.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("temperatures must be > 0".into()));
    }
    let value = -heats
        .iter()
        .zip(temperatures)
        .map(|(q, t)| q / t)
        .sum::<f64>();
    Ok(ClausiusAudit {
        value,
        tolerance: tol,
        passed: value >= -tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstLawAudit {
    pub max_residual: f64,
    /// Largest energy-flow magnitude along the trajectory.
    pub scale: f64,
    pub relative_tolerance: f64,
    /// Rounding resolution of the differenced energies. Only matters when
    /// every flow is itself at rounding level, as at equilibrium.
    #[serde(default)]
    pub rounding_floor: f64,
    pub passed: bool,
}

/// Worst-case rounding amplification of the five-point stencils, with room
/// for the error already in each ⟨H⟩ sample.
const STENCIL_ROUNDING: f64 = 64.0;

/// Passes iff every residual is below `relative_tolerance` times the
/// largest energy-flow magnitude along the trajectory, or below the rounding
/// resolution of d⟨H_S + H_I⟩/dt when that is larger.
pub fn first_law_audit(records: &[CurrentRecord], relative_tolerance: f64) -> FirstLawAudit {
    let max_residual = records
        .iter()
        .map(|r| r.first_law_residual)
        .fold(0.0, f64::max);
    let scale = records
        .iter()
        .map(CurrentRecord::flow_scale)
        .fold(0.0, f64::max);
    let energy = records
        .iter()
        .map(|r| r.h_s.abs() + r.h_int.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let h = match records {
        [a, b, ..] => (b.t - a.t).abs(),
        _ => 0.0,
    };
    let rounding_floor = if h > 0.0 {
        STENCIL_ROUNDING * f64::EPSILON * energy / h
    } else {
        0.0
    };
    FirstLawAudit {
        max_residual,
        scale,
        relative_tolerance,
        rounding_floor,
        passed: max_residual <= (relative_tolerance * scale).max(rounding_floor),
    }
}
