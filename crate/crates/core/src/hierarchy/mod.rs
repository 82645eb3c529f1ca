//! The truncated hierarchy of auxiliary density operators: state storage,
//! the equation-of-motion right-hand side, and time propagation.
//!
//! ADOs are stored rescaled, ρ̃_n = ρ_n / Π_m sqrt(n_m! s_m^{n_m}) with
//! s_m = |c_m|, which keeps deep tiers O(1) and makes the coupling
//! coefficients sqrt((n_m+1)s_m) and n_m c_m/sqrt(n_m s_m).

pub mod checkpoint;
pub mod index;
mod kernel;
pub mod propagate;

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::NoiseDecomposition;
use crate::error::{Error, Result};
use crate::system::{CMatrix, SystemModel};

pub use index::{AdoTable, ModeGroup, DEFAULT_ADO_CAP, NO_NEIGHBOR};
pub use propagate::{
    propagate_periodic, propagate_to_steady, propagate_transient, step_rk4, AndersonOptions,
    PeriodicOptions, PeriodicTrajectory, Propagator, SteadyOptions, SteadyReport, TransientOptions,
};

/// Largest system dimension the kernel supports.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    /// Truncation depth N.
    pub depth: usize,
    /// Optional per-bath cap on the order carried by that bath's modes.
    #[serde(default)]
    pub bath_caps: Vec<Option<usize>>,
    /// Optional cap on the order carried by each bath's Padé modes, i.e.
    /// every mode after the leading Drude pole.
    #[serde(default)]
    pub pade_cap: Option<usize>,
    #[serde(default = "default_max_ados")]
    pub max_ados: usize,
    /// Worker threads for the right-hand side; 1 runs serially.
    #[serde(default = "default_threads")]
    pub threads: usize,
}

fn default_max_ados() -> usize {
    DEFAULT_ADO_CAP
}

fn default_threads() -> usize {
    1
}

impl HierarchyConfig {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            bath_caps: Vec::new(),
            pade_cap: None,
            max_ados: DEFAULT_ADO_CAP,
            threads: 1,
        }
    }
}

/// One exponential mode of one bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub bath: usize,
    pub term: usize,
    pub rate: f64,
    pub c_real: f64,
    pub c_imag: f64,
    /// Rescaling factor s_m.
    pub scale: f64,
}

/// Index table for the given decompositions truncated at `depth`.
pub fn enumerate_ados(
    decompositions: &[NoiseDecomposition],
    depth: usize,
    cap: usize,
) -> Result<AdoTable> {
    AdoTable::with_groups(depth, mode_groups(decompositions, &[], None), cap)
}

fn mode_groups(
    decompositions: &[NoiseDecomposition],
    caps: &[Option<usize>],
    pade_cap: Option<usize>,
) -> Vec<ModeGroup> {
    let mut start = 0;
    decompositions
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let g = ModeGroup {
                start,
                len: d.terms().len(),
                cap: caps.get(k).copied().flatten(),
                tail_cap: pade_cap,
            };
            start += g.len;
            g
        })
        .collect()
}

/// The hierarchy generator for one model and bath set.
pub struct HeomOperator {
    model: SystemModel,
    decompositions: Vec<NoiseDecomposition>,
    table: Arc<AdoTable>,
    modes: Vec<Mode>,
    scales: Arc<[f64]>,
    bath_modes: Vec<std::ops::Range<usize>>,
    couplings: Vec<Vec<C64>>,
    deltas: Vec<f64>,
    damping: Vec<f64>,
    pool: Option<Arc<rayon::ThreadPool>>,
    threads: usize,
}

impl std::fmt::Debug for HeomOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeomOperator")
            .field("dim", &self.dim())
            .field("modes", &self.modes.len())
            .field("depth", &self.table.depth())
            .field("ados", &self.table.len())
            .finish()
    }
}

impl HeomOperator {
    pub fn new(
        model: SystemModel,
        decompositions: Vec<NoiseDecomposition>,
        config: &HierarchyConfig,
    ) -> Result<Self> {
        if decompositions.len() != model.n_baths() {
            return Err(Error::InvalidParameter(format!(
                "{} decompositions for {} baths",
                decompositions.len(),
                model.n_baths()
            )));
        }
        if model.dim() > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "system dimension {} exceeds {MAX_DIM}",
                model.dim()
            )));
        }
        let groups = mode_groups(&decompositions, &config.bath_caps, config.pade_cap);
        let table = Arc::new(AdoTable::with_groups(
            config.depth,
            groups.clone(),
            config.max_ados,
        )?);
        let mut modes = Vec::new();
        for (k, dec) in decompositions.iter().enumerate() {
            for (j, term) in dec.terms().iter().enumerate() {
                if !(term.rate > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "bath {k} term {j} has rate {}",
                        term.rate
                    )));
                }
                let s = term.c_real.hypot(term.c_imag);
                modes.push(Mode {
                    bath: k,
                    term: j,
                    rate: term.rate,
                    c_real: term.c_real,
                    c_imag: term.c_imag,
                    scale: if s > 0.0 { s } else { 1.0 },
                });
            }
        }
        let bath_modes = groups.iter().map(|g| g.start..g.start + g.len).collect();
        let damping = (0..table.len())
            .map(|id| {
                table
                    .index(id)
                    .iter()
                    .zip(&modes)
                    .map(|(&n, m)| n as f64 * m.rate)
                    .sum()
            })
            .collect();
        let scales: Arc<[f64]> = modes.iter().map(|m| m.scale).collect();
        let couplings = model.couplings().iter().map(|v| flatten(v)).collect();
        let deltas = decompositions.iter().map(|d| d.delta_weight()).collect();
        let threads = config.threads.max(1);
        let pool = if threads > 1 {
            Some(Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
            ))
        } else {
            None
        };
        Ok(Self {
            model,
            decompositions,
            table,
            modes,
            scales,
            bath_modes,
            couplings,
            deltas,
            damping,
            pool,
            threads,
        })
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn decompositions(&self) -> &[NoiseDecomposition] {
        &self.decompositions
    }

    pub fn table(&self) -> &AdoTable {
        &self.table
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Mode ids belonging to bath k.
    pub fn bath_modes(&self, k: usize) -> std::ops::Range<usize> {
        self.bath_modes[k].clone()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn depth(&self) -> usize {
        self.table.depth()
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Length of the flat state vector.
    pub fn state_len(&self) -> usize {
        self.table.len() * self.dim() * self.dim()
    }

    /// Largest Σ n_m γ_m over stored indices.
    pub fn max_damping(&self) -> f64 {
        self.damping.iter().copied().fold(0.0, f64::max)
    }

    /// Product state ρ(0) with every deeper ADO zero.
    pub fn initial_state(&self, rho: &CMatrix) -> Result<HierarchyState> {
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(Error::InvalidParameter(
                "initial density matrix has the wrong shape".into(),
            ));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "initial density matrix has trace {tr}"
            )));
        }
        let mut data = vec![C64::new(0.0, 0.0); self.state_len()];
        data[..d * d].copy_from_slice(&flatten(rho));
        Ok(HierarchyState {
            time: 0.0,
            dim: d,
            data,
            table: Arc::clone(&self.table),
            scales: Arc::clone(&self.scales),
        })
    }

    pub fn maximally_mixed(&self) -> HierarchyState {
        let d = self.dim();
        let rho = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        self.initial_state(&rho)
            .expect("maximally mixed state is valid")
    }

    /// Wrap a flat vector produced elsewhere (e.g. a checkpoint).
    pub fn state_from_data(&self, time: f64, data: Vec<C64>) -> Result<HierarchyState> {
        if data.len() != self.state_len() {
            return Err(Error::InvalidParameter(format!(
                "state has {} entries, hierarchy needs {}",
                data.len(),
                self.state_len()
            )));
        }
        Ok(HierarchyState {
            time,
            dim: self.dim(),
            data,
            table: Arc::clone(&self.table),
            scales: Arc::clone(&self.scales),
        })
    }

    /// dρ/dt for every ADO of `state` at time `t`.
    pub fn heom_rhs(&self, state: &HierarchyState, t: f64) -> HierarchyState {
        let mut out = vec![C64::new(0.0, 0.0); self.state_len()];
        self.rhs_into(t, &state.data, &mut out);
        HierarchyState {
            time: t,
            dim: state.dim,
            data: out,
            table: Arc::clone(&self.table),
            scales: Arc::clone(&self.scales),
        }
    }

    /// Flat-vector form of [`HeomOperator::heom_rhs`].
    pub fn rhs_into(&self, t: f64, x: &[C64], out: &mut [C64]) {
        let h = flatten(&self.model.hamiltonian_at(t));
        match &self.pool {
            Some(pool) => pool.install(|| kernel::evaluate(self, &h, x, out)),
            None => kernel::evaluate(self, &h, x, out),
        }
    }
}

pub(crate) fn flatten(m: &CMatrix) -> Vec<C64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            v.push(m[(r, c)]);
        }
    }
    v
}

pub(crate) fn unflatten(d: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(d, d, &v[..d * d])
}

/// Reduced information the current estimators need: ρ₀ and the first tier.
pub trait ReducedView {
    fn time(&self) -> f64;
    fn rho0(&self) -> CMatrix;
    /// Physical (unscaled) first-tier ADO ρ_{e_mode}; None if truncated.
    fn first_tier(&self, mode: usize) -> Option<CMatrix>;
    fn n_modes(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    time: f64,
    dim: usize,
    data: Vec<C64>,
    table: Arc<AdoTable>,
    scales: Arc<[f64]>,
}

impl HierarchyState {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.table.depth()
    }

    pub fn table(&self) -> &AdoTable {
        &self.table
    }

    /// Rescaled flat storage, ordered by ADO id then row-major.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn n_ados(&self) -> usize {
        self.table.len()
    }

    /// Rescaled matrix of ADO `id`.
    pub fn scaled_ado(&self, id: usize) -> CMatrix {
        let dd = self.dim * self.dim;
        unflatten(self.dim, &self.data[id * dd..(id + 1) * dd])
    }

    /// Physical matrix of ADO `id`.
    pub fn ado(&self, id: usize) -> CMatrix {
        let factor: f64 = self
            .table
            .index(id)
            .iter()
            .zip(self.scales.iter())
            .map(|(&n, &s)| {
                let n = n as i32;
                let fact: f64 = (1..=n).map(f64::from).product();
                (fact * s.powi(n)).sqrt()
            })
            .product();
        self.scaled_ado(id) * C64::new(factor, 0.0)
    }

    pub fn ado_by_index(&self, index: &[u8]) -> Option<CMatrix> {
        self.table.find(index).map(|id| self.ado(id))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest |X − X†| entry over every stored ADO.
    pub fn max_hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let dd = d * d;
        let mut worst: f64 = 0.0;
        for chunk in self.data.chunks_exact(dd) {
            for r in 0..d {
                for c in r..d {
                    worst = worst.max((chunk[r * d + c] - chunk[c * d + r].conj()).norm());
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn snapshot(&self) -> Snapshot {
        let modes = self.table.modes();
        Snapshot {
            time: self.time,
            rho0: self.rho0(),
            first_tier: (0..modes)
                .map(|m| ReducedView::first_tier(self, m))
                .collect(),
        }
    }
}

impl ReducedView for HierarchyState {
    fn time(&self) -> f64 {
        self.time
    }

    fn rho0(&self) -> CMatrix {
        self.scaled_ado(0)
    }

    fn first_tier(&self, mode: usize) -> Option<CMatrix> {
        let id = self.table.first_tier(mode)?;
        Some(self.scaled_ado(id) * C64::new(self.scales[mode].sqrt(), 0.0))
    }

    fn n_modes(&self) -> usize {
        self.table.modes()
    }
}

/// ρ₀ and the physical first-tier ADOs at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub rho0: CMatrix,
    pub first_tier: Vec<Option<CMatrix>>,
}

impl ReducedView for Snapshot {
    fn time(&self) -> f64 {
        self.time
    }

    fn rho0(&self) -> CMatrix {
        self.rho0.clone()
    }

    fn first_tier(&self, mode: usize) -> Option<CMatrix> {
        self.first_tier.get(mode).cloned().flatten()
    }

    fn n_modes(&self) -> usize {
        self.first_tier.len()
    }
}
