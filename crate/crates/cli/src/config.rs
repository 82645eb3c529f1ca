//! Run configuration: a TOML document with a fixed key schema.

use std::path::Path;

use heomflux_core::{BathSpec, SpinBosonParams, ThreeLevelParams};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub hierarchy: HierarchySection,
    #[serde(default)]
    pub decomposition: DecompositionSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub audit: AuditSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum ModelConfig {
    SpinBoson(SpinBosonConfig),
    ThreeLevelEngine(EngineConfig),
}

/// Two-level system between two Drude baths. Energies in units of ω₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinBosonConfig {
    pub omega0: f64,
    pub s_x: f64,
    pub s_z: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub t1: f64,
    pub t2: f64,
    /// Diagonal of ρ(0); maximally mixed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_populations: Option<Vec<f64>>,
}

impl Default for SpinBosonConfig {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            s_x: 1.0,
            s_z: 1.0,
            eta1: 0.01,
            eta2: 0.01,
            gamma1: 2.0,
            gamma2: 2.0,
            t1: 2.0,
            t2: 1.0,
            initial_populations: None,
        }
    }
}

/// Driven three-level engine. Energies in units of ω₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub drive_frequency: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub t1: f64,
    pub t2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_populations: Option<Vec<f64>>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            omega1: 1.0,
            omega2: 0.5,
            g: 0.1,
            drive_frequency: 0.5,
            eta1: 0.01,
            eta2: 0.001,
            gamma1: 2.0,
            gamma2: 2.0,
            t1: 10.0,
            t2: 1.0,
            initial_populations: None,
        }
    }
}

/// Per-bath cap entry: a number, or the string "none".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapEntry {
    Limit(usize),
    Off(Unlimited),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unlimited {
    None,
}

impl CapEntry {
    pub fn limit(self) -> Option<usize> {
        match self {
            CapEntry::Limit(n) => Some(n),
            CapEntry::Off(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchySection {
    pub depth: usize,
    pub dt: f64,
    /// Give up on a steady state after this much propagated time.
    pub t_max: f64,
    /// Steady: bound on ‖dρ/dt‖/‖ρ‖. Periodic: bound on the cycle-to-cycle state change.
    pub tol: f64,
    /// Bound on the change of the monitored currents between checks.
    pub obs_tol: f64,
    /// Propagated time between steady-state checks.
    pub window: f64,
    pub max_cycles: usize,
    pub samples_per_cycle: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bath_caps: Vec<CapEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pade_cap: Option<usize>,
    pub max_ados: usize,
    /// Length of the trajectory recorded after a steady state is reached.
    pub record_span: f64,
    /// Steps between trajectory rows for steady and transient runs.
    pub sample_every: usize,
}

impl Default for HierarchySection {
    fn default() -> Self {
        Self {
            depth: 4,
            dt: 0.01,
            t_max: 1.0e5,
            tol: 1e-10,
            obs_tol: 1e-11,
            window: 5.0,
            max_cycles: 2000,
            samples_per_cycle: 200,
            bath_caps: Vec::new(),
            pade_cap: None,
            max_ados: heomflux_core::hierarchy::DEFAULT_ADO_CAP,
            record_span: 2.0,
            sample_every: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionSection {
    /// Padé terms per bath; chosen from `tol_decomp` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pade_terms: Option<Vec<usize>>,
    pub tol_decomp: f64,
    pub max_pade_terms: usize,
}

impl Default for DecompositionSection {
    fn default() -> Self {
        Self {
            pade_terms: None,
            tol_decomp: 1e-6,
            max_pade_terms: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    #[default]
    Steady,
    Periodic,
    Transient,
}

impl RunKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Steady => "steady",
            RunKind::Periodic => "periodic",
            RunKind::Transient => "transient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub kind: RunKind,
    /// Transient runs only.
    pub duration: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            kind: RunKind::Steady,
            duration: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted key path, e.g. `model.s_x`. Several paths joined by `+` are
    /// set to the same value.
    pub parameter: String,
    pub values: Vec<f64>,
}

impl SweepSection {
    pub fn paths(&self) -> Vec<&str> {
        self.parameter.split('+').map(str::trim).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub enabled: bool,
    /// Largest change of any target observable between successive rungs,
    /// relative to the largest observable magnitude.
    pub tol: f64,
    pub max_depth: usize,
    pub max_pade_terms: usize,
    pub max_rungs: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            enabled: false,
            tol: 1e-3,
            max_depth: 20,
            max_pade_terms: 40,
            max_rungs: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub prefix: String,
    pub trajectory: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            prefix: "heomflux-out/run".into(),
            trajectory: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditSection {
    pub first_law: bool,
    pub second_law: bool,
    /// Residual bound relative to the largest energy-flow magnitude.
    pub tol_first_law: f64,
    pub tol_second_law: f64,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self {
            first_law: true,
            second_law: true,
            tol_first_law: 1e-5,
            tol_second_law: 1e-8,
        }
    }
}

impl ModelConfig {
    pub fn preset(preset: &str) -> Result<Self, RunError> {
        match preset {
            heomflux_core::models::SPIN_BOSON => {
                Ok(ModelConfig::SpinBoson(SpinBosonConfig::default()))
            }
            heomflux_core::models::THREE_LEVEL_ENGINE => {
                Ok(ModelConfig::ThreeLevelEngine(EngineConfig::default()))
            }
            other => Err(RunError::Config(format!(
                "unknown preset {other:?}; expected spin-boson or three-level-engine"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::SpinBoson(_) => heomflux_core::models::SPIN_BOSON,
            ModelConfig::ThreeLevelEngine(_) => heomflux_core::models::THREE_LEVEL_ENGINE,
        }
    }

    pub fn temperatures(&self) -> Vec<f64> {
        match self {
            ModelConfig::SpinBoson(m) => vec![m.t1, m.t2],
            ModelConfig::ThreeLevelEngine(m) => vec![m.t1, m.t2],
        }
    }

    pub fn is_driven(&self) -> bool {
        matches!(self, ModelConfig::ThreeLevelEngine(m) if m.g != 0.0)
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelConfig::SpinBoson(_) => 2,
            ModelConfig::ThreeLevelEngine(_) => 3,
        }
    }

    pub fn initial_populations(&self) -> Option<&[f64]> {
        match self {
            ModelConfig::SpinBoson(m) => m.initial_populations.as_deref(),
            ModelConfig::ThreeLevelEngine(m) => m.initial_populations.as_deref(),
        }
    }

    /// Bath specifications with the given Padé term counts.
    pub fn baths(&self, pade_terms: &[usize]) -> [BathSpec; 2] {
        let (eta, gamma, t) = match self {
            ModelConfig::SpinBoson(m) => ([m.eta1, m.eta2], [m.gamma1, m.gamma2], [m.t1, m.t2]),
            ModelConfig::ThreeLevelEngine(m) => {
                ([m.eta1, m.eta2], [m.gamma1, m.gamma2], [m.t1, m.t2])
            }
        };
        std::array::from_fn(|k| BathSpec {
            eta: eta[k],
            gamma: gamma[k],
            temperature: t[k],
            pade_terms: pade_terms.get(k).copied().unwrap_or(0),
        })
    }

    pub fn spin_boson_params(m: &SpinBosonConfig, baths: [BathSpec; 2]) -> SpinBosonParams {
        SpinBosonParams {
            omega0: m.omega0,
            s_x: m.s_x,
            s_z: m.s_z,
            baths,
        }
    }

    pub fn engine_params(m: &EngineConfig, baths: [BathSpec; 2]) -> ThreeLevelParams {
        ThreeLevelParams {
            omega1: m.omega1,
            omega2: m.omega2,
            g: m.g,
            drive_frequency: m.drive_frequency,
            baths,
        }
    }
}

impl RunConfig {
    /// Standard model with default numerics; the engine runs periodic.
    pub fn for_preset(preset: &str) -> Result<Self, RunError> {
        let model = ModelConfig::preset(preset)?;
        let kind = if model.is_driven() {
            RunKind::Periodic
        } else {
            RunKind::Steady
        };
        Ok(Self {
            model,
            hierarchy: HierarchySection::default(),
            decomposition: DecompositionSection::default(),
            run: RunSection {
                kind,
                ..RunSection::default()
            },
            sweep: None,
            convergence: ConvergenceSection::default(),
            output: OutputSection::default(),
            audit: AuditSection::default(),
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks the invariants that do not need a built model.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        let h = &self.hierarchy;
        for (name, v) in [
            ("hierarchy.dt", h.dt),
            ("hierarchy.t_max", h.t_max),
            ("hierarchy.tol", h.tol),
            ("hierarchy.obs_tol", h.obs_tol),
            ("hierarchy.window", h.window),
            ("hierarchy.record_span", h.record_span),
            ("decomposition.tol_decomp", self.decomposition.tol_decomp),
            ("convergence.tol", self.convergence.tol),
            ("audit.tol_first_law", self.audit.tol_first_law),
            ("audit.tol_second_law", self.audit.tol_second_law),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if h.depth == 0 {
            return bad("hierarchy.depth must be at least 1".into());
        }
        if h.samples_per_cycle < 8 {
            return bad("hierarchy.samples_per_cycle must be at least 8".into());
        }
        if !h.bath_caps.is_empty() && h.bath_caps.len() != 2 {
            return bad("hierarchy.bath_caps needs one entry per bath".into());
        }
        if let Some(j) = &self.decomposition.pade_terms {
            if j.len() != 2 {
                return bad("decomposition.pade_terms needs one entry per bath".into());
            }
        }
        if self.run.kind == RunKind::Transient
            && !(self.run.duration.is_finite() && self.run.duration > 0.0)
        {
            return bad(format!(
                "run.duration must be positive, got {}",
                self.run.duration
            ));
        }
        if self.run.kind == RunKind::Periodic && !self.model.is_driven() {
            return bad(
                "periodic runs need a driven model (three-level-engine with g != 0)".into(),
            );
        }
        if self.run.kind == RunKind::Steady && self.model.is_driven() {
            return bad("a driven model has no steady state; use kind = \"periodic\"".into());
        }
        if let Some(p) = self.model.initial_populations() {
            if p.len() != self.model.dim() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return bad(format!(
                    "initial_populations needs {} non-negative entries",
                    self.model.dim()
                ));
            }
            if (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return bad("initial_populations must sum to 1".into());
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep.values is empty".into());
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return bad("sweep.values must be finite".into());
            }
            for path in s.paths() {
                self.with_value(path, s.values[0])?;
            }
        }
        Ok(())
    }

    /// Copy with the value at a dotted key path replaced.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Self, RunError> {
        let mut doc = toml::Value::try_from(self).map_err(|e| RunError::Config(e.to_string()))?;
        let (parents, last) = match path.rsplit_once('.') {
            Some((head, last)) => (head.split('.').collect::<Vec<_>>(), last),
            None => (Vec::new(), path),
        };
        let unknown = || RunError::Config(format!("unknown parameter path {path:?}"));
        let mut node = &mut doc;
        for key in parents {
            node = node
                .as_table_mut()
                .and_then(|t| t.get_mut(key))
                .ok_or_else(unknown)?;
        }
        let slot = node
            .as_table_mut()
            .and_then(|t| t.get_mut(last))
            .ok_or_else(unknown)?;
        *slot = match slot {
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(RunError::Config(format!(
                        "{path} needs a non-negative integer, got {value}"
                    )));
                }
                toml::Value::Integer(value as i64)
            }
            toml::Value::Float(_) => toml::Value::Float(value),
            _ => return Err(RunError::Config(format!("{path} is not a scalar number"))),
        };
        doc.try_into()
            .map_err(|e: toml::de::Error| RunError::Config(e.to_string()))
    }

    /// Applies a `key=value` override where value is any TOML literal.
    pub fn with_override(&self, assignment: &str) -> Result<Self, RunError> {
        let (path, literal) = assignment
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("override {assignment:?} is not key=value")))?;
        let parsed: toml::Table = toml::from_str(&format!("v = {}", literal.trim()))
            .map_err(|e| RunError::Config(format!("{assignment}: {e}")))?;
        let value = parsed["v"].clone();
        let mut doc = toml::Value::try_from(self).map_err(|e| RunError::Config(e.to_string()))?;
        let keys: Vec<&str> = path.trim().split('.').collect();
        let mut node = &mut doc;
        for key in &keys[..keys.len() - 1] {
            let table = node
                .as_table_mut()
                .ok_or_else(|| RunError::Config(format!("{path}: not a table")))?;
            node = table
                .entry(key.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| RunError::Config(format!("{path}: not a table")))?;
        let value = match (table.get(*keys.last().unwrap()), value) {
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
        table.insert(keys.last().unwrap().to_string(), value);
        let cfg: RunConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
