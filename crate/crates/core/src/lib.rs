//! Hierarchical equations of motion for a finite system coupled to several
//! Drude heat baths, with system and bath heat-current estimators and
//! thermodynamic audits.
//!
//! Units: ħ = k_B = 1; energies and frequencies in units of a reference
//! frequency. Heat currents are positive when energy enters the system.

pub mod bath;
pub mod currents;
pub mod error;
pub mod fingerprint;
pub mod hierarchy;
pub mod models;
pub mod quadrature;
pub mod system;

pub use bath::{pade_decompose, BathSpec, ExpTerm, NoiseDecomposition};
pub use currents::{CurrentRecord, CycleIntegrals, Efficiencies, Grid, Sample};
pub use error::{Error, Result};
pub use hierarchy::{
    HeomOperator, HierarchyConfig, HierarchyState, PeriodicOptions, PeriodicTrajectory,
    ReducedView, Snapshot, SteadyOptions, SteadyReport,
};
pub use models::{SpinBosonParams, ThreeLevelParams};
pub use system::{CMatrix, Drive, SuperOp, SystemModel};

pub use num_complex::Complex64;
