use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Padé pole {pole} collides with the Drude rate {gamma} at {pade_terms} terms; choose a different number of Padé terms")]
    PoleCollision {
        pade_terms: usize,
        pole: f64,
        gamma: f64,
    },

    #[error("delta weight {value:e} is negative; the retained pole set over-counts the zero-frequency weight")]
    NegativeDelta { value: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("bath pair requires two distinct baths, got k = k' = {0}")]
    SameBath(usize),

    #[error("hierarchy would hold {count} ADOs, above the configured cap of {cap}")]
    HierarchyTooLarge { count: u128, cap: usize },

    #[error("hierarchy depth must be at least 1 to evaluate heat currents")]
    DepthTooShallow,

    #[error("non-finite value in ADO {ado_id} at t = {time}")]
    NonFinite { ado_id: usize, time: f64 },

    #[error(
        "{kind} propagation did not converge by t = {elapsed} (residual history: {history:?})"
    )]
    NotConverged {
        kind: &'static str,
        elapsed: f64,
        history: Vec<f64>,
    },

    #[error("finite-difference stencil needs {needed} samples around index {index}, trajectory has {available}")]
    InsufficientSamples {
        needed: usize,
        index: usize,
        available: usize,
    },

    #[error("trajectory is not flagged as a periodic steady state")]
    NotPeriodicSteady,

    #[error("steady state is not unique (second-smallest singular value {0:e})")]
    DegenerateSteadyState(f64),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
