use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("branch limit of {limit} exceeded")]
    BranchLimit { limit: usize },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("missing decoder for side {0}")]
    MissingDecoder(u8),
    #[error("invalid garden-hose protocol: {0}")]
    InvalidProtocol(String),
    #[error("water flow cycles without exiting (revisited hose {0})")]
    FlowCycle(usize),
    #[error("message decode failed: {0}")]
    Decode(String),
    #[error("outcome string has probability zero at measurement {0}")]
    InconsistentOutcome(usize),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
