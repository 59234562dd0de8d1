//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: unknown actor '{label}'")]
    UnknownActor {
        path: String,
        line: usize,
        label: String,
    },

    #[error("{path}:{line}: event time {time} is earlier than the previous event ({prev}); input must be sorted")]
    DecreasingTime {
        path: String,
        line: usize,
        time: f64,
        prev: f64,
    },

    #[error("{path}:{line}: empty receiver set")]
    EmptyReceiverSet { path: String, line: usize },

    #[error("{path}:{line}: sender '{label}' appears in its own receiver set (loops are excluded)")]
    SelfLoop {
        path: String,
        line: usize,
        label: String,
    },

    #[error("{path}:{line}: missing value for attribute '{attribute}'")]
    MissingValue {
        path: String,
        line: usize,
        attribute: String,
    },

    #[error("{path}: unknown attribute kind '{kind}' (expected 'num' or 'cat')")]
    UnknownKind { path: String, kind: String },

    #[error("{path}:{line}: duplicate actor '{label}'")]
    DuplicateActor {
        path: String,
        line: usize,
        label: String,
    },

    #[error("empty event stream")]
    EmptyStream,

    #[error("out-of-order event: expected sequence index {expected} at time >= {last_time}, got index {index} at time {time}")]
    OutOfOrderEvent {
        expected: u64,
        index: u64,
        last_time: f64,
        time: f64,
    },

    #[error("subset order {order} exceeds the tracked maximum {max_order}")]
    OrderExceeded { order: usize, max_order: usize },

    #[error("unknown attribute '{name}'")]
    UnknownAttribute { name: String },

    #[error("covariate '{spec}' is invalid: {msg}")]
    InvalidSpec { spec: String, msg: String },

    #[error("cannot draw {requested} distinct controls: only {available} eligible receiver sets exist")]
    InsufficientControls { requested: u64, available: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariate '{name}' is constant within every stratum and therefore non-identifiable (functions of the event time, the sender, or the receiver-set size are absorbed in the baseline rate)")]
    NonIdentifiable { name: String },

    #[error("likelihood appears unbounded (separation): |beta[{index}]| > {bound} with a non-vanishing gradient")]
    Separation { index: usize, bound: f64 },

    #[error("observed information matrix is singular even after ridge {ridge}")]
    SingularInformation { ridge: f64 },

    #[error("no convergence after {max_iter} Newton iterations (max |gradient| = {grad_norm:.3e})")]
    MaxIterations { max_iter: usize, grad_norm: f64 },

    #[error("full risk set has {size} receiver sets, above the enumeration cap {cap}")]
    RiskSetTooLarge { size: u64, cap: u64 },

    #[error("receiver-set size {size} is infeasible for {eligible} eligible receivers")]
    InfeasibleSize { size: usize, eligible: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state file {path}: {msg}")]
    BadStateFile { path: String, msg: String },
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to input
    /// validation), used by the CLI to pick exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Separation { .. }
                | Error::SingularInformation { .. }
                | Error::MaxIterations { .. }
        )
    }
}
