//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate target {target} out of range for {num_qubits} qubits")]
    TargetOutOfRange { target: usize, num_qubits: usize },

    #[error("gate targets must be distinct, got {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("gate on {targets} qubits needs a {expected}x{expected} matrix, got {rows}x{cols}")]
    BadMatrixShape {
        targets: usize,
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not unitary: max |G†G - I| = {defect:.3e} (tolerance {tol:.3e})")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("non-finite amplitude encountered")]
    NonFinite,

    #[error("state vector length {len} is not 2^{num_qubits}")]
    BadStateLength { len: usize, num_qubits: usize },

    #[error("state vector is not normalized: |‖ψ‖ - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },

    #[error("gate count must be at least one")]
    EmptyCircuit,

    #[error("budget must be at least one")]
    ZeroBudget,

    #[error("program halts at step {halted_at}, inside the requested window of {window} steps")]
    HaltsWithinWindow { halted_at: usize, window: usize },

    #[error("program declares itself non-halting; use the truncated (gap-scan) analysis")]
    NonHaltingInput,

    #[error("budget of {budget} steps exhausted without a halt signal")]
    BudgetExhausted { budget: usize },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian: max |A - A†| = {defect:.3e} (tolerance {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("ray trace is not orthonormal: defect {defect:.3e} exceeds {tol:.3e}")]
    NonOrthonormalTrace { defect: f64, tol: f64 },

    #[error("value {value} outside [0, 1)")]
    PhaseOutOfRange { value: f64 },

    #[error("spectrum has a single level; no gap is defined")]
    SingleLevel,

    #[error("trace is incomplete: have {have} states, need {need}")]
    IncompleteTrace { have: usize, need: usize },

    #[error("local term references out-of-range site {0}")]
    BadTermSite(String),

    #[error("found {found} return-probability peaks; need at least two to estimate a period")]
    NoPeaks { found: usize },

    #[error("no time samples left in the pre-boundary window")]
    EmptyWindow,

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}: {message}")]
    Json { path: String, message: String },

    #[error("invariant check failed: {0}")]
    InvariantFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
