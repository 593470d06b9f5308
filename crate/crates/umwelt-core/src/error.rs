use thiserror::Error;

use crate::scalar::ParseScalarError;

/// Structural errors: a value could not be built or an operation's
/// preconditions do not hold. Numeric defects of an otherwise well-formed
/// model (bad row sums and the like) are reported as
/// [`Violation`](crate::model::Violation) data instead.
#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("space {space:?} has no states")]
    EmptySpace { space: String },

    #[error("space {space:?} declares label {label:?} twice")]
    DuplicateLabel { space: String, label: String },

    #[error("space {space:?} has no state labelled {label:?}")]
    UnknownState { space: String, label: String },

    #[error("{context}: expected space {expected}, found {found}")]
    SpaceMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("kernel {kernel:?} must map {expected_source} -> {expected_target}, found {found_source} -> {found_target}")]
    KernelWiring {
        kernel: String,
        expected_source: String,
        expected_target: String,
        found_source: String,
        found_target: String,
    },

    #[error("kernel {kernel:?}: expected {expected_rows} rows of {expected_cols} entries, found row {row} with {found} entries")]
    KernelShape {
        kernel: String,
        expected_rows: usize,
        expected_cols: usize,
        row: usize,
        found: usize,
    },

    #[error("kernel {kernel:?}: expected {expected} rows, found {found}")]
    KernelRowCount {
        kernel: String,
        expected: usize,
        found: usize,
    },

    #[error("operation requires a memoryless model (the agent state must not depend on its previous value)")]
    NotMemoryless,

    #[error("{what} needs {needed} entries, above the cap of {cap}; raise the cap to proceed")]
    CapExceeded {
        what: String,
        needed: u64,
        cap: u64,
    },

    #[error("selector is not idempotent or maps across blocks at state {label:?}")]
    InconsistentSelector { label: String },

    #[error("mixture weights must be nonnegative with positive mass on block of {label:?}")]
    BadMixtureWeights { label: String },

    #[error(transparent)]
    Scalar(#[from] ParseScalarError),
}
