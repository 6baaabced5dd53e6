//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A document does not match the composition / manifest / config schema.
    /// `path` is a JSON-pointer-style location inside the offending document.
    #[error("schema violation at {path}: {reason}")]
    Schema { path: String, reason: String },

    /// Wraps an error with the file it came from.
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Rule induction requires consecutive ordinals.
    #[error("ordinal gap: expected consecutive paintings, got {t_prev} -> {t_curr}")]
    OrdinalGap { t_prev: u32, t_curr: u32 },

    /// A perturbation op referenced an element that no longer exists
    /// (or has the wrong kind). The index is the op's position in the list.
    #[error("perturbation op {op_index} references an element that no longer exists")]
    InapplicableOp { op_index: usize },

    /// Discretization rejects elements whose footprint leaves the canvas.
    #[error("element geometry lies outside the canvas")]
    GeometryOutsideCanvas,

    #[error("invalid generator params: {0}")]
    InvalidParams(String),

    /// A perturbation produced a structurally invalid composition.
    #[error("perturbed composition violates structural invariants")]
    PerturbInvalid,

    /// Scoring needs at least one style invariant.
    #[error("invariant profile has no style invariants")]
    EmptyProfile,

    #[error("candidate {id} has no in_style/off_style label")]
    UnlabeledCandidate { id: String },
}

impl Error {
    /// Attach a file path to an error bubbling out of a parse or load.
    pub fn in_file(self, path: impl Into<String>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
