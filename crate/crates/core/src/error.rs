use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged: non-finite loss at epoch {epoch}, update {step}")]
    Diverged { epoch: usize, step: usize },

    #[error("layer index {index} out of range for {num_layers} layers")]
    LayerOutOfRange { index: usize, num_layers: usize },

    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),

    #[error("requested {k} clusters from {n} observations")]
    TooManyClusters { k: usize, n: usize },

    #[error("population contains a single gender; a two-way gender purity check needs both")]
    SingleGender,

    #[error("zero-norm vector cannot be cosine-scored ({0})")]
    ZeroNorm(String),

    #[error("missing session embedding for speaker {0}")]
    MissingEmbedding(String),

    #[error("standardization statistics missing; train the extractor before embedding")]
    MissingStandardizer,
}

pub type Result<T> = std::result::Result<T, Error>;
