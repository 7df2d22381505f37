use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no unlabeled data")]
    NoUnlabeledData,

    #[error("no labeled data")]
    NoLabeledData,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(f64),

    #[error("k too large: k={k} with {nodes} nodes")]
    KTooLarge { k: usize, nodes: usize },

    #[error("empty graph")]
    EmptyGraph,

    #[error("empty kernel neighborhood")]
    EmptyNeighborhood,

    #[error("empty evaluation set")]
    EmptyEvalSet,

    #[error("cannot split: need at least 2 labeled points, got {0}")]
    CannotSplit(usize),

    #[error("empty parameter grid")]
    EmptyGrid,

    #[error("cross-validation fit failed at (h={h}, alpha={alpha}, sigma={sigma}): {source}")]
    CvFit {
        h: f64,
        alpha: f64,
        sigma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("hyperparameters missing from truth table: (h={h}, alpha={alpha}, sigma={sigma})")]
    MissingParams { h: f64, alpha: f64, sigma: f64 },

    #[error("degenerate radius sweep: {0}")]
    DegenerateSweep(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
