use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration limit reached after {iterations} iterations (last residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("divergence after {} sweeps; residual history {history:?}", history.len())]
    Divergence { history: Vec<f64> },

    #[error("degenerate spectrum: the characteristic function vanishes identically")]
    DegenerateSpectrum,

    #[error("missed zero: rectangle {rect:?} holds {counted} zeros, {found} were located")]
    MissedZero { rect: [f64; 4], counted: i64, found: usize },

    #[error("zero refinement failed at index {index} (seed {seed}, last |f| = {residual:e})")]
    ZeroNotConverged { index: i64, seed: Complex64, residual: f64 },

    #[error("near pole: |Delta({lambda})| = {value:e} is below the deflation floor")]
    NearPole { lambda: Complex64, value: f64 },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
