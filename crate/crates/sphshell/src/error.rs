use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    #[error("geometry invariant violated: {0}")]
    Geometry(String),

    #[error("resonance-degenerate input for l = {l}: {message}")]
    Degenerate { l: u32, message: String },

    #[error("near-vanishing denominator for tau = {tau}, l = {l}: ill-conditioned mode")]
    IllConditionedMode { tau: u8, l: u32 },

    #[error("integrator step size underflow at r = {radius}: {message}")]
    Stiffness { radius: f64, message: String },

    #[error("segment {segment}: {source}")]
    Segment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("composition failure at {frequency_hz} Hz: {message}")]
    Composition { frequency_hz: f64, message: String },

    #[error("GSM file format error: {0}")]
    GsmFormat(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }

    pub fn in_segment(self, segment: usize) -> Self {
        Error::Segment { segment, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
