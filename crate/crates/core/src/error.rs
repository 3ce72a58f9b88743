use thiserror::Error;

/// Errors raised by the library. Every variant corresponds to a violated
/// precondition or a numerical failure that the caller can act on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("site {site} out of range for a system of {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("regions overlap at site {0}")]
    Overlap(usize),

    #[error("degenerate Fermi level: gap {gap:e} at or below resolution floor {floor:e}")]
    DegenerateFermiLevel { gap: f64, floor: f64 },

    #[error("eigensolver did not converge after {iterations} sweeps (matrix size {size})")]
    NoConvergence { iterations: usize, size: usize },

    #[error("too few nonzero bins for a fit: {found} found, at least {needed} needed")]
    TooFewBins { found: usize, needed: usize },

    #[error("census is empty")]
    EmptyCensus,

    #[error("sample {sample} (master seed {seed}) failed: {source}")]
    Sample {
        sample: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
