//! Error taxonomy shared by every module in the crate.
//!
//! The variants are grouped by how a caller is expected to react:
//! [`Error::InvalidInput`] and [`Error::Truncation`] indicate a bad
//! configuration (wrong grid, out-of-range parameter, malformed data) that the
//! caller must fix, while [`Error::Domain`] and [`Error::Estimation`] indicate
//! that a numerically valid request produced no meaningful answer (an
//! inversion outside its domain, a dip that cannot be measured).

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes surfaced by the simulation and analysis operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter or data structure violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A grid is too small to hold the requested envelope without the tails
    /// being clipped beyond the documented tolerance.
    #[error("grid truncation: {0}")]
    Truncation(String),

    /// An analytic inversion was evaluated outside its mathematical domain,
    /// e.g. a visibility above the source ceiling.
    #[error("domain error: {0}")]
    Domain(String),

    /// A curve or dataset does not support the requested measurement,
    /// e.g. a coincidence curve with no resolvable dip.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl Error {
    /// True for errors caused by bad configuration rather than by the data.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Truncation(_))
    }
}
