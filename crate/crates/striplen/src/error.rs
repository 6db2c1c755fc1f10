//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("path leaves the domain closure: {0}")]
    PathOutsideDomain(String),
    #[error("operation requires a simply connected domain (holes present)")]
    HolesUnsupported,
    #[error("could not construct hole cuts: {0}")]
    CutConstruction(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}
