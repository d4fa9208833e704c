//! Tilting objects and hearts on the local Calabi-Yau fourfold `X = Tot(Ω_P²)`.
//!
//! The crate works with K-classes on P², exact or interval-valued dimensions of
//! sheaf cohomology, exceptional collections and their mutations, pullback Ext
//! groups on `X`, secondary quivers of tilting objects and simple tilts of
//! hearts in `D^b_0(X)`, the category of complexes supported on the zero section.

pub mod cohomology;
pub mod exceptional;
pub mod hearts;
pub mod kclass;
pub mod les;
pub mod localcy4;
pub mod secondary;

use thiserror::Error as ThisError;

/// Errors shared by every module.
#[derive(Clone, Debug, PartialEq, Eq, ThisError)]
pub enum Error {
    #[error("invalid class: {0}")]
    InvalidClass(String),
    #[error("not exceptional: {0}")]
    NotExceptional(String),
    #[error("degenerate mutation: {0}")]
    Degenerate(String),
    #[error("negative pairing: {0}")]
    NegativePairing(String),
    #[error("unknown bundle: {0}")]
    UnknownBundle(String),
    #[error("inconsistent constraints: {0}")]
    Inconsistent(String),
    #[error("not tilting: {0}")]
    NotTilting(String),
    #[error("tail not certified: {0}")]
    TailNotCertified(String),
    #[error("classification violation: {0}")]
    ClassificationViolation(String),
    #[error("self-extension obstruction: {0}")]
    SelfExtObstruction(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("uncertified count: {0}")]
    Uncertified(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
