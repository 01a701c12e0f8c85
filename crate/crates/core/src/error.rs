use thiserror::Error;

use crate::density::SDCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A table, bit array or enumeration would exceed the configured budget.
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Some prime p has s(p) = p^k, so S covers every residue class mod p and
    /// the visible set is empty.
    #[error("degenerate density: s({p}) = {p}^{k}")]
    DegenerateDensity { p: u64, k: u32 },

    /// The certified cutoff lies beyond the configured scan limit. The partial
    /// certificate covers the prefix that was actually scanned.
    #[error("cutoff infeasible: certification needs L1 = {required}, scan limit is {limit}")]
    CutoffInfeasible {
        required: u64,
        limit: u64,
        partial: Box<SDCertificate>,
    },
}

impl Error {
    pub(crate) fn capacity(what: &'static str, needed: u128, limit: u128) -> Self {
        Error::Capacity { what, needed, limit }
    }
}
