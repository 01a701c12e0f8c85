//! Exact counting of lattice points visible from a finite set, Selberg-sieve
//! upper bounds, and certified density computations.
//!
//! Counting paths are exact integer arithmetic. Every comparison against an
//! infinite product or series goes through a [`RigorousInterval`].

pub mod budget;
pub mod constants;
pub mod density;
pub mod disc;
pub mod ergodic;
pub mod error;
pub mod fracsums;
pub mod interval;
pub mod ntcore;
pub mod rational;
pub mod selberg;
pub mod visibility;

pub use budget::{Budget, MEM_BUDGET_ENV};
pub use density::{SDCertificate, ScanReport, SdTarget, Verdict};
pub use disc::DiscCensus;
pub use ergodic::{AverageResult, TruncatedPoint};
pub use error::{Error, Result};
pub use fracsums::FracSumValue;
pub use interval::RigorousInterval;
pub use ntcore::{build_prime_tables, JordanTables, PrimeTables};
pub use selberg::{RigorousBound, SieveContext};
pub use visibility::{CountMethod, LatticeBox, PointSet, ResidueProfile};
