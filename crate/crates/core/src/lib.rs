//! X-secure, T-private information retrieval over graph-based replicated
//! storage: finite-field primitives, the retrieval and private-computation
//! schemes, exact capacity bounds, exhaustive verifiers and an in-process
//! session harness.

pub mod capacity;
pub mod catalog;
pub mod ff;
pub mod grscoef;
pub mod model;
pub mod par;
pub mod scheme;
pub mod simnet;
pub mod verify;

pub use capacity::{capacity_report, CapacityReport, Rational};
pub use ff::{FieldElement, FieldMatrix, PrimeField};
pub use model::{PatternDocument, StorageGraph, StoragePattern};
pub use par::Execution;
pub use scheme::{Demand, NoiseTape, SchemeInstance};
pub use simnet::{run_session, Scheduler, SessionConfig, SessionReport};
