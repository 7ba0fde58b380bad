//! Group-fairness auditing of multi-class classifiers from binary
//! agree/disagree feedback.
//!
//! A critic who sees an input and the system's label `y` only says whether
//! they disagree (`s = 1` when their own label `z` differs from `y`). From
//! those bits and the system's output distribution this crate
//!
//! * computes statistical parity, accuracy equality, and calibration exactly
//!   ([`definite`]);
//! * bounds equal opportunity, predictive equality, and overall
//!   misclassification rate, and estimates each by the midpoint of its
//!   bounds ([`indefinite`]);
//! * checks both against ground truth computed from full `(y, z)` pairs
//!   ([`oracle`]) on real ([`ingest`]) or synthetic ([`simulator`]) data.

pub mod audit;
pub mod definite;
pub mod error;
pub mod indefinite;
pub mod ingest;
pub mod label;
pub mod notion;
pub mod oracle;
pub mod rates;
pub mod report;
pub mod simulator;

pub use audit::{run_audit, AuditInput};
pub use error::{Error, Result};
pub use indefinite::{BoundedNotion, CellBounds, IDENTITY_TOLERANCE};
pub use label::{AuditRecord, CriticFeedback, GroupPartition, LabelSpace};
pub use notion::{IndefiniteKind, NotionKind, NotionValue};
pub use oracle::{JointTable, UndefinedCells};
pub use rates::{RateKind, RateTable, SpSource};
pub use report::{AuditConfig, AuditReport, SpMode};
pub use simulator::ScenarioSpec;
