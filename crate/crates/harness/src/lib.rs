//! Scenario generation, oracle-backed audits and the acceptance batches
//! for `dyncover`.

pub mod gen;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod suite;

pub use report::{AuditReport, BatchReport};
pub use scenario::{cover_events, generate, run_scenario, CoverLog, GenKind, HarnessError, Scenario, Task};
