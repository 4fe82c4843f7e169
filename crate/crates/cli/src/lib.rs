//! Scenario files, their execution, and the record/plot formats of the
//! `givp` binary.

pub mod plot;
pub mod record;
pub mod scenario;
pub mod tasks;

pub use record::{Outcome, RunRecord, SCHEMA};
pub use scenario::{load, parse, ConfigError, Scenario, Task};
pub use tasks::{execute, Overrides};
