//! Job specifications, task orchestration, reports and the on-disk algebra
//! cache behind the `qhat` command.

pub mod cache;
pub mod report;
pub mod run;
pub mod spec;

pub use cache::Cache;
pub use report::{Report, Status};
pub use run::{run, run_tasks};
pub use spec::{parse_spec, JobSpec, SpecError, TaskKind, TaskSpec};
