//! Scenario documents, the task runner and run reports.

mod builtins;
mod document;
mod report;
mod runner;

pub use builtins::{builtin_source, explain, load_builtin, BUILTINS};
pub use document::{canonical_digest, load_scenario, parse_scenario, Family, Scenario, Task, TaskKind};
pub use report::{emit_report, report_from_json, to_json, RunReport, Settings, Status, TaskReport};
pub use runner::{retained_residual, run_suite, run_task, AGREEMENT_TOL, GLUING_SAMPLES, RETAINED_TOL};
