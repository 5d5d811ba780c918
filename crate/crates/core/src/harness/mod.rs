//! Batch front end: scenario files, the built-in registry, deterministic
//! runs with manifests, plot data and the acceptance suites.

pub mod checks;
pub mod config;
pub mod plot;
pub mod registry;
pub mod run;

pub use checks::{algebra_checks, run_criterion, suite_criteria, Criterion, CriterionResult, Suite, CRITERIA};
pub use config::{parse_scenario, parse_scenario_str, AlgebraSpec, Check, Experiment, ExperimentKind, OutputSpec};
pub use plot::{emit_plotdata, PLOT_QUANTITIES};
pub use registry::{builtin, load_builtin, resolve, Builtin, BUILTINS};
pub use run::{run, CheckOutcome, OutputFile, RunError, RunManifest, ARTIFACT_VERSION};
