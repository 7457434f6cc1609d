//! Map zoo, report documents, the identity suite and the command line.

mod cli;
mod report;
mod rules;
mod spec;
mod suite;

pub use cli::run_cli;
pub use report::{write_atomic, CanonicalPayload, Parameters, Payload, RunReport, TOOL_VERSION};
pub use rules::{Rule, RuleInput, HASH_GRID};
pub use spec::{
    tabulate, CorruptionKind, Family, MapSpec, RealMatrixSource, TableEntry, UnitarySource,
    TABLE_MATCH_TOL,
};
pub use suite::{identity_suite, IdentityResult, Kernels, SuiteReport, SUITE_TOL};
