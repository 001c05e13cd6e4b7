//! Problem library, QPCC file format and benchmark harness.

mod builtins;
mod harness;
mod oracle;
mod qpcc;

pub use builtins::{builtin, builtin_entry, label_point, Builtin, LabeledPoint, BUILTIN_NAMES};
pub use harness::{
    performance_profile, records_csv, run_bench, BenchOptions, BenchProblem, BenchRecord, BenchSolver,
    PerformanceProfile, ProfileMetric,
};
pub use oracle::{qpcc_global_min, OracleSolution, ORACLE_CAP};
pub use qpcc::{load_problem, load_qpcc, Matrix, QpccData, QpccEvaluator, QPCC_FORMAT_VERSION};
