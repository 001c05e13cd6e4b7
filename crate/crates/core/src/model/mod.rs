//! Problem representation, standard form and MPCC stationarity.

mod problem;
mod standard;
mod stationarity;

pub use problem::{ClosureEvaluator, Evaluator, MpccProblem, Triplets};
pub use standard::{to_standard_form, RowMap, StandardProblem, VarMap};
pub use stationarity::{
    biactive_predicates, classify_stationarity, index_sets, is_weakly_stationary,
    label_from_biactive, mpcc_kkt_residual, estimate_multipliers, BiactivePredicates, IndexSets, MpccMultipliers,
    MpccResidual, Stationarity,
};
