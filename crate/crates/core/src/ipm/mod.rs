//! Primal-dual interior-point engine with a filter line search.

mod engine;
mod filter;
mod iterate;
mod nlp;
mod restoration;
mod termination;

pub use engine::{
    least_squares_multipliers, monotone_update, push_interior, run, safeguard_duals, solve_plain, BarrierUpdate,
    Controller, FactorizationEvent, Hooks, IpmOptions, IterLog, LinearContext, MonotoneController, RunOutput,
    Status, StepContext,
};
pub use filter::{filter_line_search, fraction_to_boundary, Filter, FilterParams, LineSearchResult, TrialEval};
pub use iterate::{compute_direction, Bounds, Direction, Iterate, Residuals};
pub use nlp::{CompStructure, Coupling, DenseQp, Nlp};
pub use restoration::{restoration, RestorationNlp, RestorationOutcome};
pub use termination::{
    barrier_error, check_termination, scaling_factors, termination_report, TerminationReport,
};
