//! Scholtes-relaxation interior-point algorithm.

mod barrier;
mod nlp;
pub mod rules;
mod solve;

pub use barrier::{
    golden_section, CompLayout, MuPolicy, QualityHook, QualityModel, QualityProbe, QUALITY_SIGMA_RANGE,
};
pub use nlp::{centered_init, plain_init, relaxed_kkt_residual, RelaxedNlp, RelaxedResidual};
pub use rules::{
    endgame_step, loqo_sigma, loqo_xi, psi, update_mu_loqo, update_mu_monotone, update_tau_loqo,
    update_tau_proportional, update_tau_rolloff, EndgamePair,
};
pub use solve::{
    relaxed_bounds, solve_relaxation, solve_relaxation_with, solve_standard_relaxation, RelaxController, RelaxHooks,
    TauRule,
};
pub(crate) use solve::{build_result, start_hint};
