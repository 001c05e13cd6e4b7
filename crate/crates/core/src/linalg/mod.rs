//! Dense KKT assembly, factorization and regularization.

mod factor;
mod kkt;
mod ldl;
mod qreg;

pub use factor::{
    factorize, factorize_matrix, solve_step, CorrectionAction, Corrected, Factorization,
    InertiaCorrectionParams, InertiaCorrector, Step,
};
pub use kkt::{
    assemble_penalty_kkt, assemble_relaxation_kkt, barrier_sigma, recover_bound_multiplier_steps,
    AugmentedKkt, KktShape, PenaltyKktInput, QBlock, RelaxationKktInput,
};
pub use ldl::{ruiz_scaling, sym2_eigs, Inertia, Ldl, ZERO_PIVOT_TOL};
pub use qreg::{block_is_pd, clip_block, q_regularize_critical, q_regularize_eig, QRegularization};
