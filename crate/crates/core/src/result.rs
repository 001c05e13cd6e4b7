//! Solve results shared by the relaxation and penalty algorithms.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::ipm::{IpmOptions, IterLog, Status, TerminationReport};
use crate::linalg::{InertiaCorrectionParams, QRegularization};
use crate::model::{classify_stationarity, index_sets, MpccMultipliers, Stationarity, StandardProblem};
use crate::options::{Algorithm, Options, QRegScheme};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub algorithm: String,
    pub status: Status,
    pub message: Option<String>,
    /// Solution in the original variables.
    pub x: Vec<f64>,
    /// Solution in the standard-form variables.
    pub x_std: Vec<f64>,
    pub objective: f64,
    pub multipliers: MpccMultipliers,
    pub report: TerminationReport,
    /// `‖X1 x2‖∞` in the standard variables.
    pub comp_residual: f64,
    pub stationarity: Stationarity,
    pub iterations: usize,
    pub factorizations: usize,
    pub restorations: usize,
    pub max_delta_c: f64,
    pub mu: f64,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub logs: Vec<IterLog>,
}

impl SolveResult {
    /// Machine-readable `key=value` summary lines.
    pub fn summary_lines(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:e}"));
        vec![
            format!("algorithm={}", self.algorithm),
            format!("status={}", self.status),
            format!("objective={:e}", self.objective),
            format!("kkt_error={:e}", self.report.overall),
            format!("stationarity={:e}", self.report.stationarity),
            format!("constraint_violation={:e}", self.report.constraint_violation),
            format!("comp_x={:e}", self.report.comp_x),
            format!("comp_s={:e}", self.report.comp_s),
            format!("comp_cc={:e}", self.report.comp_cc),
            format!("stationarity_label={}", self.stationarity),
            format!("iterations={}", self.iterations),
            format!("factorizations={}", self.factorizations),
            format!("restorations={}", self.restorations),
            format!("max_delta_c={:e}", self.max_delta_c),
            format!("mu={:e}", self.mu),
            format!("tau={}", opt(self.tau)),
            format!("rho={}", opt(self.rho)),
            format!(
                "x={}",
                self.x.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
            ),
        ]
    }
}

/// Engine settings for `alg` derived from the named options.
pub fn ipm_options(opts: &Options, alg: Algorithm) -> IpmOptions {
    let qreg = match opts.q_regularization {
        QRegScheme::CriticalRho => QRegularization::Critical {
            alpha_b: opts.critical_rho_factor_for(alg),
        },
        QRegScheme::EigenClip => QRegularization::EigenClip {
            lambda_min: opts.min_eig_value,
        },
        QRegScheme::Off => QRegularization::Off,
    };
    IpmOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        mu_init: opts.mu_init,
        mu_min: opts.mu_min,
        scaled_termination: opts.termination_scaling,
        diverge_threshold: opts.diverge_threshold,
        inertia: InertiaCorrectionParams {
            enabled: opts.inertia_correction,
            delta_c_fixed: opts.delta_c_fixed,
            ..InertiaCorrectionParams::default()
        },
        qreg,
        deadline: opts
            .time_limit
            .map(|t| Instant::now() + Duration::from_secs_f64(t.min(1e9))),
        ..IpmOptions::default()
    }
}

/// Stationarity label of a standard point, `None` if the point is not
/// complementarity-feasible or not W-stationary at `tol`.
pub fn classify(sp: &StandardProblem, x_std: &[f64], mult: &MpccMultipliers, tol: f64) -> Stationarity {
    let x1: Vec<f64> = (0..sp.n_cc).map(|i| x_std[sp.x1_index(i)]).collect();
    let x2: Vec<f64> = (0..sp.n_cc).map(|i| x_std[sp.x2_index(i)]).collect();
    match index_sets(&x1, &x2, tol) {
        Ok(sets) => classify_stationarity(x_std, mult, &sets, sp, tol).unwrap_or(Stationarity::None),
        Err(_) => Stationarity::None,
    }
}
