use nalgebra::{DMatrix, DVector};

use super::kkt::AugmentedKkt;
use super::ldl::{Inertia, Ldl};
use super::qreg::{q_regularize_critical, q_regularize_eig, QRegularization};
use crate::error::{Result, SolverError};

/// A factored KKT matrix together with the matrix itself (kept for
/// iterative refinement).
#[derive(Debug, Clone)]
pub struct Factorization {
    pub ldl: Ldl,
    pub inertia: Inertia,
    pub success: bool,
    pub matrix: DMatrix<f64>,
}

pub fn factorize(kkt: &AugmentedKkt) -> Factorization {
    factorize_matrix(kkt.matrix())
}

pub fn factorize_matrix(matrix: DMatrix<f64>) -> Factorization {
    let ldl = Ldl::factor(&matrix);
    let inertia = ldl.inertia();
    Factorization {
        success: inertia.n_zero == 0,
        ldl,
        inertia,
        matrix,
    }
}

/// Solution of `K d = −r`.
#[derive(Debug, Clone)]
pub struct Step {
    pub d: DVector<f64>,
    /// `‖K d + r‖∞` after refinement.
    pub residual: f64,
    /// Refinement did not reach `1e-8 (1 + ‖r‖∞)`.
    pub degraded: bool,
}

/// Solves `K d = −r` with one round of iterative refinement, and a second
/// when the first misses the tolerance.
pub fn solve_step(fact: &Factorization, r: &DVector<f64>) -> Step {
    let tol = 1e-8 * (1.0 + r.amax());
    let neg = -r;
    let mut d = fact.ldl.solve(&neg);
    let mut res = &fact.matrix * &d + r;
    for round in 0..2 {
        if round == 1 && res.amax() <= tol {
            break;
        }
        let corr = fact.ldl.solve(&(-&res));
        let cand = &d + corr;
        let cand_res = &fact.matrix * &cand + r;
        if !(cand_res.amax() <= res.amax()) {
            break;
        }
        d = cand;
        res = cand_res;
    }
    let residual = res.amax();
    Step {
        d,
        residual,
        degraded: !(residual <= tol),
    }
}

/// Constants of the staged inertia correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaCorrectionParams {
    pub enabled: bool,
    pub delta_w_init: f64,
    pub delta_w_min: f64,
    pub delta_w_max: f64,
    pub grow: f64,
    pub grow_first: f64,
    pub shrink: f64,
    pub delta_c_factor: f64,
    pub delta_c_exp: f64,
    /// `δ_c` used when correction is disabled.
    pub delta_c_fixed: f64,
}

impl Default for InertiaCorrectionParams {
    fn default() -> Self {
        InertiaCorrectionParams {
            enabled: true,
            delta_w_init: 1e-4,
            delta_w_min: 1e-20,
            delta_w_max: 1e40,
            grow: 8.0,
            grow_first: 100.0,
            shrink: 1.0 / 3.0,
            delta_c_factor: 1e-8,
            delta_c_exp: 0.25,
            delta_c_fixed: 0.0,
        }
    }
}

/// What the corrector had to do for one system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionAction {
    None,
    QRegularized,
    Shifted,
    /// Correction disabled and the inertia is still wrong.
    Unchecked,
}

impl std::fmt::Display for CorrectionAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorrectionAction::None => "none",
            CorrectionAction::QRegularized => "qreg",
            CorrectionAction::Shifted => "shift",
            CorrectionAction::Unchecked => "unchecked",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Corrected {
    pub fact: Factorization,
    pub delta_w: f64,
    pub delta_c: f64,
    pub action: CorrectionAction,
    pub q_modified: usize,
}

/// Stateful staged inertia correction; owns the per-solve factorization count.
#[derive(Debug, Clone)]
pub struct InertiaCorrector {
    pub params: InertiaCorrectionParams,
    pub qreg: QRegularization,
    pub delta_w_last: f64,
    pub factorizations: usize,
}

impl InertiaCorrector {
    pub fn new(params: InertiaCorrectionParams, qreg: QRegularization) -> Self {
        InertiaCorrector {
            params,
            qreg,
            delta_w_last: 0.0,
            factorizations: 0,
        }
    }

    pub fn factorize(&mut self, kkt: &AugmentedKkt) -> Factorization {
        self.factorizations += 1;
        factorize(kkt)
    }

    fn apply_qreg(&self, kkt: &mut AugmentedKkt) -> usize {
        match self.qreg {
            QRegularization::Critical { alpha_b } => q_regularize_critical(kkt, alpha_b),
            QRegularization::EigenClip { lambda_min } => q_regularize_eig(kkt, lambda_min),
            QRegularization::Off => 0,
        }
    }

    /// Factorizes `kkt`, regularizing until the inertia is `(n, m, 0)`.
    ///
    /// Stages: the unmodified matrix; the Q-regularized matrix; then
    /// increasing primal shifts `δ_w` (with `δ_c > 0` once a zero pivot was
    /// seen).
    pub fn inertia_correct(&mut self, kkt: &mut AugmentedKkt, mu: f64) -> Result<Corrected> {
        let target = kkt.target_inertia();
        let p = self.params;
        kkt.reset_blocks();
        kkt.delta_w = 0.0;
        kkt.delta_c = if p.enabled { 0.0 } else { p.delta_c_fixed };

        let fact = self.factorize(kkt);
        if fact.inertia == target {
            return Ok(self.done(fact, kkt, CorrectionAction::None, 0));
        }
        let mut seen_zero = fact.inertia.n_zero > 0;
        let mut q_modified = 0;
        if !kkt.blocks.is_empty() && self.qreg != QRegularization::Off {
            q_modified = self.apply_qreg(kkt);
            if q_modified > 0 {
                let fact = self.factorize(kkt);
                if fact.inertia == target || !p.enabled {
                    let action = if fact.inertia == target {
                        CorrectionAction::QRegularized
                    } else {
                        CorrectionAction::Unchecked
                    };
                    return Ok(self.done(fact, kkt, action, q_modified));
                }
                seen_zero |= fact.inertia.n_zero > 0;
            }
        }
        if !p.enabled {
            return Ok(self.done(fact, kkt, CorrectionAction::Unchecked, q_modified));
        }

        let delta_c = p.delta_c_factor * mu.max(0.0).powf(p.delta_c_exp);
        let mut dw = if self.delta_w_last == 0.0 {
            p.delta_w_init
        } else {
            p.delta_w_min.max(p.shrink * self.delta_w_last)
        };
        loop {
            kkt.delta_w = dw;
            kkt.delta_c = if seen_zero { delta_c } else { 0.0 };
            let fact = self.factorize(kkt);
            if fact.inertia == target {
                self.delta_w_last = dw;
                return Ok(self.done(fact, kkt, CorrectionAction::Shifted, q_modified));
            }
            if fact.inertia.n_zero > 0 && !seen_zero {
                // retry the same shift with dual regularization
                seen_zero = true;
                continue;
            }
            dw *= if self.delta_w_last == 0.0 { p.grow_first } else { p.grow };
            if dw > p.delta_w_max {
                return Err(SolverError::UnrecoverableKkt { delta_w: dw });
            }
        }
    }

    fn done(
        &self,
        mut fact: Factorization,
        kkt: &AugmentedKkt,
        action: CorrectionAction,
        q_modified: usize,
    ) -> Corrected {
        if !self.params.enabled && fact.inertia.n_zero > 0 {
            // no hidden regularization when correction is off: a singular
            // system gives a non-finite step
            fact.ldl = fact.ldl.with_zero_substitute(0.0);
        }
        Corrected {
            fact,
            delta_w: kkt.delta_w,
            delta_c: kkt.delta_c,
            action,
            q_modified,
        }
    }
}
