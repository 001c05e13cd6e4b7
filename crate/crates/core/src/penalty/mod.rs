//! Interior-penalty algorithm: `min f + ρ x1ᵀx2` over the standard form.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::ipm::{
    barrier_error, run, BarrierUpdate, Bounds, CompStructure, Controller, Coupling, FactorizationEvent, Hooks,
    IpmOptions, Iterate, LinearContext, Nlp, Status, StepContext,
};
use crate::model::{to_standard_form, MpccProblem, StandardProblem};
use crate::options::{Algorithm, Options, PenaltyUpdate};
use crate::relax::{build_result, start_hint, CompLayout, MuPolicy, QualityHook};
use crate::result::{ipm_options, SolveResult};

/// `min f(x) + ρ Σ x1_i x2_i  s.t.  c(x) = 0,  x >= 0` (free variables stay free).
pub struct PenaltyNlp<'a> {
    pub sp: &'a StandardProblem,
    pub rho: f64,
}

impl<'a> PenaltyNlp<'a> {
    pub fn new(sp: &'a StandardProblem, rho: f64) -> Self {
        PenaltyNlp { sp, rho }
    }

    fn comp(&self, x: &DVector<f64>) -> f64 {
        (0..self.sp.n_cc)
            .map(|i| x[self.sp.x1_index(i)] * x[self.sp.x2_index(i)])
            .sum()
    }
}

impl Nlp for PenaltyNlp<'_> {
    fn num_vars(&self) -> usize {
        self.sp.num_vars()
    }

    fn num_cons(&self) -> usize {
        self.sp.num_cons()
    }

    fn lower_bounds(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.num_vars(),
            (0..self.num_vars()).map(|j| {
                if j >= self.sp.n0 || self.sp.bounded[j] {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }),
        )
    }

    fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.sp.objective(x.as_slice())? + self.rho * self.comp(x))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut g = self.sp.gradient(x.as_slice())?;
        for i in 0..self.sp.n_cc {
            let (a, b) = (self.sp.x1_index(i), self.sp.x2_index(i));
            g[a] += self.rho * x[b];
            g[b] += self.rho * x[a];
        }
        Ok(g)
    }

    fn constraints(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.sp.constraints(x.as_slice())
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.sp.jacobian(x.as_slice())
    }

    fn hessian(&self, x: &DVector<f64>, obj_factor: f64, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut h = self.sp.hessian(x.as_slice(), obj_factor, y.as_slice())?;
        for i in 0..self.sp.n_cc {
            let (a, b) = (self.sp.x1_index(i), self.sp.x2_index(i));
            h[(a, b)] += obj_factor * self.rho;
            h[(b, a)] += obj_factor * self.rho;
        }
        Ok(h)
    }

    fn structure(&self) -> CompStructure {
        CompStructure {
            pairs: (0..self.sp.n_cc)
                .map(|i| (self.sp.x1_index(i), self.sp.x2_index(i)))
                .collect(),
            coupling: Coupling::Penalty { rho: self.rho },
        }
    }
}

/// The seven residual blocks of the perturbed penalty KKT conditions.
#[derive(Debug, Clone)]
pub struct PenaltyResidual {
    pub r1: DVector<f64>,
    pub r2: DVector<f64>,
    pub r3: DVector<f64>,
    pub r4: DVector<f64>,
    pub r5: DVector<f64>,
    pub r6: DVector<f64>,
    pub r7: DVector<f64>,
}

impl PenaltyResidual {
    pub fn max_abs(&self) -> f64 {
        [&self.r1, &self.r2, &self.r3, &self.r4, &self.r5, &self.r6, &self.r7]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.amax()))
    }
}

pub fn penalty_kkt_residual(nlp: &PenaltyNlp<'_>, it: &Iterate, mu: f64) -> PenaltyResidual {
    let bounds = Bounds::new(nlp.lower_bounds());
    let gl = it.grad_lag();
    let sp = nlp.sp;
    let (n0, n_cc) = (sp.n0, sp.n_cc);
    let sl = bounds.slack(&it.x);
    let comp = |j: usize| if bounds.bounded[j] { sl[j] * it.z[j] - mu } else { 0.0 };
    PenaltyResidual {
        r1: gl.rows(0, n0).into_owned(),
        r2: DVector::from_iterator(n_cc, (0..n_cc).map(|i| gl[sp.x1_index(i)])),
        r3: DVector::from_iterator(n_cc, (0..n_cc).map(|i| gl[sp.x2_index(i)])),
        r4: it.c.clone(),
        r5: DVector::from_iterator(n0, (0..n0).map(comp)),
        r6: DVector::from_iterator(n_cc, (0..n_cc).map(|i| comp(sp.x1_index(i)))),
        r7: DVector::from_iterator(n_cc, (0..n_cc).map(|i| comp(sp.x2_index(i)))),
    }
}

/// `min(ρ_max, α ρ)` once the barrier problem is solved, else `ρ`.
pub fn update_rho_static(rho: f64, barrier_solved: bool, growth: f64, rho_max: f64) -> f64 {
    if barrier_solved {
        rho_max.min(growth * rho)
    } else {
        rho
    }
}

/// Penalty weight with its complementarity history.
#[derive(Debug, Clone)]
pub struct PenaltyState {
    pub rho: f64,
    pub rho_max: f64,
    pub growth: f64,
    pub history: VecDeque<f64>,
    pub h: usize,
}

impl PenaltyState {
    pub fn new(rho0: f64, rho_max: f64, growth: f64, h: usize) -> Self {
        PenaltyState {
            rho: rho0.min(rho_max),
            rho_max,
            growth,
            history: VecDeque::with_capacity(h),
            h,
        }
    }

    /// Records `x1ᵀx2` of a completed iteration.
    pub fn record(&mut self, comp: f64) {
        if self.h == 0 {
            return;
        }
        if self.history.len() == self.h {
            self.history.pop_front();
        }
        self.history.push_back(comp);
    }

    /// `comp >= η · mean(history)` over a non-empty history.
    pub fn stagnating(&self, comp: f64, eta: f64) -> bool {
        !self.history.is_empty() && comp >= eta * self.history.iter().sum::<f64>() / self.history.len() as f64
    }

    /// Whether the dynamic rule asks for an increase: infeasibility
    /// `viol >= μ^γ` and `comp >= η · mean(history)` over a full history.
    pub fn dynamic_trigger(&self, viol: f64, comp: f64, mu: f64, gamma: f64, eta: f64) -> bool {
        if self.h == 0 || self.history.len() < self.h {
            return false;
        }
        let mean = self.history.iter().sum::<f64>() / self.history.len() as f64;
        viol >= mu.powf(gamma) && comp >= eta * mean
    }
}

/// Dynamic rule: `min(ρ_max, α ρ)` when the trigger fires, else `ρ`.
pub fn update_rho_dynamic(state: &PenaltyState, viol: f64, comp: f64, mu: f64, gamma: f64, eta: f64) -> f64 {
    if state.dynamic_trigger(viol, comp, mu, gamma, eta) {
        state.rho_max.min(state.growth * state.rho)
    } else {
        state.rho
    }
}

/// μ policy plus the ρ rule; ρ changes are applied before the KKT matrix is
/// built so the factorization always matches the current penalty.
pub struct PenaltyController<'h> {
    pub policy: MuPolicy<'h>,
    pub state: PenaltyState,
    pub update: PenaltyUpdate,
    pub gamma: f64,
    pub eta: f64,
    pub comp_tol: f64,
    pub increases: usize,
    saturated: bool,
    mu_init: f64,
}

impl<'h> PenaltyController<'h> {
    pub fn new(opts: &Options) -> Self {
        PenaltyController {
            policy: MuPolicy::new(opts),
            state: PenaltyState::new(opts.rho_0, opts.rho_max, opts.rho_growth_rate, opts.comp_history_length),
            update: opts.penalty_update,
            gamma: opts.gamma_for(Algorithm::Penalty),
            eta: opts.eta_dynamic_update,
            comp_tol: opts.tol,
            increases: 0,
            saturated: false,
            mu_init: opts.mu_init,
        }
    }
}

fn comp_sum(it: &Iterate, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(a, b)| it.x[a] * it.x[b]).sum()
}

fn comp_max(it: &Iterate, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().fold(0.0f64, |m, &(a, b)| m.max((it.x[a] * it.x[b]).abs()))
}

impl<'a> Controller<PenaltyNlp<'a>> for PenaltyController<'_> {
    fn initial_mu(&self, _opts: &IpmOptions) -> f64 {
        self.mu_init
    }

    fn rho(&self) -> Option<f64> {
        Some(self.state.rho)
    }

    fn before_factorization(&mut self, nlp: &mut PenaltyNlp<'a>, ctx: &StepContext<'_>) -> Result<bool> {
        let pairs = nlp.structure().pairs;
        if pairs.is_empty() {
            return Ok(false);
        }
        let it = ctx.it;
        let cmax = comp_max(it, &pairs);
        let solved = {
            let s_max = ctx.opts.s_max_effective();
            let e = barrier_error(it, ctx.bounds, ctx.mu, ctx.opts.scaled_termination, s_max);
            e <= ctx.opts.kappa_eps * ctx.mu && cmax > self.comp_tol
        };
        let wants = match self.update {
            PenaltyUpdate::Static => solved,
            PenaltyUpdate::Dynamic => {
                let viol = if it.c.is_empty() { 0.0 } else { it.c.amax() };
                let comp = comp_sum(it, &pairs);
                // a solved barrier problem whose complementarity has stopped
                // decreasing also counts, so a penalty that becomes exact
                // only at a larger ρ is reached once μ has settled
                (solved && self.state.stagnating(comp, self.eta))
                    || self.state.dynamic_trigger(viol.max(cmax), comp, ctx.mu, self.gamma, self.eta)
            }
        };
        if !wants {
            return Ok(false);
        }
        if self.state.rho >= self.state.rho_max {
            self.saturated = true;
            return Ok(false);
        }
        self.state.rho = self.state.rho_max.min(self.state.growth * self.state.rho);
        self.state.history.clear();
        self.increases += 1;
        nlp.rho = self.state.rho;
        Ok(true)
    }

    fn update_barrier(
        &mut self,
        nlp: &mut PenaltyNlp<'a>,
        ctx: &StepContext<'_>,
        lin: &LinearContext<'_>,
    ) -> Result<BarrierUpdate> {
        let structure = nlp.structure();
        let layout = CompLayout {
            pairs: &structure.pairs,
            scholtes_rows: &[],
            tau_v: &[],
        };
        let s_max = ctx.opts.s_max_effective();
        let mu = self.policy.next_mu(ctx, lin, &layout, |mu| {
            Ok(barrier_error(ctx.it, ctx.bounds, mu, ctx.opts.scaled_termination, s_max))
        })?;
        Ok(BarrierUpdate {
            mu,
            params_changed: false,
        })
    }

    fn after_accept(&mut self, nlp: &mut PenaltyNlp<'a>, it: &Iterate, _bounds: &Bounds) {
        let pairs = nlp.structure().pairs;
        self.state.record(comp_sum(it, &pairs));
    }

    fn terminal_status(&self, _nlp: &PenaltyNlp<'a>, _ctx: &StepContext<'_>) -> Option<Status> {
        self.saturated.then_some(Status::PenaltySaturated)
    }
}

/// Observers of a penalty solve.
#[derive(Default)]
pub struct PenaltyHooks<'h> {
    pub on_factorization: Option<Box<dyn FnMut(&FactorizationEvent<'_>) + 'h>>,
    pub on_quality: Option<QualityHook<'h>>,
}

pub fn solve_penalty(problem: &MpccProblem, opts: &Options) -> Result<SolveResult> {
    solve_penalty_with(problem, opts, PenaltyHooks::default())
}

pub fn solve_penalty_with(problem: &MpccProblem, opts: &Options, hooks: PenaltyHooks<'_>) -> Result<SolveResult> {
    let sp = to_standard_form(problem)?;
    solve_standard_penalty(&sp, start_hint(problem, &sp)?, opts, hooks)
}

pub fn solve_standard_penalty(
    sp: &StandardProblem,
    x_hint: Vec<f64>,
    opts: &Options,
    hooks: PenaltyHooks<'_>,
) -> Result<SolveResult> {
    let mut ctrl = PenaltyController::new(opts);
    ctrl.policy.quality_hook = hooks.on_quality;
    let mut nlp = PenaltyNlp::new(sp, ctrl.state.rho);
    let ipm = ipm_options(opts, Algorithm::Penalty);
    let mut engine_hooks = Hooks {
        on_factorization: hooks.on_factorization,
    };
    let out = run(&mut nlp, &mut ctrl, &ipm, DVector::from_vec(x_hint), None, None, &mut engine_hooks);
    let rho = ctrl.state.rho;
    let message = out.message.clone().or_else(|| {
        (out.status == Status::PenaltySaturated).then(|| format!("penalty reached rho_max = {:e}", ctrl.state.rho_max))
    });
    let mut res = build_result(
        Algorithm::Penalty,
        sp,
        out,
        |_, _| rho,
        None,
        Some(rho),
        opts.classification_tol,
    );
    res.message = message;
    Ok(res)
}
