use nalgebra::DVector;

use super::barrier::{CompLayout, MuPolicy, QualityHook};
use super::nlp::{centered_init, plain_init, RelaxedNlp};
use super::rules::{endgame_step, update_tau_loqo, update_tau_proportional, update_tau_rolloff, EndgamePair};
use crate::error::Result;
use crate::ipm::{
    barrier_error, run, BarrierUpdate, Bounds, Controller, FactorizationEvent, Hooks, IpmOptions, Iterate,
    LinearContext, Nlp, RunOutput, StepContext,
};
use crate::model::{estimate_multipliers, to_standard_form, MpccMultipliers, MpccProblem, Stationarity, StandardProblem};
use crate::options::{Algorithm, EndgameStrategy, Options, RelaxationUpdate};
use crate::result::{classify, ipm_options, SolveResult};

/// τ rule with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    Proportional { alpha: f64, beta: f64 },
    Rolloff { a: f64, b: f64, c: f64 },
    Loqo { gamma: f64, r: f64 },
}

impl TauRule {
    pub fn from_options(opts: &Options) -> Self {
        match opts.relaxation_update {
            RelaxationUpdate::Proportional => TauRule::Proportional {
                alpha: opts.sigma_mu_ratio,
                beta: opts.sigma_mu_exp,
            },
            RelaxationUpdate::Rolloff => TauRule::Rolloff {
                a: opts.rolloff_slope,
                b: opts.rolloff_point,
                c: opts.rolloff_max,
            },
            RelaxationUpdate::Loqo => TauRule::Loqo {
                gamma: opts.gamma_for(Algorithm::Relaxation),
                r: opts.r,
            },
        }
    }

    /// τ for barrier value `mu` at the pair values `(x1, x2)`.
    pub fn tau(&self, mu: f64, x1: &[f64], x2: &[f64], sigma_min: f64) -> f64 {
        match *self {
            TauRule::Proportional { alpha, beta } => update_tau_proportional(mu, alpha, beta, sigma_min),
            TauRule::Rolloff { a, b, c } => update_tau_rolloff(mu, a, b, c, sigma_min),
            TauRule::Loqo { gamma, r } => update_tau_loqo(x1, x2, gamma, r, sigma_min),
        }
    }

    /// Starting τ; the LOQO rule has no μ coupling and starts from μ⁰.
    pub fn initial(&self, mu0: f64, sigma_min: f64) -> f64 {
        match *self {
            TauRule::Loqo { .. } => sigma_min.max(mu0),
            _ => self.tau(mu0, &[], &[], sigma_min),
        }
    }
}

/// Joint μ/τ homotopy and endgame for the relaxed NLP.
pub struct RelaxController<'h> {
    pub policy: MuPolicy<'h>,
    pub tau_rule: TauRule,
    pub sigma_min: f64,
    pub tau: f64,
    pub endgame: EndgameStrategy,
    pub endgame_threshold: f64,
    pub endgame_exp: f64,
    pub delta_max: f64,
    /// Iterations on which the endgame changed a bound.
    pub endgame_updates: usize,
    mu_init: f64,
}

impl<'h> RelaxController<'h> {
    pub fn new(opts: &Options) -> Self {
        let tau_rule = TauRule::from_options(opts);
        RelaxController {
            policy: MuPolicy::new(opts),
            tau_rule,
            sigma_min: opts.sigma_min,
            tau: tau_rule.initial(opts.mu_init, opts.sigma_min),
            endgame: opts.endgame_strategy,
            endgame_threshold: opts.endgame_threshold,
            endgame_exp: opts.tau,
            delta_max: opts.delta_max,
            endgame_updates: 0,
            mu_init: opts.mu_init,
        }
    }

    fn pair_values(nlp: &RelaxedNlp<'_>, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let n_cc = nlp.n_cc();
        (
            (0..n_cc).map(|i| x[nlp.x1_index(i)]).collect(),
            (0..n_cc).map(|i| x[nlp.x2_index(i)]).collect(),
        )
    }
}

impl<'a> Controller<RelaxedNlp<'a>> for RelaxController<'_> {
    fn initial_mu(&self, _opts: &IpmOptions) -> f64 {
        self.mu_init
    }

    fn tau(&self) -> Option<f64> {
        Some(self.tau)
    }

    fn before_factorization(&mut self, nlp: &mut RelaxedNlp<'a>, ctx: &StepContext<'_>) -> Result<bool> {
        if self.endgame != EndgameStrategy::RelaxLb || nlp.n_cc() == 0 {
            return Ok(false);
        }
        let resid = ctx.report.overall;
        if !(resid <= self.endgame_threshold) {
            return Ok(false);
        }
        let it = ctx.it;
        let pairs: Vec<EndgamePair> = (0..nlp.n_cc())
            .map(|i| EndgamePair {
                x1: it.x[nlp.x1_index(i)],
                x2: it.x[nlp.x2_index(i)],
                z1: it.z[nlp.x1_index(i)],
                z2: it.z[nlp.x2_index(i)],
                z_s: it.z[nlp.s_index(i)],
                tau: nlp.tau_v[i],
            })
            .collect();
        let (mut d1, mut d2) = (nlp.delta1.clone(), nlp.delta2.clone());
        let changed = endgame_step(&pairs, resid, self.endgame_exp, ctx.mu, self.delta_max, &mut d1, &mut d2);
        if changed {
            nlp.delta1 = d1;
            nlp.delta2 = d2;
            self.endgame_updates += 1;
        }
        Ok(changed)
    }

    fn update_barrier(
        &mut self,
        nlp: &mut RelaxedNlp<'a>,
        ctx: &StepContext<'_>,
        lin: &LinearContext<'_>,
    ) -> Result<BarrierUpdate> {
        let structure = nlp.structure();
        let (x1, x2) = Self::pair_values(nlp, &ctx.it.x);
        let rows: Vec<usize> = structure.scholtes_rows().to_vec();
        let s_max = ctx.opts.s_max_effective();
        let rule = self.tau_rule;
        let sigma_min = self.sigma_min;
        let nlp_ref: &RelaxedNlp<'a> = nlp;
        let error_at = |mu: f64| -> Result<f64> {
            let tau = vec![rule.tau(mu, &x1, &x2, sigma_min); rows.len()];
            let mut patched: Iterate = ctx.it.clone();
            for (k, v) in nlp_ref.scholtes_rows(&ctx.it.x, &tau).into_iter().enumerate() {
                patched.c[rows[k]] = v;
            }
            Ok(barrier_error(&patched, ctx.bounds, mu, ctx.opts.scaled_termination, s_max))
        };
        let layout = CompLayout {
            pairs: &structure.pairs,
            scholtes_rows: &rows,
            tau_v: &nlp_ref.tau_v,
        };
        let mu = self.policy.next_mu(ctx, lin, &layout, error_at)?;
        let mut changed = false;
        if nlp.n_cc() > 0 {
            let tau = rule.tau(mu, &x1, &x2, sigma_min);
            if nlp.tau_v.iter().any(|&t| t != tau) {
                nlp.set_tau(tau);
                changed = true;
            }
            self.tau = tau;
        }
        Ok(BarrierUpdate {
            mu,
            params_changed: changed,
        })
    }
}

/// Observers of a relaxation solve.
#[derive(Default)]
pub struct RelaxHooks<'h> {
    pub on_factorization: Option<Box<dyn FnMut(&FactorizationEvent<'_>) + 'h>>,
    pub on_quality: Option<QualityHook<'h>>,
}

/// Standard-space starting hint from the problem's initial point.
pub(crate) fn start_hint(problem: &MpccProblem, sp: &StandardProblem) -> Result<Vec<f64>> {
    match &problem.x_init {
        Some(x) => sp.from_original(x),
        None => Ok(vec![0.0; sp.num_vars()]),
    }
}

/// MPCC multipliers and result record from an engine run. `coupling(i)` is
/// the weight of `x1_i x2_i` in the Lagrangian.
pub(crate) fn build_result(
    algorithm: Algorithm,
    sp: &StandardProblem,
    out: RunOutput,
    coupling: impl Fn(&Iterate, usize) -> f64,
    tau: Option<f64>,
    rho: Option<f64>,
    class_tol: f64,
) -> SolveResult {
    let it = &out.iterate;
    let n = sp.num_vars();
    let (n0, n_cc, m) = (sp.n0, sp.n_cc, sp.num_cons());
    let x_std: Vec<f64> = it.x.as_slice()[..n].to_vec();
    let x = sp.to_original(&x_std);
    let objective = sp.problem.eval.objective(&x).unwrap_or(f64::NAN);
    let mut mult = MpccMultipliers::zeros(m, n0, n_cc);
    mult.y.copy_from_slice(&it.y.as_slice()[..m]);
    mult.z0.copy_from_slice(&it.z.as_slice()[..n0]);
    let mut comp: f64 = 0.0;
    for i in 0..n_cc {
        let (a, b) = (sp.x1_index(i), sp.x2_index(i));
        let w = coupling(it, i);
        mult.zeta1[i] = it.z[a] - w * it.x[b];
        mult.zeta2[i] = it.z[b] - w * it.x[a];
        comp = comp.max((it.x[a] * it.x[b]).abs());
    }
    let mut stationarity = classify(sp, &x_std, &mult, class_tol);
    if stationarity == Stationarity::None {
        // recovered multipliers lose accuracy when ρ x or y_s x cancels
        // against z; retry with least-squares estimates at the point
        if let Ok(est) = estimate_multipliers(&x_std, sp, class_tol) {
            stationarity = classify(sp, &x_std, &est, class_tol);
        }
    }
    SolveResult {
        algorithm: algorithm.to_string(),
        status: out.status,
        message: out.message,
        x,
        x_std,
        objective,
        multipliers: mult,
        report: out.report,
        comp_residual: comp,
        stationarity,
        iterations: out.iterations,
        factorizations: out.factorizations,
        restorations: out.restorations,
        max_delta_c: out.max_delta_c,
        mu: out.mu,
        tau,
        rho,
        logs: out.logs,
    }
}

pub fn solve_relaxation(problem: &MpccProblem, opts: &Options) -> Result<SolveResult> {
    solve_relaxation_with(problem, opts, RelaxHooks::default())
}

/// Solves `problem` by the relaxation interior-point algorithm.
pub fn solve_relaxation_with(problem: &MpccProblem, opts: &Options, hooks: RelaxHooks<'_>) -> Result<SolveResult> {
    let sp = to_standard_form(problem)?;
    solve_standard_relaxation(&sp, start_hint(problem, &sp)?, opts, hooks)
}

/// Relaxation solve of an already standardized problem from `x_hint`.
pub fn solve_standard_relaxation(
    sp: &StandardProblem,
    x_hint: Vec<f64>,
    opts: &Options,
    hooks: RelaxHooks<'_>,
) -> Result<SolveResult> {
    let mut ctrl = RelaxController::new(opts);
    ctrl.policy.quality_hook = hooks.on_quality;
    let tau0 = ctrl.tau;
    let mut nlp = RelaxedNlp::new(sp, tau0);
    let v0 = if opts.center_complementarities {
        centered_init(&nlp, &x_hint, tau0, opts.centering_factor, opts.centering_slack_mode)
    } else {
        plain_init(&nlp, &x_hint, tau0)
    };
    let ipm = ipm_options(opts, Algorithm::Relaxation);
    let mut engine_hooks = Hooks {
        on_factorization: hooks.on_factorization,
    };
    let out = run(&mut nlp, &mut ctrl, &ipm, v0, None, None, &mut engine_hooks);
    let m = sp.num_cons();
    let tau = if sp.n_cc > 0 { Some(ctrl.tau) } else { None };
    Ok(build_result(
        Algorithm::Relaxation,
        sp,
        out,
        |it, i| it.y[m + i],
        tau,
        None,
        opts.classification_tol,
    ))
}

/// Bounds of the relaxed NLP at its current endgame state (diagnostics).
pub fn relaxed_bounds(nlp: &RelaxedNlp<'_>) -> Bounds {
    Bounds::new(nlp.lower_bounds())
}
