use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::filter::{filter_line_search, fraction_to_boundary, Filter, FilterParams};
use super::iterate::{compute_direction, Bounds, Direction, Iterate, Residuals};
use super::nlp::{Coupling, Nlp};
use super::restoration::{restoration, RestorationOutcome};
use super::termination::{barrier_error, check_termination, termination_report, TerminationReport};
use crate::error::{Result, SolverError};
use crate::linalg::{
    barrier_sigma, AugmentedKkt, Corrected, CorrectionAction, Factorization, Inertia,
    InertiaCorrectionParams, InertiaCorrector, KktShape, QRegularization,
};

/// Final state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    MaxIter,
    RestorationFailed,
    Diverged,
    PenaltySaturated,
    Stalled,
    Failure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::MaxIter => "max_iter",
            Status::RestorationFailed => "restoration_failed",
            Status::Diverged => "diverged",
            Status::PenaltySaturated => "penalty_saturated",
            Status::Stalled => "stalled",
            Status::Failure => "failure",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "success" => Status::Success,
            "max_iter" => Status::MaxIter,
            "restoration_failed" => Status::RestorationFailed,
            "diverged" => Status::Diverged,
            "penalty_saturated" => Status::PenaltySaturated,
            "stalled" => Status::Stalled,
            "failure" => Status::Failure,
            _ => {
                return Err(SolverError::Parse {
                    location: "status".into(),
                    message: format!("unknown status `{s}`"),
                })
            }
        })
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterLog {
    pub iter: usize,
    pub mu: f64,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub f: f64,
    pub theta: f64,
    pub kkt_error: f64,
    pub comp: f64,
    pub alpha_pr: f64,
    pub alpha_du: f64,
    pub factorizations: usize,
    pub delta_w: f64,
    pub delta_c: f64,
    pub action: String,
}

impl IterLog {
    pub const CSV_HEADER: &'static str =
        "iter,mu,tau,rho,f,theta,kkt_error,comp,alpha_pr,alpha_du,factorizations,delta_w,delta_c,action";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:e}"));
        format!(
            "{},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{}",
            self.iter,
            self.mu,
            opt(self.tau),
            opt(self.rho),
            self.f,
            self.theta,
            self.kkt_error,
            self.comp,
            self.alpha_pr,
            self.alpha_du,
            self.factorizations,
            self.delta_w,
            self.delta_c,
            self.action
        )
    }
}

/// Engine settings shared by every algorithm.
#[derive(Debug, Clone)]
pub struct IpmOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    pub mu_min: f64,
    /// Barrier subproblem counts as solved when its error is `<= κ_ε μ`.
    pub kappa_eps: f64,
    pub mu_linear_decrease: f64,
    pub mu_superlinear_power: f64,
    pub scaled_termination: bool,
    pub s_max: f64,
    pub diverge_threshold: f64,
    pub bound_push: f64,
    pub kappa_sigma: f64,
    pub y_init_max: f64,
    pub inertia: InertiaCorrectionParams,
    pub qreg: QRegularization,
    pub filter: FilterParams,
    pub restoration: bool,
    pub restoration_max_iter: usize,
    pub restoration_kappa: f64,
    pub restoration_rho: f64,
    pub deadline: Option<Instant>,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            tol: 1e-8,
            max_iter: 3000,
            mu_init: 0.1,
            mu_min: 1e-9,
            kappa_eps: 10.0,
            mu_linear_decrease: 0.2,
            mu_superlinear_power: 1.5,
            scaled_termination: true,
            s_max: 100.0,
            diverge_threshold: 1e12,
            bound_push: 1e-2,
            kappa_sigma: 1e10,
            y_init_max: 1e3,
            inertia: InertiaCorrectionParams::default(),
            qreg: QRegularization::Off,
            filter: FilterParams::default(),
            restoration: true,
            restoration_max_iter: 300,
            restoration_kappa: 0.9,
            restoration_rho: 1000.0,
            deadline: None,
        }
    }
}

impl IpmOptions {
    pub fn s_max_effective(&self) -> f64 {
        if self.scaled_termination {
            self.s_max
        } else {
            f64::INFINITY
        }
    }

    /// Monotone decrease `max(μ_min, min(κ μ, μ^θ))`.
    pub fn monotone_next(&self, mu: f64) -> f64 {
        self.mu_min
            .max((self.mu_linear_decrease * mu).min(mu.powf(self.mu_superlinear_power)))
    }
}

/// Read-only view handed to a controller.
pub struct StepContext<'a> {
    pub iteration: usize,
    pub it: &'a Iterate,
    pub bounds: &'a Bounds,
    pub report: &'a TerminationReport,
    pub mu: f64,
    pub opts: &'a IpmOptions,
}

/// Current factorization and assembled system, for rules that probe
/// alternative right-hand sides.
pub struct LinearContext<'a> {
    pub fact: &'a Factorization,
    pub kkt: &'a AugmentedKkt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierUpdate {
    pub mu: f64,
    /// Problem parameters changed (cached evaluations must be refreshed).
    pub params_changed: bool,
}

/// Algorithm-specific homotopy logic driven by the engine loop.
pub trait Controller<N: Nlp> {
    fn initial_mu(&self, opts: &IpmOptions) -> f64 {
        opts.mu_init
    }

    fn tau(&self) -> Option<f64> {
        None
    }

    fn rho(&self) -> Option<f64> {
        None
    }

    /// Called before the KKT matrix is assembled; returns true when the
    /// problem (bounds, penalty, ...) was modified.
    fn before_factorization(&mut self, _nlp: &mut N, _ctx: &StepContext<'_>) -> Result<bool> {
        Ok(false)
    }

    fn update_barrier(
        &mut self,
        nlp: &mut N,
        ctx: &StepContext<'_>,
        lin: &LinearContext<'_>,
    ) -> Result<BarrierUpdate>;

    fn after_accept(&mut self, _nlp: &mut N, _it: &Iterate, _bounds: &Bounds) {}

    /// A status that ends the solve early (checked before each step).
    fn terminal_status(&self, _nlp: &N, _ctx: &StepContext<'_>) -> Option<Status> {
        None
    }

    /// Early successful stop independent of the optimality test.
    fn should_stop(&mut self, _nlp: &N, _it: &Iterate, _bounds: &Bounds) -> bool {
        false
    }

    /// Whether a point passing the optimality test may be returned.
    fn accept_termination(&self, _nlp: &N, _ctx: &StepContext<'_>) -> bool {
        true
    }
}

/// The Fiacco–McCormick monotone barrier rule.
#[derive(Debug, Clone, Default)]
pub struct MonotoneController {
    pub mu_init: Option<f64>,
}

/// One or more monotone decreases while the barrier subproblem is solved.
pub fn monotone_update(opts: &IpmOptions, mut mu: f64, mut error_at: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    for _ in 0..20 {
        if mu <= opts.mu_min {
            break;
        }
        let e = error_at(mu)?;
        if e > opts.kappa_eps * mu {
            break;
        }
        mu = opts.monotone_next(mu);
    }
    Ok(mu)
}

impl<N: Nlp> Controller<N> for MonotoneController {
    fn initial_mu(&self, opts: &IpmOptions) -> f64 {
        self.mu_init.unwrap_or(opts.mu_init)
    }

    fn update_barrier(&mut self, _nlp: &mut N, ctx: &StepContext<'_>, _lin: &LinearContext<'_>) -> Result<BarrierUpdate> {
        let s_max = ctx.opts.s_max_effective();
        let mu = monotone_update(ctx.opts, ctx.mu, |mu| {
            Ok(barrier_error(ctx.it, ctx.bounds, mu, ctx.opts.scaled_termination, s_max))
        })?;
        Ok(BarrierUpdate {
            mu,
            params_changed: false,
        })
    }
}

/// Observer payload for every factorization the engine uses for a step.
pub struct FactorizationEvent<'a> {
    pub iteration: usize,
    pub kkt: &'a AugmentedKkt,
    pub corrected: &'a Corrected,
    pub target: Inertia,
}

/// Optional observers; used by tests and diagnostics.
#[derive(Default)]
pub struct Hooks<'a> {
    pub on_factorization: Option<Box<dyn FnMut(&FactorizationEvent<'_>) + 'a>>,
}

/// Everything the engine knows when it stops.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: Status,
    pub iterate: Iterate,
    pub bounds: Bounds,
    pub report: TerminationReport,
    pub mu: f64,
    pub iterations: usize,
    pub factorizations: usize,
    pub restorations: usize,
    pub max_delta_c: f64,
    pub logs: Vec<IterLog>,
    pub message: Option<String>,
}

/// Pushes `x` strictly inside its lower bounds.
pub fn push_interior(x: &mut DVector<f64>, bounds: &Bounds, kappa: f64) {
    for j in 0..x.len() {
        if bounds.bounded[j] {
            let l = bounds.lower[j];
            let lo = l + kappa * l.abs().max(1.0);
            if !(x[j] >= lo) {
                x[j] = lo;
            }
        }
    }
}

/// Least-squares multipliers `argmin ‖∇f − z + Jᵀy‖`; zero if too large.
pub fn least_squares_multipliers(jac: &DMatrix<f64>, grad_minus_z: &DVector<f64>, cap: f64) -> DVector<f64> {
    let m = jac.nrows();
    if m == 0 {
        return DVector::zeros(0);
    }
    let jt = jac.transpose();
    let svd = jt.svd(true, true);
    match svd.solve(&(-grad_minus_z), 1e-12) {
        Ok(y) if y.iter().all(|v| v.is_finite()) && y.amax() <= cap => y,
        _ => DVector::zeros(m),
    }
}

fn shape_of(c: &Coupling) -> KktShape {
    match c {
        Coupling::None => KktShape::Plain,
        Coupling::Scholtes { .. } => KktShape::Relaxation,
        Coupling::Penalty { .. } => KktShape::Penalty,
    }
}

fn barrier_phi(f: f64, slack: &DVector<f64>, bounds: &Bounds, mu: f64) -> f64 {
    let mut phi = f;
    for j in 0..slack.len() {
        if bounds.bounded[j] {
            phi -= mu * slack[j].ln();
        }
    }
    phi
}

/// Caps `z_j` to `[μ / (κ_Σ s_j), κ_Σ μ / s_j]`.
pub fn safeguard_duals(z: &mut DVector<f64>, slack: &DVector<f64>, bounds: &Bounds, mu: f64, kappa_sigma: f64) {
    for j in 0..z.len() {
        if bounds.bounded[j] {
            let hi = kappa_sigma * mu / slack[j];
            let lo = mu / (kappa_sigma * slack[j]);
            z[j] = z[j].min(hi).max(lo);
        } else {
            z[j] = 0.0;
        }
    }
}

struct Outcome {
    status: Status,
    message: Option<String>,
}

/// Runs the filter line-search interior-point loop on `nlp` from `x0`.
///
/// `z0`, when given, seeds the bound multipliers (otherwise 1 on bounded
/// components); `y0` seeds the constraint multipliers (otherwise least
/// squares).
pub fn run<N: Nlp, C: Controller<N>>(
    nlp: &mut N,
    ctrl: &mut C,
    opts: &IpmOptions,
    x0: DVector<f64>,
    y0: Option<DVector<f64>>,
    z0: Option<DVector<f64>>,
    hooks: &mut Hooks<'_>,
) -> RunOutput {
    let mut bounds = Bounds::new(nlp.lower_bounds());
    let mut x = x0;
    push_interior(&mut x, &bounds, opts.bound_push);
    let n = nlp.num_vars();
    let m = nlp.num_cons();
    let mut z = z0.unwrap_or_else(|| DVector::from_iterator(n, (0..n).map(|j| if bounds.bounded[j] { 1.0 } else { 0.0 })));
    for j in 0..n {
        if !bounds.bounded[j] {
            z[j] = 0.0;
        }
    }
    let mut mu = ctrl.initial_mu(opts);
    let mut it = match Iterate::evaluate(nlp, x.clone(), DVector::zeros(m), z.clone()) {
        Ok(it) => it,
        Err(e) => return failed_start(nlp, x, z, bounds, e),
    };
    it.y = match y0 {
        Some(y) => y,
        None => least_squares_multipliers(&it.jac, &(&it.grad - &it.z), opts.y_init_max),
    };

    let mut corrector = InertiaCorrector::new(opts.inertia, opts.qreg);
    let mut filter = Filter::new();
    let theta0 = it.theta();
    let theta_max = opts.filter.theta_max_fact * theta0.max(1.0);
    let theta_min = opts.filter.theta_min_fact * theta0.max(1.0);
    let mut logs = Vec::new();
    let mut report = TerminationReport::default();
    let mut iterations = 0usize;
    let mut restorations = 0usize;
    let mut extra_factorizations = 0usize;
    let mut max_delta_c = 0.0f64;
    let s_max = opts.s_max_effective();

    let outcome = loop {
        let structure = nlp.structure();
        if !it.f.is_finite() || !(it.max_abs() <= opts.diverge_threshold) {
            break Outcome {
                status: Status::Diverged,
                message: Some("iterate exceeded the divergence threshold".into()),
            };
        }
        report = termination_report(&it, &bounds, &structure, opts.scaled_termination, s_max);
        let ctx = StepContext {
            iteration: iterations,
            it: &it,
            bounds: &bounds,
            report: &report,
            mu,
            opts,
        };
        if check_termination(&report, opts.tol) && ctrl.accept_termination(nlp, &ctx) {
            break Outcome {
                status: Status::Success,
                message: None,
            };
        }
        if ctrl.should_stop(nlp, &it, &bounds) {
            break Outcome {
                status: Status::Success,
                message: None,
            };
        }
        if let Some(st) = ctrl.terminal_status(nlp, &ctx) {
            break Outcome {
                status: st,
                message: None,
            };
        }
        if iterations >= opts.max_iter {
            break Outcome {
                status: Status::MaxIter,
                message: None,
            };
        }
        if let Some(d) = opts.deadline {
            if Instant::now() >= d {
                break Outcome {
                    status: Status::Failure,
                    message: Some("time limit reached".into()),
                };
            }
        }

        // problem modifications that precede the matrix (endgame, penalty)
        match ctrl.before_factorization(nlp, &ctx) {
            Ok(true) => {
                bounds = Bounds::new(nlp.lower_bounds());
                if let Err(e) = it.refresh(nlp) {
                    break Outcome {
                        status: Status::Failure,
                        message: Some(e.to_string()),
                    };
                }
                filter.clear();
            }
            Ok(false) => {}
            Err(e) => {
                break Outcome {
                    status: Status::Failure,
                    message: Some(e.to_string()),
                }
            }
        }
        let structure = nlp.structure();
        let iteration = iterations;
        iterations += 1;

        let step = (|| -> Result<Option<(AugmentedKkt, Corrected)>> {
            let hess = nlp.hessian(&it.x, 1.0, &it.y)?;
            let slack = bounds.slack(&it.x);
            let sigma = barrier_sigma(slack.as_slice(), it.z.as_slice(), &bounds.bounded)?;
            let mut kkt = AugmentedKkt::new(
                shape_of(&structure.coupling),
                hess,
                sigma,
                it.jac.clone(),
                &structure.couplings(&it.y),
            );
            match corrector.inertia_correct(&mut kkt, mu) {
                Ok(c) => Ok(Some((kkt, c))),
                Err(SolverError::UnrecoverableKkt { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })();
        let step = match step {
            Ok(s) => s,
            Err(e) => {
                break Outcome {
                    status: Status::Failure,
                    message: Some(e.to_string()),
                }
            }
        };

        let mut log = IterLog {
            iter: iteration,
            mu,
            tau: None,
            rho: None,
            f: it.f,
            theta: it.theta(),
            kkt_error: report.overall,
            comp: report.comp_cc,
            alpha_pr: 0.0,
            alpha_du: 0.0,
            factorizations: 0,
            delta_w: 0.0,
            delta_c: 0.0,
            action: String::new(),
        };

        let mut need_restoration = step.is_none();
        let mut direction: Option<Direction> = None;
        if let Some((kkt, corrected)) = &step {
            max_delta_c = max_delta_c.max(corrected.delta_c);
            log.delta_w = corrected.delta_w;
            log.delta_c = corrected.delta_c;
            log.action = corrected.action.to_string();
            if let Some(cb) = hooks.on_factorization.as_mut() {
                cb(&FactorizationEvent {
                    iteration,
                    kkt,
                    corrected,
                    target: kkt.target_inertia(),
                });
            }
            let ctx = StepContext {
                iteration,
                it: &it,
                bounds: &bounds,
                report: &report,
                mu,
                opts,
            };
            let upd = ctrl.update_barrier(
                nlp,
                &ctx,
                &LinearContext {
                    fact: &corrected.fact,
                    kkt,
                },
            );
            let upd = match upd {
                Ok(u) => u,
                Err(e) => {
                    break Outcome {
                        status: Status::Failure,
                        message: Some(e.to_string()),
                    }
                }
            };
            if upd.params_changed {
                if let Err(e) = it.refresh(nlp) {
                    break Outcome {
                        status: Status::Failure,
                        message: Some(e.to_string()),
                    };
                }
            }
            if upd.params_changed || upd.mu != mu {
                filter.clear();
            }
            mu = upd.mu;
            log.mu = mu;
            let res = Residuals::at(&it, &bounds, mu);
            let (dir, _lin_res, _degraded) = compute_direction(&corrected.fact, &it, &bounds, &res);
            if !dir.is_finite() || !(dir.max_abs() <= opts.diverge_threshold) {
                break Outcome {
                    status: Status::Diverged,
                    message: Some("search direction is unbounded".into()),
                };
            }
            direction = Some(dir);
        }
        log.tau = ctrl.tau();
        log.rho = ctrl.rho();

        if let Some(dir) = &direction {
            let eta_b = (1.0 - mu).max(0.99);
            let slack = bounds.slack(&it.x);
            let a_pr = fraction_to_boundary(&slack, &dir.dx, eta_b, Some(&bounds.bounded));
            let a_du = fraction_to_boundary(&it.z, &dir.dz, eta_b, Some(&bounds.bounded));
            let phi = barrier_phi(it.f, &slack, &bounds, mu);
            let mut gphi_d = it.grad.dot(&dir.dx);
            for j in 0..n {
                if bounds.bounded[j] {
                    gphi_d -= mu * dir.dx[j] / slack[j];
                }
            }
            let theta = it.theta();
            let tiny = (0..n).all(|j| dir.dx[j].abs() <= 10.0 * f64::EPSILON * (1.0 + it.x[j].abs()));
            let alpha = if tiny {
                Some(a_pr)
            } else {
                let nlp_ref: &N = nlp;
                let xk = &it.x;
                let bref = &bounds;
                let mut trial = |a: f64| -> Option<(f64, f64)> {
                    let xt = xk + &dir.dx * a;
                    let st = bref.slack(&xt);
                    if (0..n).any(|j| bref.bounded[j] && !(st[j] > 0.0)) {
                        return None;
                    }
                    let f = nlp_ref.objective(&xt).ok()?;
                    let c = nlp_ref.constraints(&xt).ok()?;
                    Some((c.lp_norm(1), barrier_phi(f, &st, bref, mu)))
                };
                let ls = filter_line_search(
                    &mut filter,
                    &opts.filter,
                    theta,
                    phi,
                    gphi_d,
                    a_pr,
                    theta_max,
                    theta_min,
                    &mut trial,
                );
                if ls.accepted {
                    Some(ls.alpha)
                } else {
                    None
                }
            };
            match alpha {
                Some(alpha) => {
                    let xn = &it.x + &dir.dx * alpha;
                    let yn = &it.y + &dir.dy * a_du;
                    let mut zn = &it.z + &dir.dz * a_du;
                    let sn = bounds.slack(&xn);
                    safeguard_duals(&mut zn, &sn, &bounds, mu, opts.kappa_sigma);
                    match Iterate::evaluate(nlp, xn, yn, zn) {
                        Ok(next) => it = next,
                        Err(e) => {
                            break Outcome {
                                status: Status::Failure,
                                message: Some(e.to_string()),
                            }
                        }
                    }
                    log.alpha_pr = alpha;
                    log.alpha_du = a_du;
                    ctrl.after_accept(nlp, &it, &bounds);
                }
                None => {
                    filter.add(
                        (1.0 - opts.filter.gamma_theta) * theta,
                        phi - opts.filter.gamma_phi * theta,
                    );
                    need_restoration = true;
                }
            }
        }

        if need_restoration {
            if !opts.restoration {
                log.factorizations = corrector.factorizations + extra_factorizations;
                logs.push(log);
                break Outcome {
                    status: Status::RestorationFailed,
                    message: Some("line search failed and restoration is disabled".into()),
                };
            }
            restorations += 1;
            log.action = format!("{}+resto", log.action);
            match restoration(&*nlp, &it, &bounds, mu, &filter, opts) {
                RestorationOutcome::Recovered {
                    iterate,
                    iterations: ri,
                    factorizations,
                } => {
                    iterations += ri;
                    extra_factorizations += factorizations;
                    it = iterate;
                    ctrl.after_accept(nlp, &it, &bounds);
                }
                RestorationOutcome::Failed {
                    iterations: ri,
                    factorizations,
                    reason,
                } => {
                    iterations += ri;
                    extra_factorizations += factorizations;
                    log.factorizations = corrector.factorizations + extra_factorizations;
                    logs.push(log);
                    break Outcome {
                        status: Status::RestorationFailed,
                        message: Some(reason),
                    };
                }
            }
        }
        log.factorizations = corrector.factorizations + extra_factorizations;
        logs.push(log);
    };

    RunOutput {
        status: outcome.status,
        iterate: it,
        bounds,
        report,
        mu,
        iterations,
        factorizations: corrector.factorizations + extra_factorizations,
        restorations,
        max_delta_c,
        logs,
        message: outcome.message,
    }
}

fn failed_start<N: Nlp>(nlp: &N, x: DVector<f64>, z: DVector<f64>, bounds: Bounds, e: SolverError) -> RunOutput {
    let m = nlp.num_cons();
    let n = nlp.num_vars();
    RunOutput {
        status: Status::Failure,
        iterate: Iterate {
            x,
            y: DVector::zeros(m),
            z,
            f: f64::NAN,
            grad: DVector::zeros(n),
            c: DVector::zeros(m),
            jac: DMatrix::zeros(m, n),
        },
        bounds,
        report: TerminationReport::default(),
        mu: 0.0,
        iterations: 0,
        factorizations: 0,
        restorations: 0,
        max_delta_c: 0.0,
        logs: Vec::new(),
        message: Some(e.to_string()),
    }
}

/// Convenience: solves a plain NLP with the monotone rule.
pub fn solve_plain<N: Nlp>(nlp: &mut N, opts: &IpmOptions, x0: DVector<f64>) -> RunOutput {
    let mut ctrl = MonotoneController::default();
    run(nlp, &mut ctrl, opts, x0, None, None, &mut Hooks::default())
}

#[allow(dead_code)]
fn _assert_action_display(a: CorrectionAction) -> String {
    a.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipm::DenseQp;

    fn projection_qp() -> DenseQp {
        // min (x0 − 0.5)² + (x1 − 2)² s.t. x0 + x1 = 1, x >= 0
        DenseQp {
            h: DMatrix::identity(2, 2) * 2.0,
            g: DVector::from_vec(vec![-1.0, -4.0]),
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: DVector::from_vec(vec![1.0]),
            lower: DVector::from_vec(vec![0.0, 0.0]),
        }
    }

    #[test]
    fn solves_bound_constrained_projection() {
        let mut qp = projection_qp();
        let out = solve_plain(&mut qp, &IpmOptions::default(), DVector::from_vec(vec![0.5, 0.5]));
        assert_eq!(out.status, Status::Success, "{:?}", out.message);
        let x = &out.iterate.x;
        assert!(x[0].abs() < 1e-7 && (x[1] - 1.0).abs() < 1e-7, "{x}");
        assert!((out.iterate.y[0] - 2.0).abs() < 1e-6);
        assert!((out.iterate.z[0] - 1.0).abs() < 1e-6);
        assert!(out.iterations < 30);
    }

    #[test]
    fn nonconvex_objective_uses_curvature_shift() {
        // min −x0² − x1² s.t. x0 + x1 = 1, x >= 0: optimum at a vertex
        let mut qp = projection_qp();
        qp.h = DMatrix::identity(2, 2) * -2.0;
        qp.g = DVector::from_vec(vec![0.0, 0.1]);
        let out = solve_plain(&mut qp, &IpmOptions::default(), DVector::from_vec(vec![0.5, 0.5]));
        assert_eq!(out.status, Status::Success, "{:?}", out.message);
        let x = &out.iterate.x;
        assert!((x[0] - 1.0).abs() < 1e-6 || (x[1] - 1.0).abs() < 1e-6, "{x}");
        assert!(out.logs.iter().any(|l| l.delta_w > 0.0));
    }

    #[test]
    fn infeasible_start_recovers() {
        let mut qp = projection_qp();
        let out = solve_plain(&mut qp, &IpmOptions::default(), DVector::from_vec(vec![50.0, 30.0]));
        assert_eq!(out.status, Status::Success, "{:?}", out.message);
        assert!(out.iterate.c.amax() < 1e-8);
    }

    #[test]
    fn max_iter_is_reported() {
        let mut qp = projection_qp();
        let opts = IpmOptions {
            max_iter: 1,
            ..IpmOptions::default()
        };
        let out = solve_plain(&mut qp, &opts, DVector::from_vec(vec![0.5, 0.5]));
        assert_eq!(out.status, Status::MaxIter);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn status_round_trips() {
        for s in [
            Status::Success,
            Status::MaxIter,
            Status::RestorationFailed,
            Status::Diverged,
            Status::PenaltySaturated,
            Status::Stalled,
            Status::Failure,
        ] {
            assert_eq!(s.as_str().parse::<Status>().unwrap(), s);
        }
    }
}
