use nalgebra::{DMatrix, DVector};

use super::engine::{
    least_squares_multipliers, monotone_update, run, safeguard_duals, BarrierUpdate, Controller, Hooks, IpmOptions,
    LinearContext, StepContext,
};
use super::filter::Filter;
use super::iterate::{Bounds, Iterate};
use super::nlp::Nlp;
use super::termination::barrier_error;
use crate::error::Result;

/// `min ρ Σ(p + n) + ζ/2 ‖D (x − x_r)‖² s.t. c(x) − p + n = 0, p, n >= 0`.
pub struct RestorationNlp<'a> {
    pub outer: &'a dyn Nlp,
    n: usize,
    m: usize,
    x_ref: DVector<f64>,
    /// `ζ D_j²`
    weights: DVector<f64>,
    rho: f64,
}

impl<'a> RestorationNlp<'a> {
    pub fn new(outer: &'a dyn Nlp, x_ref: DVector<f64>, mu: f64, rho: f64) -> Self {
        let zeta = mu.sqrt();
        let weights = x_ref.map(|v| {
            let d = (1.0 / v.abs()).min(1.0);
            zeta * d * d
        });
        RestorationNlp {
            outer,
            n: outer.num_vars(),
            m: outer.num_cons(),
            x_ref,
            weights,
            rho,
        }
    }

    fn split<'v>(&self, v: &'v DVector<f64>) -> DVector<f64> {
        v.rows(0, self.n).into_owned()
    }
}

impl Nlp for RestorationNlp<'_> {
    fn num_vars(&self) -> usize {
        self.n + 2 * self.m
    }
    fn num_cons(&self) -> usize {
        self.m
    }
    fn lower_bounds(&self) -> DVector<f64> {
        let mut l = DVector::zeros(self.n + 2 * self.m);
        l.rows_mut(0, self.n).copy_from(&self.outer.lower_bounds());
        l
    }
    fn objective(&self, v: &DVector<f64>) -> Result<f64> {
        let (n, m) = (self.n, self.m);
        let pn: f64 = v.rows(n, 2 * m).sum();
        let mut prox = 0.0;
        for j in 0..n {
            let d = v[j] - self.x_ref[j];
            prox += self.weights[j] * d * d;
        }
        Ok(self.rho * pn + 0.5 * prox)
    }
    fn gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (n, m) = (self.n, self.m);
        let mut g = DVector::from_element(n + 2 * m, self.rho);
        for j in 0..n {
            g[j] = self.weights[j] * (v[j] - self.x_ref[j]);
        }
        Ok(g)
    }
    fn constraints(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (n, m) = (self.n, self.m);
        let c = self.outer.constraints(&self.split(v))?;
        Ok(c - v.rows(n, m) + v.rows(n + m, m))
    }
    fn jacobian(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (n, m) = (self.n, self.m);
        let mut jac = DMatrix::zeros(m, n + 2 * m);
        jac.view_mut((0, 0), (m, n)).copy_from(&self.outer.jacobian(&self.split(v))?);
        for i in 0..m {
            jac[(i, n + i)] = -1.0;
            jac[(i, n + m + i)] = 1.0;
        }
        Ok(jac)
    }
    fn hessian(&self, v: &DVector<f64>, obj_factor: f64, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (n, m) = (self.n, self.m);
        let mut h = DMatrix::zeros(n + 2 * m, n + 2 * m);
        let hx = self.outer.hessian(&self.split(v), 0.0, y)?;
        h.view_mut((0, 0), (n, n)).copy_from(&hx);
        for j in 0..n {
            h[(j, j)] += obj_factor * self.weights[j];
        }
        Ok(h)
    }
}

/// Monotone barrier rule that stops once the outer problem is acceptable.
struct RestorationController<'f> {
    mu_init: f64,
    theta0: f64,
    kappa: f64,
    outer_filter: &'f Filter,
    outer_bounds: &'f Bounds,
    outer_mu: f64,
    satisfied: bool,
}

impl<'a> Controller<RestorationNlp<'a>> for RestorationController<'_> {
    fn initial_mu(&self, _opts: &IpmOptions) -> f64 {
        self.mu_init
    }

    fn update_barrier(
        &mut self,
        _nlp: &mut RestorationNlp<'a>,
        ctx: &StepContext<'_>,
        _lin: &LinearContext<'_>,
    ) -> Result<BarrierUpdate> {
        let s_max = ctx.opts.s_max_effective();
        let mu = monotone_update(ctx.opts, ctx.mu, |mu| {
            Ok(barrier_error(ctx.it, ctx.bounds, mu, ctx.opts.scaled_termination, s_max))
        })?;
        Ok(BarrierUpdate {
            mu,
            params_changed: false,
        })
    }

    fn should_stop(&mut self, nlp: &RestorationNlp<'a>, it: &Iterate, _bounds: &Bounds) -> bool {
        let x = nlp.split(&it.x);
        let (Ok(c), Ok(f)) = (nlp.outer.constraints(&x), nlp.outer.objective(&x)) else {
            return false;
        };
        let theta = c.lp_norm(1);
        if !(theta <= self.kappa * self.theta0) {
            return false;
        }
        let sl = self.outer_bounds.slack(&x);
        let mut phi = f;
        for j in 0..x.len() {
            if self.outer_bounds.bounded[j] {
                if !(sl[j] > 0.0) {
                    return false;
                }
                phi -= self.outer_mu * sl[j].ln();
            }
        }
        if self.outer_filter.is_acceptable(theta, phi) {
            self.satisfied = true;
            true
        } else {
            false
        }
    }
}

pub enum RestorationOutcome {
    Recovered {
        iterate: Iterate,
        iterations: usize,
        factorizations: usize,
    },
    Failed {
        iterations: usize,
        factorizations: usize,
        reason: String,
    },
}

/// Feasibility restoration from `it`: minimizes the ℓ1 constraint violation
/// near the current point until the outer filter accepts the result.
pub fn restoration(
    nlp: &dyn Nlp,
    it: &Iterate,
    bounds: &Bounds,
    mu: f64,
    filter: &Filter,
    opts: &IpmOptions,
) -> RestorationOutcome {
    let theta0 = it.theta();
    if theta0 == 0.0 {
        return RestorationOutcome::Failed {
            iterations: 0,
            factorizations: 0,
            reason: "line search failed at a feasible point".into(),
        };
    }
    let n = it.x.len();
    let m = it.c.len();
    let rho = opts.restoration_rho;
    let mu_r = mu.max(it.c.amax());
    let mut resto = RestorationNlp::new(nlp, it.x.clone(), mu_r, rho);

    // p, n from the closed-form minimizer of the separable barrier problem
    let mut v0 = DVector::zeros(n + 2 * m);
    v0.rows_mut(0, n).copy_from(&it.x);
    for i in 0..m {
        let c = it.c[i];
        let a = (mu_r - rho * c) / (2.0 * rho);
        let nn = a + (a * a + mu_r * c / (2.0 * rho)).sqrt();
        v0[n + i] = c + nn;
        v0[n + m + i] = nn;
    }
    let mut z0 = DVector::zeros(n + 2 * m);
    for j in 0..n {
        if bounds.bounded[j] {
            z0[j] = it.z[j].min(rho);
        }
    }
    for k in n..n + 2 * m {
        z0[k] = mu_r / v0[k];
    }

    let mut inner = opts.clone();
    inner.restoration = false;
    inner.max_iter = opts.restoration_max_iter;
    inner.mu_min = inner.mu_min.min(mu_r);
    let mut ctrl = RestorationController {
        mu_init: mu_r,
        theta0,
        kappa: opts.restoration_kappa,
        outer_filter: filter,
        outer_bounds: bounds,
        outer_mu: mu,
        satisfied: false,
    };
    let out = run(&mut resto, &mut ctrl, &inner, v0, None, Some(z0), &mut Hooks::default());
    if !ctrl.satisfied {
        return RestorationOutcome::Failed {
            iterations: out.iterations,
            factorizations: out.factorizations,
            reason: format!("restoration phase ended with status {}", out.status),
        };
    }
    let x = out.iterate.x.rows(0, n).into_owned();
    let mut z = out.iterate.z.rows(0, n).into_owned();
    let sl = bounds.slack(&x);
    safeguard_duals(&mut z, &sl, bounds, mu, opts.kappa_sigma);
    match Iterate::evaluate(nlp, x, DVector::zeros(m), z) {
        Ok(mut next) => {
            next.y = least_squares_multipliers(&next.jac, &(&next.grad - &next.z), opts.y_init_max);
            RestorationOutcome::Recovered {
                iterate: next,
                iterations: out.iterations,
                factorizations: out.factorizations,
            }
        }
        Err(e) => RestorationOutcome::Failed {
            iterations: out.iterations,
            factorizations: out.factorizations,
            reason: e.to_string(),
        },
    }
}
