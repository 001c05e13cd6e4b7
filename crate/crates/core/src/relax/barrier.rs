//! Barrier-parameter policies shared by both MPCC algorithms.

use std::collections::VecDeque;

use nalgebra::DVector;

use super::rules::update_mu_loqo;
use crate::ipm::{
    compute_direction, fraction_to_boundary, monotone_update, Direction, IpmOptions, Iterate, LinearContext,
    Residuals, StepContext,
};
use crate::linalg::Factorization;
use crate::options::{BarrierRule, LoqoMode, Options};
use crate::Result;

/// Bounds of the σ search of the quality rule.
pub const QUALITY_SIGMA_RANGE: (f64, f64) = (1e-4, 10.0);

/// Linearized KKT-error model `q_L(σ)` along `Δ(σ) = Δ_aff + σ Δ_cen`.
#[derive(Debug, Clone)]
pub struct QualityModel {
    pub slack: DVector<f64>,
    pub z: DVector<f64>,
    pub bounded: Vec<bool>,
    pub x: DVector<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub grad_lag_sq: f64,
    pub cons_sq: f64,
    pub d_aff: Direction,
    pub d_cen: Direction,
    pub eta_b: f64,
}

impl QualityModel {
    pub fn direction(&self, sigma: f64) -> Direction {
        self.d_aff.axpy(sigma, &self.d_cen)
    }

    pub fn q(&self, sigma: f64) -> f64 {
        let d = self.direction(sigma);
        let a_pr = fraction_to_boundary(&self.slack, &d.dx, self.eta_b, Some(&self.bounded));
        let a_du = fraction_to_boundary(&self.z, &d.dz, self.eta_b, Some(&self.bounded));
        let mut q = (1.0 - a_du).powi(2) * self.grad_lag_sq + (1.0 - a_pr).powi(2) * self.cons_sq;
        for j in 0..self.slack.len() {
            if self.bounded[j] {
                let v = (self.z[j] + a_du * d.dz[j]) * (self.slack[j] + a_pr * d.dx[j]);
                q += v * v;
            }
        }
        for &(a, b) in &self.pairs {
            let v = (self.x[a] + a_pr * d.dx[a]) * (self.x[b] + a_pr * d.dx[b]);
            q += v * v;
        }
        q
    }
}

/// Golden-section minimization of `f` on `[lo, hi]`; the lower end point
/// is also compared so a monotone `f` returns the floor.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let (mut best, mut fbest) = if fc <= fd { (c, fc) } else { (d, fd) };
    let flo = f(lo);
    if flo <= fbest {
        best = lo;
        fbest = flo;
    }
    if f(hi) < fbest {
        best = hi;
    }
    best
}

/// Everything the quality rule computed in one iteration.
pub struct QualityProbe<'a> {
    pub iteration: usize,
    pub fact: &'a Factorization,
    /// Augmented right-hand sides of the affine and centering systems.
    pub rhs_aff: DVector<f64>,
    pub rhs_cen: DVector<f64>,
    pub model: &'a QualityModel,
    pub sigma: f64,
    pub avg: f64,
}

pub type QualityHook<'h> = Box<dyn FnMut(&QualityProbe<'_>) + 'h>;

/// Complementarity layout the policies need.
pub struct CompLayout<'a> {
    pub pairs: &'a [(usize, usize)],
    /// Relaxation rows (empty for the penalty algorithm).
    pub scholtes_rows: &'a [usize],
    /// Current τ_v (same length as `scholtes_rows`).
    pub tau_v: &'a [f64],
}

/// The μ rule with the sufficient-progress fallback of the adaptive rules.
pub struct MuPolicy<'h> {
    pub rule: BarrierRule,
    pub loqo_gamma: f64,
    pub loqo_r: f64,
    pub loqo_mode: LoqoMode,
    refs: VecDeque<f64>,
    pub quality_hook: Option<QualityHook<'h>>,
    /// Iterations on which the adaptive rule gave way to the monotone rule.
    pub fallbacks: usize,
}

impl<'h> MuPolicy<'h> {
    pub fn new(opts: &Options) -> Self {
        MuPolicy {
            rule: opts.barrier,
            loqo_gamma: opts.loqo_gamma,
            loqo_r: opts.loqo_r,
            loqo_mode: opts.loqo_mode,
            refs: VecDeque::new(),
            quality_hook: None,
            fallbacks: 0,
        }
    }

    /// Sufficient progress of the optimality error against the last few
    /// reference values.
    fn progress(&mut self, e0: f64) -> bool {
        let ok = match self.refs.iter().cloned().reduce(f64::max) {
            None => true,
            Some(r) => e0 <= 0.9999 * r,
        };
        if ok {
            self.refs.push_back(e0);
            if self.refs.len() > 4 {
                self.refs.pop_front();
            }
        }
        ok
    }

    /// Next μ. `error_at(μ)` is the barrier error used by the monotone rule.
    pub fn next_mu(
        &mut self,
        ctx: &StepContext<'_>,
        lin: &LinearContext<'_>,
        layout: &CompLayout<'_>,
        error_at: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let opts: &IpmOptions = ctx.opts;
        if self.rule == BarrierRule::Monotone {
            return monotone_update(opts, ctx.mu, error_at);
        }
        if !self.progress(ctx.report.overall) {
            self.fallbacks += 1;
            return monotone_update(opts, ctx.mu, error_at);
        }
        let it = ctx.it;
        let sl = ctx.bounds.slack(&it.x);
        let xz: Vec<f64> = (0..it.x.len())
            .filter(|&j| ctx.bounds.bounded[j])
            .map(|j| sl[j] * it.z[j])
            .collect();
        let x1x2: Vec<f64> = layout.pairs.iter().map(|&(a, b)| it.x[a] * it.x[b]).collect();
        let mu = match self.rule {
            BarrierRule::Loqo => update_mu_loqo(&xz, &x1x2, self.loqo_mode, self.loqo_gamma, self.loqo_r, opts.mu_min),
            BarrierRule::Quality => {
                let (sigma, avg) = self.quality(ctx, lin, layout, &xz, &x1x2);
                opts.mu_min.max(sigma * avg)
            }
            BarrierRule::Monotone => unreachable!(),
        };
        Ok(mu.min(1e5))
    }

    fn quality(
        &mut self,
        ctx: &StepContext<'_>,
        lin: &LinearContext<'_>,
        layout: &CompLayout<'_>,
        xz: &[f64],
        x1x2: &[f64],
    ) -> (f64, f64) {
        let it: &Iterate = ctx.it;
        let bounds = ctx.bounds;
        let count = xz.len() + x1x2.len();
        let avg = if count == 0 {
            0.0
        } else {
            (xz.iter().sum::<f64>() + x1x2.iter().map(|v| v.abs()).sum::<f64>()) / count as f64
        };
        // affine: μ = 0, τ = 0
        let mut aff = Residuals::at(it, bounds, 0.0);
        for (k, &r) in layout.scholtes_rows.iter().enumerate() {
            aff.r_c[r] += layout.tau_v[k];
        }
        // centering: zero except the complementarity and relaxation rows
        let n = it.x.len();
        let mut cen = Residuals {
            r_x: DVector::zeros(n),
            r_c: DVector::zeros(it.c.len()),
            r_z: DVector::from_iterator(n, (0..n).map(|j| if bounds.bounded[j] { -avg } else { 0.0 })),
        };
        for &r in layout.scholtes_rows {
            cen.r_c[r] = -avg;
        }
        let (d_aff, _, _) = compute_direction(lin.fact, it, bounds, &aff);
        let (d_cen, _, _) = compute_direction(lin.fact, it, bounds, &cen);

        let cons_sq: f64 = it
            .c
            .iter()
            .enumerate()
            .filter(|(r, _)| !layout.scholtes_rows.contains(r))
            .map(|(_, v)| v * v)
            .sum();
        let model = QualityModel {
            slack: bounds.slack(&it.x),
            z: it.z.clone(),
            bounded: bounds.bounded.clone(),
            x: it.x.clone(),
            pairs: layout.pairs.to_vec(),
            grad_lag_sq: it.grad_lag().norm_squared(),
            cons_sq,
            d_aff,
            d_cen,
            eta_b: (1.0 - ctx.mu).max(0.99),
        };
        let (lo, hi) = QUALITY_SIGMA_RANGE;
        let sigma = if model.d_aff.is_finite() && model.d_cen.is_finite() {
            golden_section(|s| model.q(s), lo, hi, 40)
        } else {
            0.1
        };
        if let Some(hook) = self.quality_hook.as_mut() {
            hook(&QualityProbe {
                iteration: ctx.iteration,
                fact: lin.fact,
                rhs_aff: aff.augmented_rhs(it, bounds),
                rhs_cen: cen.augmented_rhs(it, bounds),
                model: &model,
                sigma,
                avg,
            });
        }
        (sigma, avg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_interior_minimum() {
        let s = golden_section(|x| (x - 2.5) * (x - 2.5), 1e-4, 10.0, 60);
        assert!((s - 2.5).abs() < 1e-6);
    }

    #[test]
    fn golden_section_prefers_floor_for_increasing_function() {
        assert_eq!(golden_section(|x| x, 1e-4, 10.0, 40), 1e-4);
    }
}
