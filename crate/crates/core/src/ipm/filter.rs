use nalgebra::DVector;

/// Largest `α ∈ [0, 1]` with `v + α dv >= (1 − η_b) v`, over the components
/// selected by `mask` (all when `None`).
pub fn fraction_to_boundary(v: &DVector<f64>, dv: &DVector<f64>, eta_b: f64, mask: Option<&[bool]>) -> f64 {
    let mut alpha = 1.0f64;
    for j in 0..v.len() {
        if let Some(m) = mask {
            if !m[j] {
                continue;
            }
        }
        if dv[j] < 0.0 {
            alpha = alpha.min(-eta_b * v[j] / dv[j]);
        }
    }
    alpha.max(0.0)
}

/// Filter line-search constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub gamma_theta: f64,
    pub gamma_phi: f64,
    pub s_theta: f64,
    pub s_phi: f64,
    pub eta_phi: f64,
    pub delta: f64,
    pub gamma_alpha: f64,
    pub theta_max_fact: f64,
    pub theta_min_fact: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            gamma_theta: 1e-5,
            gamma_phi: 1e-5,
            s_theta: 1.1,
            s_phi: 2.3,
            eta_phi: 1e-8,
            delta: 1.0,
            gamma_alpha: 0.05,
            theta_max_fact: 1e4,
            theta_min_fact: 1e-4,
        }
    }
}

/// Set of forbidden `(θ, φ)` corners; a point is acceptable iff it improves
/// on every entry in at least one coordinate.
#[derive(Debug, Clone, Default)]
pub struct Filter {
    entries: Vec<(f64, f64)>,
}

impl Filter {
    pub fn new() -> Self {
        Filter::default()
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn is_acceptable(&self, theta: f64, phi: f64) -> bool {
        self.entries.iter().all(|&(t, p)| theta < t || phi < p)
    }

    /// Adds a corner and drops the entries it dominates.
    pub fn add(&mut self, theta: f64, phi: f64) {
        self.entries.retain(|&(t, p)| !(theta <= t && phi <= p));
        self.entries.push((theta, phi));
    }

    /// True when no entry dominates another.
    pub fn is_consistent(&self) -> bool {
        for (i, &(ti, pi)) in self.entries.iter().enumerate() {
            for (j, &(tj, pj)) in self.entries.iter().enumerate() {
                if i != j && ti <= tj && pi <= pj {
                    return false;
                }
            }
        }
        true
    }
}

/// Outcome of the backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub accepted: bool,
    /// Step was accepted by the Armijo (objective-type) test.
    pub f_type: bool,
    pub trials: usize,
}

/// Trial evaluation supplied by the caller: `(θ, φ)` at `α`, or `None` when
/// the evaluation failed.
pub trait TrialEval {
    fn trial(&mut self, alpha: f64) -> Option<(f64, f64)>;
}

impl<F: FnMut(f64) -> Option<(f64, f64)>> TrialEval for F {
    fn trial(&mut self, alpha: f64) -> Option<(f64, f64)> {
        self(alpha)
    }
}

/// Backtracking filter line search from `alpha_max`.
///
/// `theta`, `phi` describe the current point and `grad_phi_d` the directional
/// derivative of the barrier objective. The filter is augmented on
/// h-type acceptance.
#[allow(clippy::too_many_arguments)]
pub fn filter_line_search(
    filter: &mut Filter,
    params: &FilterParams,
    theta: f64,
    phi: f64,
    grad_phi_d: f64,
    alpha_max: f64,
    theta_max: f64,
    theta_min: f64,
    trial: &mut dyn TrialEval,
) -> LineSearchResult {
    let p = params;
    let descent = grad_phi_d < 0.0;
    let alpha_min = if descent {
        let gd = -grad_phi_d;
        let mut a = p.gamma_theta;
        if theta > 0.0 {
            a = a.min(p.gamma_phi * theta / gd);
            a = a.min(p.delta * theta.powf(p.s_theta) / gd.powf(p.s_phi));
        }
        p.gamma_alpha * a
    } else {
        p.gamma_alpha * p.gamma_theta
    };
    let mut alpha = alpha_max;
    let mut trials = 0;
    while alpha >= alpha_min && alpha > 0.0 {
        trials += 1;
        if let Some((t_theta, t_phi)) = trial.trial(alpha) {
            if t_theta.is_finite() && t_phi.is_finite() && t_theta <= theta_max && filter.is_acceptable(t_theta, t_phi) {
                let switching = descent
                    && alpha * (-grad_phi_d).powf(p.s_phi) > p.delta * theta.powf(p.s_theta);
                if theta <= theta_min && switching {
                    if t_phi <= phi + p.eta_phi * alpha * grad_phi_d {
                        return LineSearchResult {
                            alpha,
                            accepted: true,
                            f_type: true,
                            trials,
                        };
                    }
                } else {
                    let theta_ok = theta > 0.0 && t_theta <= (1.0 - p.gamma_theta) * theta;
                    let phi_ok = t_phi <= phi - p.gamma_phi * theta && (theta > 0.0 || t_phi < phi);
                    if theta_ok || phi_ok {
                        filter.add((1.0 - p.gamma_theta) * theta, phi - p.gamma_phi * theta);
                        return LineSearchResult {
                            alpha,
                            accepted: true,
                            f_type: false,
                            trials,
                        };
                    }
                }
            }
        }
        alpha *= 0.5;
    }
    LineSearchResult {
        alpha: 0.0,
        accepted: false,
        f_type: false,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_to_boundary_cases() {
        let v = DVector::from_vec(vec![1.0]);
        assert_eq!(fraction_to_boundary(&v, &DVector::from_vec(vec![1.0]), 0.99, None), 1.0);
        let a = fraction_to_boundary(&v, &DVector::from_vec(vec![-1.0]), 0.99, None);
        assert!((a - 0.99).abs() < 1e-15);
        let v = DVector::from_vec(vec![2.0, 1.0]);
        let dv = DVector::from_vec(vec![-4.0, -1.0]);
        assert_eq!(fraction_to_boundary(&v, &dv, 0.5, None), 0.25);
    }

    #[test]
    fn filter_drops_dominated_entries() {
        let mut f = Filter::new();
        f.add(1.0, 1.0);
        f.add(2.0, 0.5);
        f.add(0.5, 0.4);
        assert_eq!(f.entries(), &[(0.5, 0.4)]);
        assert!(f.is_consistent());
        assert!(!f.is_acceptable(0.6, 0.6));
        assert!(f.is_acceptable(0.4, 0.6));
    }

    #[test]
    fn full_step_on_convex_quadratic() {
        // φ(x) = x², x = 1, d = -1
        let mut filter = Filter::new();
        let mut trial = |a: f64| Some((0.0, (1.0 - a) * (1.0 - a)));
        let r = filter_line_search(&mut filter, &FilterParams::default(), 0.0, 1.0, -2.0, 1.0, 1e4, 1e-4, &mut trial);
        assert!(r.accepted && r.f_type);
        assert_eq!(r.alpha, 1.0);
        assert_eq!(r.trials, 1);
    }

    #[test]
    fn ascent_with_zero_violation_rejected() {
        let mut filter = Filter::new();
        let mut trial = |a: f64| Some((0.0, 1.0 + a));
        let r = filter_line_search(&mut filter, &FilterParams::default(), 0.0, 1.0, 1.0, 1.0, 1e4, 1e-4, &mut trial);
        assert!(!r.accepted);
    }
}
