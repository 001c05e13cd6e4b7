use nalgebra::{DMatrix, DVector};

use super::problem::{MpccProblem, Triplets};
use crate::error::{Result, SolverError};

/// How an original variable is expressed through a standard variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarMap {
    /// `x = lower + x̃`, `x̃ >= 0`.
    Shift(f64),
    /// `x = upper - x̃`, `x̃ >= 0`.
    Flip(f64),
    /// `x = x̃`, no bound.
    Free,
}

impl VarMap {
    fn offset(self) -> f64 {
        match self {
            VarMap::Shift(l) => l,
            VarMap::Flip(u) => u,
            VarMap::Free => 0.0,
        }
    }

    fn scale(self) -> f64 {
        match self {
            VarMap::Flip(_) => -1.0,
            _ => 1.0,
        }
    }
}

/// One equality row of the standard form.
#[derive(Debug, Clone, PartialEq)]
pub enum RowMap {
    /// `sign * (g_k(x) - rhs) - s = 0` (no `s` for equalities).
    General {
        g: usize,
        sign: f64,
        rhs: f64,
        slack: Option<usize>,
    },
    /// `x̃_var + s - rhs = 0` (no `s` for fixed variables).
    Bound {
        var: usize,
        rhs: f64,
        slack: Option<usize>,
    },
}

/// An MPCC restated as `min f(x̃) s.t. c(x̃) = 0, x̃ >= 0` with
/// `x̃ = (x̃0, x̃1, x̃2)`, where `x̃0` holds the shifted ordinary variables
/// followed by the inequality slacks.
///
/// Variables whose original bounds are both infinite (or which were fixed
/// and moved into an equality row) stay free and carry no bound.
#[derive(Debug, Clone)]
pub struct StandardProblem {
    pub problem: MpccProblem,
    /// Number of ordinary standard variables (original `x0` plus slacks).
    pub n0: usize,
    pub n_cc: usize,
    pub rows: Vec<RowMap>,
    /// Mapping of every original variable (length `n0 + 2 n_cc` of the original).
    pub var_map: Vec<(usize, VarMap)>,
    /// `bounded[j]` is true iff standard variable `j` has the bound `x̃_j >= 0`.
    pub bounded: Vec<bool>,
    /// For each standard variable, the row it is a slack of.
    pub slack_row: Vec<Option<usize>>,
}

impl StandardProblem {
    pub fn num_vars(&self) -> usize {
        self.n0 + 2 * self.n_cc
    }

    pub fn num_cons(&self) -> usize {
        self.rows.len()
    }

    pub fn x1_index(&self, i: usize) -> usize {
        self.n0 + i
    }

    pub fn x2_index(&self, i: usize) -> usize {
        self.n0 + self.n_cc + i
    }

    /// Original-space constant offset of every variable (the shift vector).
    pub fn shift(&self) -> Vec<f64> {
        self.var_map.iter().map(|(_, m)| m.offset()).collect()
    }

    pub fn is_slack(&self, j: usize) -> bool {
        self.slack_row[j].is_some()
    }

    /// Maps a standard point back to the original variables.
    pub fn to_original(&self, xs: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|&(j, map)| map.offset() + map.scale() * xs[j])
            .collect()
    }

    /// Maps an original point into the standard space, filling slacks from
    /// the constraint values.
    pub fn from_original(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = &self.problem;
        let mut xs = vec![0.0; self.num_vars()];
        for (k, &(j, map)) in self.var_map.iter().enumerate() {
            xs[j] = (x[k] - map.offset()) * map.scale();
        }
        let mut g = vec![0.0; p.m];
        if p.m > 0 {
            p.eval.constraints(x, &mut g)?;
        }
        for row in &self.rows {
            match *row {
                RowMap::General {
                    g: k,
                    sign,
                    rhs,
                    slack: Some(s),
                } => xs[s] = sign * (g[k] - rhs),
                RowMap::Bound {
                    var,
                    rhs,
                    slack: Some(s),
                } => xs[s] = rhs - xs[var],
                _ => {}
            }
        }
        Ok(xs)
    }

    pub fn objective(&self, xs: &[f64]) -> Result<f64> {
        self.problem.eval.objective(&self.to_original(xs))
    }

    pub fn gradient(&self, xs: &[f64]) -> Result<DVector<f64>> {
        let x = self.to_original(xs);
        let mut g = vec![0.0; x.len()];
        self.problem.eval.gradient(&x, &mut g)?;
        let mut out = DVector::zeros(self.num_vars());
        for (k, &(j, map)) in self.var_map.iter().enumerate() {
            out[j] += map.scale() * g[k];
        }
        Ok(out)
    }

    pub fn constraints(&self, xs: &[f64]) -> Result<DVector<f64>> {
        let p = &self.problem;
        let x = self.to_original(xs);
        let mut g = vec![0.0; p.m];
        if p.m > 0 {
            p.eval.constraints(&x, &mut g)?;
        }
        let mut c = DVector::zeros(self.num_cons());
        for (r, row) in self.rows.iter().enumerate() {
            c[r] = match *row {
                RowMap::General {
                    g: k,
                    sign,
                    rhs,
                    slack,
                } => sign * (g[k] - rhs) - slack.map_or(0.0, |s| xs[s]),
                RowMap::Bound { var, rhs, slack } => xs[var] + slack.map_or(0.0, |s| xs[s]) - rhs,
            };
        }
        Ok(c)
    }

    pub fn jacobian(&self, xs: &[f64]) -> Result<DMatrix<f64>> {
        let p = &self.problem;
        let x = self.to_original(xs);
        let mut trip = Triplets::new();
        if p.m > 0 {
            p.eval.jacobian(&x, &mut trip)?;
        }
        // original row -> standard rows built from it
        let mut from_g: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.m];
        let mut jac = DMatrix::zeros(self.num_cons(), self.num_vars());
        for (r, row) in self.rows.iter().enumerate() {
            match *row {
                RowMap::General { g, sign, slack, .. } => {
                    from_g[g].push((r, sign));
                    if let Some(s) = slack {
                        jac[(r, s)] -= 1.0;
                    }
                }
                RowMap::Bound { var, slack, .. } => {
                    jac[(r, var)] += 1.0;
                    if let Some(s) = slack {
                        jac[(r, s)] += 1.0;
                    }
                }
            }
        }
        for (gi, k, v) in trip {
            if gi >= p.m || k >= self.var_map.len() {
                return Err(SolverError::Evaluation(format!(
                    "jacobian entry ({gi}, {k}) out of range"
                )));
            }
            let (j, map) = self.var_map[k];
            for &(r, sign) in &from_g[gi] {
                jac[(r, j)] += sign * map.scale() * v;
            }
        }
        Ok(jac)
    }

    /// Full symmetric Hessian of `obj_factor f + yᵀc` in standard variables.
    pub fn hessian(&self, xs: &[f64], obj_factor: f64, y: &[f64]) -> Result<DMatrix<f64>> {
        let p = &self.problem;
        let x = self.to_original(xs);
        let mut yg = vec![0.0; p.m];
        for (r, row) in self.rows.iter().enumerate() {
            if let RowMap::General { g, sign, .. } = *row {
                yg[g] += sign * y[r];
            }
        }
        let mut trip = Triplets::new();
        p.eval.hessian(&x, obj_factor, &yg, &mut trip)?;
        let n = self.num_vars();
        let mut h = DMatrix::zeros(n, n);
        for (a, b, v) in trip {
            if a >= self.var_map.len() || b >= self.var_map.len() {
                return Err(SolverError::Evaluation(format!(
                    "hessian entry ({a}, {b}) out of range"
                )));
            }
            let (i, mi) = self.var_map[a];
            let (j, mj) = self.var_map[b];
            let w = mi.scale() * mj.scale() * v;
            h[(i, j)] += w;
            if i != j {
                h[(j, i)] += w;
            }
        }
        Ok(h)
    }
}

/// Restates `problem` with equality rows and nonnegative variables.
///
/// Two-sided constraint rows become two one-sided slack rows; finite upper
/// bounds on variables become extra rows `x̃ + s = u - l`. Complementarity
/// variables are shifted so their lower bounds sit at zero.
pub fn to_standard_form(problem: &MpccProblem) -> Result<StandardProblem> {
    problem.validate()?;
    let n0 = problem.n0;
    let n_cc = problem.n_cc;

    // Pass 1: decide the row list so the slack count is known.
    enum Pending {
        General { g: usize, sign: f64, rhs: f64, slack: bool },
        Bound { orig: usize, rhs: f64, slack: bool },
    }
    let mut pending = Vec::new();
    let mut maps: Vec<VarMap> = Vec::with_capacity(problem.num_vars());

    for j in 0..n0 {
        let (l, u) = (problem.lx0[j], problem.ux0[j]);
        let map = match (l.is_finite(), u.is_finite()) {
            (true, true) if l == u => {
                pending.push(Pending::Bound { orig: j, rhs: 0.0, slack: false });
                VarMap::Shift(l)
            }
            (true, true) => {
                pending.push(Pending::Bound { orig: j, rhs: u - l, slack: true });
                VarMap::Shift(l)
            }
            (true, false) => VarMap::Shift(l),
            (false, true) => VarMap::Flip(u),
            (false, false) => VarMap::Free,
        };
        maps.push(map);
    }
    for (side, (lower, upper)) in [(&problem.lx1, &problem.ux1), (&problem.lx2, &problem.ux2)]
        .into_iter()
        .enumerate()
    {
        for i in 0..n_cc {
            let orig = n0 + side * n_cc + i;
            let (l, u) = (lower[i], upper[i]);
            if u.is_finite() {
                pending.push(Pending::Bound { orig, rhs: u - l, slack: u > l });
            }
            maps.push(VarMap::Shift(l));
        }
    }
    for k in 0..problem.m {
        let (l, u) = (problem.lg[k], problem.ug[k]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) if l == u => pending.push(Pending::General { g: k, sign: 1.0, rhs: l, slack: false }),
            (true, true) => {
                pending.push(Pending::General { g: k, sign: 1.0, rhs: l, slack: true });
                pending.push(Pending::General { g: k, sign: -1.0, rhs: u, slack: true });
            }
            (true, false) => pending.push(Pending::General { g: k, sign: 1.0, rhs: l, slack: true }),
            (false, true) => pending.push(Pending::General { g: k, sign: -1.0, rhs: u, slack: true }),
            (false, false) => {}
        }
    }

    let n_slack = pending
        .iter()
        .filter(|p| matches!(p, Pending::General { slack: true, .. } | Pending::Bound { slack: true, .. }))
        .count();
    let n0_std = n0 + n_slack;
    let std_index = |orig: usize| -> usize {
        if orig < n0 {
            orig
        } else {
            n_slack + orig
        }
    };

    let n_std = n0_std + 2 * n_cc;
    let mut bounded = vec![true; n_std];
    let mut slack_row = vec![None; n_std];
    let var_map: Vec<(usize, VarMap)> = maps
        .iter()
        .enumerate()
        .map(|(k, &m)| (std_index(k), m))
        .collect();
    for &(j, m) in &var_map {
        if m == VarMap::Free {
            bounded[j] = false;
        }
    }

    let mut rows = Vec::with_capacity(pending.len());
    let mut next_slack = n0;
    for (r, p) in pending.into_iter().enumerate() {
        let mut take_slack = |wanted: bool| {
            if wanted {
                let s = next_slack;
                next_slack += 1;
                slack_row[s] = Some(r);
                Some(s)
            } else {
                None
            }
        };
        let row = match p {
            Pending::General { g, sign, rhs, slack } => RowMap::General {
                g,
                sign,
                rhs,
                slack: take_slack(slack),
            },
            Pending::Bound { orig, rhs, slack } => {
                let var = std_index(orig);
                if !slack && orig < n0 {
                    // fixed ordinary variable: x̃ = 0 as an equality, no bound
                    bounded[var] = false;
                }
                RowMap::Bound {
                    var,
                    rhs,
                    slack: take_slack(slack),
                }
            }
        };
        rows.push(row);
    }

    Ok(StandardProblem {
        problem: problem.clone(),
        n0: n0_std,
        n_cc,
        rows,
        var_map,
        bounded,
        slack_row,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::problem::ClosureEvaluator;

    fn quad_eval() -> Arc<ClosureEvaluator<
        impl Fn(&[f64]) -> f64 + Send + Sync,
        impl Fn(&[f64], &mut [f64]) + Send + Sync,
        impl Fn(&[f64], &mut [f64]) + Send + Sync,
        impl Fn(&[f64], &mut Triplets) + Send + Sync,
        impl Fn(&[f64], f64, &[f64], &mut Triplets) + Send + Sync,
    >> {
        // f = x0^2 + x1 + 2 x2, g = x0 + x1 * x2
        Arc::new(ClosureEvaluator {
            f: |x: &[f64]| x[0] * x[0] + x[1] + 2.0 * x[2],
            grad: |x: &[f64], g: &mut [f64]| {
                g[0] = 2.0 * x[0];
                g[1] = 1.0;
                g[2] = 2.0;
            },
            cons: |x: &[f64], g: &mut [f64]| g[0] = x[0] + x[1] * x[2],
            jac: |x: &[f64], j: &mut Triplets| {
                j.push((0, 0, 1.0));
                j.push((0, 1, x[2]));
                j.push((0, 2, x[1]));
            },
            hess: |_x: &[f64], of: f64, y: &[f64], h: &mut Triplets| {
                h.push((0, 0, 2.0 * of));
                h.push((2, 1, y[0]));
            },
        })
    }

    #[test]
    fn already_standard_is_identity() {
        let p = MpccProblem::standard_shape("id", 1, 1, 0, quad_eval());
        let s = to_standard_form(&p).unwrap();
        assert_eq!(s.num_vars(), 3);
        assert_eq!(s.num_cons(), 0);
        assert!(s.shift().iter().all(|&v| v == 0.0));
        assert!(s.bounded.iter().all(|&b| b));
        let x = [0.3, 0.7, 1.1];
        assert_eq!(s.to_original(&x), x.to_vec());
    }

    #[test]
    fn inconsistent_bounds_name_the_index() {
        let mut p = MpccProblem::standard_shape("bad", 2, 0, 0, quad_eval());
        p.lx0[1] = 3.0;
        p.ux0[1] = 1.0;
        match to_standard_form(&p) {
            Err(SolverError::InconsistentBounds { kind, index, .. }) => {
                assert_eq!(kind, "x0");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn range_row_becomes_two_slack_rows() {
        let mut p = MpccProblem::standard_shape("range", 1, 1, 1, quad_eval());
        p.lg[0] = 1.0;
        p.ug[0] = 3.0;
        let s = to_standard_form(&p).unwrap();
        assert_eq!(s.num_cons(), 2);
        assert_eq!(s.n0, 3);
        assert!(s.is_slack(1) && s.is_slack(2));
    }

    #[test]
    fn flipped_upper_bound_variable() {
        let mut p = MpccProblem::standard_shape("flip", 1, 1, 0, quad_eval());
        p.lx0[0] = f64::NEG_INFINITY;
        p.ux0[0] = 2.0;
        let s = to_standard_form(&p).unwrap();
        let x = [0.5, 1.0, 2.0];
        let xs = s.from_original(&x).unwrap();
        assert_eq!(xs[0], 1.5);
        let g = s.gradient(&xs).unwrap();
        // d/dx̃ f(2 - x̃) = -2 x0
        assert!((g[0] + 1.0).abs() < 1e-15);
    }
}
