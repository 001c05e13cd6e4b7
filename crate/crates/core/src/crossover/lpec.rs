//! Trust-region LPCC in the step `d` at a standard point `x`:
//!
//! `min ∇f(x)ᵀd  s.t.  c(x) + ∇c(x)d = 0,  ‖d‖∞ <= Δ,  x_j + d_j >= 0` on
//! bounded components, the zero side of every non-biactive pair held at
//! zero, and `0 <= x1 + d1 ⊥ x2 + d2 >= 0` on the biactive pairs.

use nalgebra::{DMatrix, DVector};

use super::Branch;
use crate::bench::{Matrix, QpccData, QPCC_FORMAT_VERSION};
use crate::error::{Result, SolverError};
use crate::ipm::Status;
use crate::model::{index_sets, StandardProblem};
use crate::options::Options;
use crate::relax::solve_relaxation;

/// Linearization of a standard problem at `x` with its pair index sets.
#[derive(Debug, Clone)]
pub struct LpecInstance {
    pub x: Vec<f64>,
    pub grad: DVector<f64>,
    pub cons: DVector<f64>,
    pub jac: DMatrix<f64>,
    /// `x_j + d_j >= 0` is imposed where true.
    pub bounded: Vec<bool>,
    /// `(x1_i, x2_i)` variable indices.
    pub pairs: Vec<(usize, usize)>,
    pub i_plus0: Vec<usize>,
    pub i_0plus: Vec<usize>,
    pub i_00: Vec<usize>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpecSolution {
    pub d: Vec<f64>,
    pub branch: Branch,
    pub objective: f64,
}

impl LpecInstance {
    fn linearize(sp: &StandardProblem, x: &[f64], delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(SolverError::InvalidOption {
                key: "delta".into(),
                value: delta.to_string(),
                reason: "trust radius must be positive".into(),
            });
        }
        Ok(LpecInstance {
            x: x.to_vec(),
            grad: sp.gradient(x)?,
            cons: sp.constraints(x)?,
            jac: sp.jacobian(x)?,
            bounded: sp.bounded.clone(),
            pairs: (0..sp.n_cc).map(|i| (sp.x1_index(i), sp.x2_index(i))).collect(),
            i_plus0: Vec::new(),
            i_0plus: Vec::new(),
            i_00: Vec::new(),
            delta,
        })
    }

    /// LPEC at a complementarity-feasible `x`; index sets at tolerance `tol`.
    pub fn at(sp: &StandardProblem, x: &[f64], delta: f64, tol: f64) -> Result<Self> {
        let mut l = Self::linearize(sp, x, delta)?;
        let x1: Vec<f64> = l.pairs.iter().map(|p| x[p.0]).collect();
        let x2: Vec<f64> = l.pairs.iter().map(|p| x[p.1]).collect();
        let sets = index_sets(&x1, &x2, tol)?;
        l.i_plus0 = sets.i_plus0;
        l.i_0plus = sets.i_0plus;
        l.i_00 = sets.i_00;
        Ok(l)
    }

    /// Projection LPEC: every pair keeps its complementarity constraint.
    pub fn projection(sp: &StandardProblem, x: &[f64], delta: f64) -> Result<Self> {
        let mut l = Self::linearize(sp, x, delta)?;
        l.i_00 = (0..sp.n_cc).collect();
        Ok(l)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `‖c + J d‖∞`.
    pub fn linear_residual(&self, d: &[f64]) -> f64 {
        (&self.cons + &self.jac * DVector::from_column_slice(d)).amax()
    }

    pub fn objective(&self, d: &[f64]) -> f64 {
        self.grad.dot(&DVector::from_column_slice(d))
    }

    /// Whether `sol` certifies `d = 0`: either the step is below `d_tol` or
    /// no descent beyond the LP solve accuracy `tol` remains.
    pub fn is_zero_step(&self, sol: &LpecSolution, d_tol: f64, tol: f64) -> bool {
        let dn = sol.d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let slack = d_tol.max(10.0 * tol * self.delta * (1.0 + self.grad.amax()));
        dn <= d_tol || sol.objective >= -slack
    }

    /// Fixed-variable mask for a full assignment of pair sides.
    fn fixed_mask(&self, in_i1: &[bool]) -> Vec<bool> {
        let mut fixed = vec![false; self.n()];
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            fixed[if in_i1[i] { b } else { a }] = true;
        }
        fixed
    }

    /// Sides forced by the non-biactive pairs; biactive entries default to i1.
    fn forced_sides(&self) -> Vec<bool> {
        let mut s = vec![true; self.pairs.len()];
        for &i in &self.i_0plus {
            s[i] = false;
        }
        s
    }

    /// LP (or LPCC over `free_pairs`) in the unfixed components, or `None`
    /// when trivially infeasible.
    fn reduced(&self, fixed: &[bool], free_pairs: &[usize]) -> Option<Reduced> {
        let n = self.n();
        let delta = self.delta;
        let mut d = vec![0.0; n];
        for j in 0..n {
            if fixed[j] {
                if self.x[j].abs() > delta {
                    return None;
                }
                d[j] = -self.x[j];
            }
        }
        let free: Vec<usize> = (0..n).filter(|&j| !fixed[j]).collect();
        let mut local = vec![usize::MAX; n];
        for (k, &j) in free.iter().enumerate() {
            local[j] = k;
        }
        let rhs = -(&self.cons + &self.jac * DVector::from_column_slice(&d));
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut lg: Vec<Option<f64>> = Vec::new();
        let mut ug: Vec<Option<f64>> = Vec::new();
        for r in 0..self.jac.nrows() {
            let coef: Vec<f64> = free.iter().map(|&j| self.jac[(r, j)]).collect();
            if coef.iter().all(|&v| v == 0.0) {
                if rhs[r].abs() > 1e-9 * (1.0 + self.cons[r].abs()) {
                    return None;
                }
                continue;
            }
            rows.push(coef);
            lg.push(Some(rhs[r]));
            ug.push(Some(rhs[r]));
        }
        let mut paired = vec![false; n];
        for &i in free_pairs {
            let (a, b) = self.pairs[i];
            paired[a] = true;
            paired[b] = true;
        }
        let mut lx = Vec::with_capacity(free.len());
        let mut ux = Vec::with_capacity(free.len());
        for &j in &free {
            let lo = if paired[j] {
                // the pair needs its exact lower bound; the trust region
                // becomes a row when it is the tighter one
                if self.x[j] > delta {
                    let mut e = vec![0.0; free.len()];
                    e[local[j]] = 1.0;
                    rows.push(e);
                    lg.push(Some(-delta));
                    ug.push(None);
                }
                -self.x[j]
            } else if self.bounded[j] {
                (-delta).max(-self.x[j])
            } else {
                -delta
            };
            if lo > delta {
                return None;
            }
            lx.push(Some(lo));
            ux.push(Some(delta));
        }
        let nf = free.len();
        let x0: Vec<f64> = lx.iter().map(|l| l.unwrap().max(0.0).min(delta)).collect();
        let data = QpccData {
            version: QPCC_FORMAT_VERSION,
            name: "lpec".into(),
            n: nf,
            q_matrix: Matrix::Coo {
                nrows: nf,
                ncols: nf,
                entries: Vec::new(),
            },
            q: free.iter().map(|&j| self.grad[j]).collect(),
            constant: 0.0,
            a: if rows.is_empty() { None } else { Some(Matrix::Dense(rows)) },
            lg,
            ug,
            lx,
            ux,
            pairs: free_pairs
                .iter()
                .map(|&i| (local[self.pairs[i].0], local[self.pairs[i].1]))
                .collect(),
            x0: Some(x0),
        };
        Some(Reduced { d, free, data })
    }

    /// Solves the reduced problem with the interior-point core; `None` when
    /// the solve does not succeed.
    fn solve_reduced(&self, red: Reduced, opts: &Options) -> Result<Option<Vec<f64>>> {
        let Reduced { mut d, free, data } = red;
        if free.is_empty() {
            return Ok(Some(d));
        }
        let res = solve_relaxation(&data.to_problem()?, opts)?;
        if res.status != Status::Success {
            // a failed LP is infeasibility evidence; a failed LPCC is not
            if data.pairs.is_empty() {
                return Ok(None);
            }
            return Err(SolverError::SubproblemFailed {
                what: "LPCC relaxation".into(),
                status: res.status.to_string(),
            });
        }
        for (k, v) in data.to_file_order(&res.x).into_iter().enumerate() {
            d[free[k]] = v;
        }
        Ok(Some(d))
    }

    /// Branch LP for a full side assignment.
    fn branch_lp(&self, in_i1: &[bool], opts: &Options) -> Result<Option<LpecSolution>> {
        let Some(red) = self.reduced(&self.fixed_mask(in_i1), &[]) else {
            return Ok(None);
        };
        Ok(self.solve_reduced(red, opts)?.map(|d| LpecSolution {
            objective: self.objective(&d),
            d,
            branch: Branch::from_flags(in_i1),
        }))
    }

    /// Side assignments of the biactive pairs in enumeration order, starting
    /// from `first` (bit `k` set puts `i_00[k]` into `i2`).
    fn assignments(&self, first: u64) -> impl Iterator<Item = Vec<bool>> + '_ {
        let k = self.i_00.len();
        let base = self.forced_sides();
        (0..1u64 << k).map(move |mask| {
            let m = mask ^ first;
            let mut s = base.clone();
            for (b, &i) in self.i_00.iter().enumerate() {
                s[i] = m >> (k - 1 - b) & 1 == 0;
            }
            s
        })
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.i_00.len() > cap || self.i_00.len() >= 63 {
            return Err(SolverError::EnumerationCapExceeded {
                size: self.i_00.len(),
                cap,
            });
        }
        Ok(())
    }
}

struct Reduced {
    /// Full step with the fixed components filled in.
    d: Vec<f64>,
    free: Vec<usize>,
    data: QpccData,
}

/// Global LPEC solution by enumerating the biactive sides; `None` if no
/// branch is feasible. Ties keep the lexicographically first branch.
pub fn solve_lpec_enumerate(lpec: &LpecInstance, opts: &Options) -> Result<Option<LpecSolution>> {
    lpec.check_cap(opts.crossover_enum_cap)?;
    let mut best: Option<LpecSolution> = None;
    for s in lpec.assignments(0) {
        if let Some(sol) = lpec.branch_lp(&s, opts)? {
            if best
                .as_ref()
                .is_none_or(|b| sol.objective < b.objective - 1e-12 * (1.0 + b.objective.abs()))
            {
                best = Some(sol);
            }
        }
    }
    Ok(best)
}

/// LPEC through the relaxation algorithm; the branch is read off `x + d`
/// by the naive rule and its LP is re-solved so the step is exactly
/// complementary, then improved by single flips of biactive pairs.
pub fn solve_lpec_relaxed(lpec: &LpecInstance, opts: &Options) -> Result<Option<LpecSolution>> {
    let base = lpec.forced_sides();
    let mut fixed = vec![false; lpec.n()];
    for (i, &(a, b)) in lpec.pairs.iter().enumerate() {
        if !lpec.i_00.contains(&i) {
            fixed[if base[i] { b } else { a }] = true;
        }
    }
    let Some(red) = lpec.reduced(&fixed, &lpec.i_00) else {
        return Ok(None);
    };
    let Some(d) = lpec.solve_reduced(red, opts)? else {
        return Ok(None);
    };
    let mut sides = base;
    for &i in &lpec.i_00 {
        let (a, b) = lpec.pairs[i];
        sides[i] = lpec.x[a] + d[a] >= lpec.x[b] + d[b];
    }
    if let Some(mut sol) = lpec.branch_lp(&sides, opts)? {
        // local branch search: flip pairs that are biactive at x + d while
        // that lowers the LP value
        let mut budget = 4 * lpec.i_00.len();
        'search: while budget > 0 {
            for &i in &lpec.i_00 {
                let (a, b) = lpec.pairs[i];
                let other = if sides[i] { a } else { b };
                if lpec.x[other] + sol.d[other] > 1e-7 {
                    continue;
                }
                budget -= 1;
                sides[i] = !sides[i];
                match lpec.branch_lp(&sides, opts)? {
                    Some(t) if t.objective < sol.objective - 1e-9 * (1.0 + sol.objective.abs()) => {
                        sol = t;
                        continue 'search;
                    }
                    _ => sides[i] = !sides[i],
                }
                if budget == 0 {
                    break 'search;
                }
            }
            break;
        }
        return Ok(Some(sol));
    }
    Ok(Some(LpecSolution {
        objective: lpec.objective(&d),
        d,
        branch: Branch::from_flags(&sides),
    }))
}

/// Enumeration when the biactive set fits under the cap, else relaxation.
pub fn solve_lpec(lpec: &LpecInstance, opts: &Options) -> Result<Option<LpecSolution>> {
    if lpec.i_00.len() <= opts.crossover_enum_cap {
        solve_lpec_enumerate(lpec, opts)
    } else {
        solve_lpec_relaxed(lpec, opts)
    }
}

/// Any feasible step of the projection LPEC at `x` with radius `delta`;
/// branches are tried from the naive assignment outward and the first
/// feasible one is returned.
pub fn proj_lpec(sp: &StandardProblem, x: &[f64], delta: f64, opts: &Options) -> Result<Option<LpecSolution>> {
    let lpec = LpecInstance::projection(sp, x, delta)?;
    if lpec.i_00.len() > opts.crossover_enum_cap {
        return match solve_lpec_relaxed(&lpec, opts) {
            Err(SolverError::SubproblemFailed { .. }) => Ok(None),
            other => other,
        };
    }
    let k = lpec.i_00.len();
    let mut first = 0u64;
    for (b, &(a, c)) in lpec.pairs.iter().enumerate() {
        if x[a] < x[c] {
            first |= 1 << (k - 1 - b);
        }
    }
    for s in lpec.assignments(first) {
        if let Some(sol) = lpec.branch_lp(&s, opts)? {
            return Ok(Some(sol));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::builtin;
    use crate::model::to_standard_form;

    fn two_circle() -> StandardProblem {
        to_standard_form(&builtin("two-circle").unwrap()).unwrap()
    }

    #[test]
    fn two_circle_minimum_is_b_stationary() {
        let sp = two_circle();
        let opts = Options::default();
        let l = LpecInstance::at(&sp, &[1.0, 0.0], 1e-4, 1e-6).unwrap();
        assert_eq!(l.i_plus0, vec![0]);
        let sol = solve_lpec_enumerate(&l, &opts).unwrap().unwrap();
        assert!(l.is_zero_step(&sol, opts.crossover_d_tol, opts.tol));
        assert_eq!(sol.branch.i1, vec![0]);
    }

    #[test]
    fn descent_at_nonstationary_point() {
        let sp = two_circle();
        let opts = Options::default();
        let l = LpecInstance::at(&sp, &[0.5, 0.0], 0.1, 1e-6).unwrap();
        let sol = solve_lpec_enumerate(&l, &opts).unwrap().unwrap();
        assert!(sol.objective < -0.09, "{}", sol.objective);
        assert!(sol.d.iter().all(|v| v.abs() <= 0.1 + 1e-8));
    }

    #[test]
    fn biactive_enumeration_picks_best_side() {
        // tilted objective at the origin: moving along x1 descends faster
        let sp = to_standard_form(&builtin("tilted-switch").unwrap()).unwrap();
        let opts = Options::default();
        let l = LpecInstance::at(&sp, &[0.0, 0.0], 0.5, 1e-6).unwrap();
        assert_eq!(l.i_00, vec![0]);
        let sol = solve_lpec_enumerate(&l, &opts).unwrap().unwrap();
        assert_eq!(sol.branch.i1, vec![0]);
        assert!((sol.objective + 2.0).abs() < 1e-6, "{}", sol.objective);
        let relaxed = solve_lpec_relaxed(&l, &opts).unwrap().unwrap();
        assert!((relaxed.objective - sol.objective).abs() < 1e-6);
    }

    #[test]
    fn projection_near_two_circle() {
        let sp = two_circle();
        let opts = Options::default();
        let sol = proj_lpec(&sp, &[0.1, 0.1], 0.2, &opts).unwrap().unwrap();
        let y: Vec<f64> = (0..2).map(|j| 0.1 + sol.d[j]).collect();
        assert_eq!(y[0] * y[1], 0.0);
        assert!(proj_lpec(&sp, &[0.1, 0.1], 0.05, &opts).unwrap().is_none());
        let zero = proj_lpec(&sp, &[1.0, 0.0], 1e-3, &opts).unwrap().unwrap();
        assert_eq!(zero.d[1], 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let sp = two_circle();
        let mut opts = Options::default();
        opts.crossover_enum_cap = 0;
        let l = LpecInstance::at(&sp, &[0.0, 0.0], 1.0, 1e-6).unwrap();
        assert!(matches!(
            solve_lpec_enumerate(&l, &opts),
            Err(SolverError::EnumerationCapExceeded { size: 1, cap: 0 })
        ));
    }
}
