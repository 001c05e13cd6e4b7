//! Complementarity active-set method and the LPEC crossover driver.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bnlp::{solve_bnlp, solve_bnlp_any};
use super::lpec::{proj_lpec, solve_lpec, LpecInstance};
use super::Branch;
use crate::error::{Result, SolverError};
use crate::ipm::{Status, TerminationReport};
use crate::model::{estimate_multipliers, mpcc_kkt_residual, to_standard_form, MpccProblem, StandardProblem};
use crate::options::{Algorithm, Options};
use crate::penalty::solve_penalty;
use crate::relax::solve_relaxation;
use crate::result::{classify, SolveResult};

const TR_GROW: f64 = 2.0;
const TR_SHRINK: f64 = 0.25;

/// One line of the crossover iteration table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub iter: usize,
    pub lpecs: usize,
    pub bnlps: usize,
    pub i00: usize,
    pub delta: f64,
    pub step_norm: Option<f64>,
    pub delta_f: Option<f64>,
    pub description: String,
}

impl CrossoverRow {
    pub const HEADER: [&'static str; 8] = ["Iter", "#LPCC", "#BNLP", "|I00|", "Delta", "step norm", "Delta f", "description"];

    pub fn format_table(rows: &[CrossoverRow]) -> String {
        let opt = |v: Option<f64>| v.map_or("--".to_string(), |v| format!("{v:.2e}"));
        let mut out = String::new();
        let h = Self::HEADER;
        let _ = writeln!(
            out,
            "{:>4} {:>6} {:>6} {:>6} {:>9} {:>10} {:>10}  {}",
            h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:>4} {:>6} {:>6} {:>6} {:>9.2e} {:>10} {:>10}  {}",
                r.iter,
                r.lpecs,
                r.bnlps,
                r.i00,
                r.delta,
                opt(r.step_norm),
                opt(r.delta_f),
                r.description
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ActiveSetOutcome {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
    pub branch: Branch,
    pub lpec_count: usize,
    pub bnlp_count: usize,
    /// Objective after each accepted BNLP step.
    pub accepted: Vec<f64>,
    pub rows: Vec<CrossoverRow>,
    pub factorizations: usize,
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()))
}

/// Trust-region active-set loop from a point `x0` feasible for
/// BNLP(`branch0`); stops when the LPEC step vanishes.
pub fn active_set_method(
    sp: &StandardProblem,
    x0: &[f64],
    branch0: &Branch,
    delta0: f64,
    opts: &Options,
) -> Result<ActiveSetOutcome> {
    let mut out = ActiveSetOutcome {
        status: Status::Stalled,
        x: x0.to_vec(),
        objective: sp.objective(x0)?,
        branch: branch0.clone(),
        lpec_count: 0,
        bnlp_count: 0,
        accepted: Vec::new(),
        rows: Vec::new(),
        factorizations: 0,
    };
    let mut delta = delta0;
    for iter in 1..=opts.crossover_max_iter {
        let lpec = LpecInstance::at(sp, &out.x, delta, opts.classification_tol)?;
        let i00 = lpec.i_00.len();
        let mut row = CrossoverRow {
            iter,
            lpecs: 1,
            bnlps: 0,
            i00,
            delta,
            step_norm: None,
            delta_f: None,
            description: String::new(),
        };
        out.lpec_count += 1;
        let Some(sol) = solve_lpec(&lpec, opts)? else {
            row.description = "LPEC infeasible".into();
            out.rows.push(row);
            out.status = Status::Failure;
            return Ok(out);
        };
        if lpec.is_zero_step(&sol, opts.crossover_d_tol, opts.tol) {
            row.description = "B-stat. verified".into();
            out.rows.push(row);
            out.status = Status::Success;
            return Ok(out);
        }
        let start: Vec<f64> = out.x.iter().zip(&sol.d).map(|(x, d)| x + d).collect();
        out.bnlp_count += 1;
        row.bnlps = 1;
        match solve_bnlp(sp, &sol.branch, &start, opts) {
            Ok(bn) => {
                out.factorizations += bn.factorizations;
                let df = bn.objective - out.objective;
                row.delta_f = Some(df);
                // strict decrease beyond rounding of f
                if bn.objective < out.objective - 1e-14 * (1.0 + out.objective.abs()) {
                    row.step_norm = Some(inf_norm_diff(&bn.x, &out.x));
                    row.description = "BNLP step".into();
                    out.x = bn.x;
                    out.objective = bn.objective;
                    out.branch = sol.branch;
                    out.accepted.push(out.objective);
                    delta *= TR_GROW;
                } else {
                    row.description = "BNLP step rejected".into();
                    delta *= TR_SHRINK;
                }
            }
            Err(SolverError::BranchInfeasible { .. }) => {
                row.description = "BNLP infeasible".into();
                delta *= TR_SHRINK;
            }
            Err(e) => return Err(e),
        }
        out.rows.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CrossoverOutcome {
    pub result: SolveResult,
    pub rows: Vec<CrossoverRow>,
    pub lpec_count: usize,
    pub bnlp_count: usize,
    /// Branch of the returned point, when one was identified.
    pub branch: Option<Branch>,
}

impl CrossoverOutcome {
    pub fn table(&self) -> String {
        CrossoverRow::format_table(&self.rows)
    }
}

fn comp_max(sp: &StandardProblem, x: &[f64]) -> f64 {
    (0..sp.n_cc).fold(0.0f64, |m, i| m.max((x[sp.x1_index(i)] * x[sp.x2_index(i)]).abs()))
}

/// Result record for a standard point reached by crossover.
fn point_result(
    algorithm: String,
    sp: &StandardProblem,
    x_std: Vec<f64>,
    status: Status,
    message: Option<String>,
    iterations: usize,
    factorizations: usize,
    tol: f64,
) -> Result<SolveResult> {
    let mult = estimate_multipliers(&x_std, sp, tol)?;
    let res = mpcc_kkt_residual(&x_std, &mult, sp)?;
    let comp_x = (0..sp.n0).fold(0.0f64, |m, j| m.max((mult.z0[j] * x_std[j]).abs()));
    let comp = comp_max(sp, &x_std);
    let report = TerminationReport::from_components(res.stationarity_norm(), res.cons.amax(), comp_x, 0.0, comp);
    let x = sp.to_original(&x_std);
    Ok(SolveResult {
        algorithm,
        status,
        message,
        objective: sp.problem.eval.objective(&x).unwrap_or(f64::NAN),
        stationarity: classify(sp, &x_std, &mult, tol),
        x,
        x_std,
        multipliers: mult,
        report,
        comp_residual: comp,
        iterations,
        factorizations,
        restorations: 0,
        max_delta_c: 0.0,
        mu: 0.0,
        tau: None,
        rho: None,
        logs: Vec::new(),
    })
}

/// Crossover from the approximate standard point `x_hat`: projection onto a
/// branch, a branch NLP solve, then the active-set method.
pub fn crossover_driver(sp: &StandardProblem, x_hat: &[f64], opts: &Options) -> Result<CrossoverOutcome> {
    let name = "crossover".to_string();
    let infeas = sp.constraints(x_hat)?.amax().max(comp_max(sp, x_hat));
    let mut delta = (opts.crossover_delta_factor * infeas).max(opts.crossover_d_tol);
    let mut rows = Vec::new();
    let mut lpecs = 0;
    let mut found = None;
    while delta <= opts.crossover_delta_max {
        lpecs += 1;
        if let Some(sol) = proj_lpec(sp, x_hat, delta, opts)? {
            found = Some(sol);
            break;
        }
        delta *= opts.crossover_growth;
    }
    let Some(proj) = found else {
        rows.push(CrossoverRow {
            iter: 0,
            lpecs,
            bnlps: 0,
            i00: sp.n_cc,
            delta: delta / opts.crossover_growth,
            step_norm: None,
            delta_f: None,
            description: "Projection failed".into(),
        });
        let msg = format!("no feasible projection within radius {:e}", opts.crossover_delta_max);
        let result = point_result(name, sp, x_hat.to_vec(), Status::Failure, Some(msg), 0, 0, opts.classification_tol)?;
        return Ok(CrossoverOutcome {
            result,
            rows,
            lpec_count: lpecs,
            bnlp_count: 0,
            branch: None,
        });
    };
    let branch = proj.branch.clone();
    let mut x_try: Vec<f64> = x_hat.iter().zip(&proj.d).map(|(x, d)| x + d).collect();
    let mut gamma = delta;
    let mut bnlps = 0;
    let mut factorizations = 0;
    let mut start = None;
    for _ in 0..opts.crossover_bnlp_tries {
        bnlps += 1;
        let bn = solve_bnlp_any(sp, &branch, &x_try, opts)?;
        factorizations += bn.factorizations;
        if bn.status == Status::Success || bn.violation <= gamma {
            start = Some(bn);
            break;
        }
        x_try = bn.x;
        gamma *= opts.crossover_gamma_shrink;
    }
    rows.push(CrossoverRow {
        iter: 0,
        lpecs,
        bnlps,
        i00: sp.n_cc,
        delta,
        step_norm: None,
        delta_f: None,
        description: if start.is_some() { "Projection." } else { "Projection; BNLP failed" }.into(),
    });
    let Some(start) = start else {
        let result = point_result(
            name,
            sp,
            x_try,
            Status::Failure,
            Some("branch NLP infeasible on the projected branch".into()),
            0,
            factorizations,
            opts.classification_tol,
        )?;
        return Ok(CrossoverOutcome {
            result,
            rows,
            lpec_count: lpecs,
            bnlp_count: bnlps,
            branch: Some(branch),
        });
    };
    let asm = active_set_method(sp, &start.x, &branch, opts.crossover_verify_delta, opts)?;
    rows.extend(asm.rows.iter().cloned());
    let message = match asm.status {
        Status::Success => None,
        Status::Stalled => Some(format!("active-set cap of {} iterations reached", opts.crossover_max_iter)),
        _ => Some("LPEC infeasible at a branch-feasible point".into()),
    };
    let result = point_result(
        name,
        sp,
        asm.x,
        asm.status,
        message,
        rows.len(),
        factorizations + asm.factorizations,
        opts.classification_tol,
    )?;
    Ok(CrossoverOutcome {
        result,
        rows,
        lpec_count: lpecs + asm.lpec_count,
        bnlp_count: bnlps + asm.bnlp_count,
        branch: Some(asm.branch),
    })
}

/// Regularization solve at the looser `crossover.tol`, then crossover from
/// its solution. Returns the first-phase result and the crossover outcome.
pub fn solve_with_crossover(
    problem: &MpccProblem,
    algorithm: Algorithm,
    opts: &Options,
) -> Result<(SolveResult, CrossoverOutcome)> {
    let mut phase1 = opts.clone();
    phase1.tol = opts.crossover_tol;
    let first = match algorithm {
        Algorithm::Relaxation => solve_relaxation(problem, &phase1)?,
        Algorithm::Penalty => solve_penalty(problem, &phase1)?,
    };
    let sp = to_standard_form(problem)?;
    let mut outcome = crossover_driver(&sp, &first.x_std, opts)?;
    outcome.result.algorithm = format!("{algorithm}+crossover");
    Ok((first, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::builtin;

    fn sp(name: &str) -> StandardProblem {
        to_standard_form(&builtin(name).unwrap()).unwrap()
    }

    #[test]
    fn stationary_start_stops_at_once() {
        let sp = sp("two-circle");
        let opts = Options::default();
        let out = active_set_method(&sp, &[1.0, 0.0], &Branch::from_flags(&[true]), 1e-4, &opts).unwrap();
        assert_eq!(out.status, Status::Success);
        assert_eq!((out.lpec_count, out.accepted.len()), (1, 0));
    }

    #[test]
    fn tilted_local_minimum_is_certified() {
        // (0, 1) minimizes the i2 branch and is not biactive: no LPEC step
        // can leave the branch, so it is certified in place
        let sp = sp("tilted-switch");
        let opts = Options::default();
        let out = active_set_method(&sp, &[0.0, 1.0], &Branch::from_flags(&[false]), 1.0, &opts).unwrap();
        assert_eq!(out.status, Status::Success);
        assert_eq!(out.objective, 4.0);
        assert!(out.accepted.is_empty());
    }

    #[test]
    fn tilted_switches_branch_from_origin() {
        let sp = sp("tilted-switch");
        let opts = Options::default();
        let out = active_set_method(&sp, &[0.0, 0.0], &Branch::from_flags(&[false]), 1.0, &opts).unwrap();
        assert_eq!(out.status, Status::Success, "{}", CrossoverRow::format_table(&out.rows));
        assert!((out.objective - 1.0).abs() < 1e-8);
        assert_eq!(out.x[1], 0.0);
        assert!((out.x[0] - 2.0).abs() < 1e-6);
        assert_eq!(out.accepted.len(), 1);
        assert_eq!(out.branch.i1, vec![0]);
    }

    #[test]
    fn grossly_infeasible_start_fails() {
        let data = crate::bench::builtin_entry("degenerate-jacobian").unwrap();
        let sp = to_standard_form(&data.problem().unwrap()).unwrap();
        let x = vec![1e4; sp.num_vars()];
        let out = crossover_driver(&sp, &x, &Options::default()).unwrap();
        assert_eq!(out.result.status, Status::Failure);
    }
}
