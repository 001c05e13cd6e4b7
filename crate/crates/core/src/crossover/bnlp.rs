//! Branch NLP: the standard problem with one side of every pair removed.

use nalgebra::{DMatrix, DVector};

use super::Branch;
use crate::error::{Result, SolverError};
use crate::ipm::{solve_plain, Nlp, Status};
use crate::model::StandardProblem;
use crate::options::{Algorithm, Options};
use crate::result::ipm_options;

/// The standard problem restricted to the components `free`; all others
/// are held at exactly zero.
struct BranchNlp<'a> {
    sp: &'a StandardProblem,
    free: Vec<usize>,
}

impl BranchNlp<'_> {
    fn expand(&self, x: &DVector<f64>) -> Vec<f64> {
        let mut full = vec![0.0; self.sp.num_vars()];
        for (k, &j) in self.free.iter().enumerate() {
            full[j] = x[k];
        }
        full
    }

    fn restrict(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&j| v[j]))
    }
}

impl Nlp for BranchNlp<'_> {
    fn num_vars(&self) -> usize {
        self.free.len()
    }
    fn num_cons(&self) -> usize {
        self.sp.num_cons()
    }
    fn lower_bounds(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.free.len(),
            self.free
                .iter()
                .map(|&j| if self.sp.bounded[j] { 0.0 } else { f64::NEG_INFINITY }),
        )
    }
    fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        self.sp.objective(&self.expand(x))
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.restrict(&self.sp.gradient(&self.expand(x))?))
    }
    fn constraints(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.sp.constraints(&self.expand(x))
    }
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.sp.jacobian(&self.expand(x))?.select_columns(&self.free))
    }
    fn hessian(&self, x: &DVector<f64>, obj_factor: f64, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self.sp.hessian(&self.expand(x), obj_factor, y.as_slice())?;
        Ok(h.select_rows(&self.free).select_columns(&self.free))
    }
}

/// Solution of a branch NLP in the full standard variables.
#[derive(Debug, Clone)]
pub struct BnlpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// `‖c‖∞` at `x`.
    pub violation: f64,
    pub status: Status,
    pub iterations: usize,
    pub factorizations: usize,
    /// Components eliminated besides the branch sides (active bounds).
    pub polished: usize,
}

/// Solves BNLP(`branch`) from `x_init` (standard variables). Any run that
/// ends without success is reported as [`SolverError::BranchInfeasible`].
pub fn solve_bnlp(sp: &StandardProblem, branch: &Branch, x_init: &[f64], opts: &Options) -> Result<BnlpSolution> {
    let sol = solve_bnlp_any(sp, branch, x_init, opts)?;
    if sol.status != Status::Success {
        return Err(SolverError::BranchInfeasible {
            status: sol.status.to_string(),
            violation: sol.violation,
        });
    }
    Ok(sol)
}

/// One interior-point solve over the components `free`.
fn solve_free(sp: &StandardProblem, free: Vec<usize>, x_init: &[f64], opts: &Options) -> Result<(BnlpSolution, DVector<f64>)> {
    let mut nlp = BranchNlp { sp, free };
    let (x, status, iterations, factorizations, z) = if nlp.free.is_empty() {
        let x = vec![0.0; sp.num_vars()];
        let ok = sp.constraints(&x)?.amax() <= opts.tol;
        let status = if ok { Status::Success } else { Status::RestorationFailed };
        (x, status, 0, 0, DVector::zeros(0))
    } else {
        let x0 = nlp.restrict(&DVector::from_column_slice(x_init));
        let run = solve_plain(&mut nlp, &ipm_options(opts, Algorithm::Relaxation), x0);
        let x = nlp.expand(&run.iterate.x);
        (x, run.status, run.iterations, run.factorizations, run.iterate.z)
    };
    Ok((
        BnlpSolution {
            objective: sp.objective(&x)?,
            violation: sp.constraints(&x)?.amax(),
            x,
            status,
            iterations,
            factorizations,
            polished: 0,
        },
        z,
    ))
}

/// Like [`solve_bnlp`] but returns the final iterate whatever the status.
///
/// A successful solve is polished: bounded components that end strictly
/// active (`x_j <= classification_tol` with `z_j > x_j`) are eliminated as
/// well and the problem is re-solved, so active bounds come out exactly
/// zero. The polished point is kept when it solves successfully and does
/// not raise the objective beyond the solve tolerance.
pub(crate) fn solve_bnlp_any(
    sp: &StandardProblem,
    branch: &Branch,
    x_init: &[f64],
    opts: &Options,
) -> Result<BnlpSolution> {
    if !branch.is_partition(sp.n_cc) {
        return Err(SolverError::Dimension {
            what: "branch".into(),
            expected: sp.n_cc,
            got: branch.n_cc(),
        });
    }
    let mut fixed = vec![false; sp.num_vars()];
    for &i in &branch.i1 {
        fixed[sp.x2_index(i)] = true;
    }
    for &i in &branch.i2 {
        fixed[sp.x1_index(i)] = true;
    }
    let free: Vec<usize> = (0..sp.num_vars()).filter(|&j| !fixed[j]).collect();
    let (sol, z) = solve_free(sp, free.clone(), x_init, opts)?;
    if sol.status != Status::Success {
        return Ok(sol);
    }
    let active: Vec<usize> = free
        .iter()
        .enumerate()
        .filter(|&(k, &j)| sp.bounded[j] && sol.x[j] <= opts.classification_tol && z[k] > sol.x[j])
        .map(|(_, &j)| j)
        .collect();
    if active.is_empty() {
        return Ok(sol);
    }
    let rest: Vec<usize> = free.into_iter().filter(|j| !active.contains(j)).collect();
    let (mut pol, _) = solve_free(sp, rest, &sol.x, opts)?;
    let slack = 10.0 * opts.tol * (1.0 + sol.objective.abs());
    if pol.status == Status::Success && pol.objective <= sol.objective + slack {
        pol.polished = active.len();
        pol.iterations += sol.iterations;
        pol.factorizations += sol.factorizations;
        return Ok(pol);
    }
    Ok(BnlpSolution {
        iterations: sol.iterations + pol.iterations,
        factorizations: sol.factorizations + pol.factorizations,
        ..sol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{builtin, Matrix, QpccData, QPCC_FORMAT_VERSION};
    use crate::model::to_standard_form;

    #[test]
    fn two_circle_branches() {
        let sp = to_standard_form(&builtin("two-circle").unwrap()).unwrap();
        let opts = Options::default();
        let a = solve_bnlp(&sp, &Branch::from_flags(&[true]), &[0.5, 0.5], &opts).unwrap();
        assert!((a.x[0] - 1.0).abs() < 1e-7 && a.x[1] == 0.0);
        assert!((a.objective - 1.0).abs() < 1e-10);
        let b = solve_bnlp(&sp, &Branch::from_flags(&[false]), &[0.5, 0.5], &opts).unwrap();
        assert!(b.x[0] == 0.0 && (b.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn contradictory_branch_is_infeasible() {
        // x1 = 1 as a row, branch i2 forces x1 = 0
        let data = QpccData {
            version: QPCC_FORMAT_VERSION,
            name: "pinned".into(),
            n: 2,
            q_matrix: Matrix::Dense(vec![vec![0.0; 2]; 2]),
            q: vec![1.0, 1.0],
            constant: 0.0,
            a: Some(Matrix::Dense(vec![vec![1.0, 0.0]])),
            lg: vec![Some(1.0)],
            ug: vec![Some(1.0)],
            lx: vec![Some(0.0); 2],
            ux: vec![None; 2],
            pairs: vec![(0, 1)],
            x0: None,
        };
        let sp = to_standard_form(&data.to_problem().unwrap()).unwrap();
        let err = solve_bnlp(&sp, &Branch::from_flags(&[false]), &[1.0, 0.0], &Options::default()).unwrap_err();
        assert!(matches!(err, SolverError::BranchInfeasible { .. }), "{err}");
    }
}
