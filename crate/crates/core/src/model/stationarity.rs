use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::standard::StandardProblem;
use crate::error::{Result, SolverError};

/// Partition of the complementarity pairs at a (nearly) feasible point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexSets {
    /// `x1 > 0, x2 = 0`
    pub i_plus0: Vec<usize>,
    /// `x1 = 0, x2 > 0`
    pub i_0plus: Vec<usize>,
    /// biactive: `x1 = x2 = 0`
    pub i_00: Vec<usize>,
}

/// Classifies every pair; values at or below `tol` count as zero.
pub fn index_sets(x1: &[f64], x2: &[f64], tol: f64) -> Result<IndexSets> {
    let mut sets = IndexSets::default();
    for (i, (&a, &b)) in x1.iter().zip(x2).enumerate() {
        match (a > tol, b > tol) {
            (true, true) => {
                return Err(SolverError::ComplementarityInfeasible {
                    index: i,
                    residual: a * b,
                })
            }
            (true, false) => sets.i_plus0.push(i),
            (false, true) => sets.i_0plus.push(i),
            (false, false) => sets.i_00.push(i),
        }
    }
    Ok(sets)
}

/// Multipliers of the MPCC Lagrangian
/// `f + yᵀc − z0ᵀx0 − ζ1ᵀx1 − ζ2ᵀx2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpccMultipliers {
    pub y: Vec<f64>,
    pub z0: Vec<f64>,
    pub zeta1: Vec<f64>,
    pub zeta2: Vec<f64>,
}

impl MpccMultipliers {
    pub fn zeros(m: usize, n0: usize, n_cc: usize) -> Self {
        MpccMultipliers {
            y: vec![0.0; m],
            z0: vec![0.0; n0],
            zeta1: vec![0.0; n_cc],
            zeta2: vec![0.0; n_cc],
        }
    }
}

/// Residual components of the MPCC first-order conditions.
#[derive(Debug, Clone)]
pub struct MpccResidual {
    /// `∇x L^MPCC`
    pub grad_lag: DVector<f64>,
    /// `c(x)`
    pub cons: DVector<f64>,
    /// `x1_i x2_i`
    pub comp: Vec<f64>,
}

impl MpccResidual {
    pub fn stationarity_norm(&self) -> f64 {
        self.grad_lag.amax()
    }
}

/// Evaluates the MPCC Lagrangian gradient, constraints and complementarity
/// products of a standard-form problem.
pub fn mpcc_kkt_residual(
    x: &[f64],
    mult: &MpccMultipliers,
    problem: &StandardProblem,
) -> Result<MpccResidual> {
    let n = problem.num_vars();
    let m = problem.num_cons();
    let (n0, n_cc) = (problem.n0, problem.n_cc);
    for (what, got, expected) in [
        ("x", x.len(), n),
        ("y", mult.y.len(), m),
        ("z0", mult.z0.len(), n0),
        ("zeta1", mult.zeta1.len(), n_cc),
        ("zeta2", mult.zeta2.len(), n_cc),
    ] {
        if got != expected {
            return Err(SolverError::Dimension {
                what: what.into(),
                expected,
                got,
            });
        }
    }
    let mut grad = problem.gradient(x)?;
    let cons = problem.constraints(x)?;
    if m > 0 {
        let jac = problem.jacobian(x)?;
        grad += jac.transpose() * DVector::from_column_slice(&mult.y);
    }
    for j in 0..n0 {
        grad[j] -= mult.z0[j];
    }
    for i in 0..n_cc {
        grad[n0 + i] -= mult.zeta1[i];
        grad[n0 + n_cc + i] -= mult.zeta2[i];
    }
    let comp = (0..n_cc)
        .map(|i| x[n0 + i] * x[n0 + n_cc + i])
        .collect();
    Ok(MpccResidual {
        grad_lag: grad,
        cons,
        comp,
    })
}

/// Multiplier-sign stationarity labels, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stationarity {
    S,
    M,
    C,
    A,
    W,
    None,
}

impl fmt::Display for Stationarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stationarity::S => "S",
            Stationarity::M => "M",
            Stationarity::C => "C",
            Stationarity::A => "A",
            Stationarity::W => "W",
            Stationarity::None => "none",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Stationarity {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S" => Stationarity::S,
            "M" => Stationarity::M,
            "C" => Stationarity::C,
            "A" => Stationarity::A,
            "W" => Stationarity::W,
            "none" => Stationarity::None,
            _ => {
                return Err(SolverError::Parse {
                    location: "stationarity".into(),
                    message: format!("unknown label `{s}`"),
                })
            }
        })
    }
}

/// Per-pair predicates of the biactive sign conditions.
#[derive(Debug, Clone, Copy)]
pub struct BiactivePredicates {
    pub s: bool,
    pub m: bool,
    pub c: bool,
    pub a: bool,
}

pub fn biactive_predicates(zeta1: f64, zeta2: f64, tol: f64) -> BiactivePredicates {
    let prod = zeta1 * zeta2;
    BiactivePredicates {
        s: zeta1 >= -tol && zeta2 >= -tol,
        m: (zeta1 > tol && zeta2 > tol) || prod.abs() <= tol,
        c: prod >= -tol,
        a: zeta1 >= -tol || zeta2 >= -tol,
    }
}

/// Returns true when the weak-stationarity conditions hold to `tol`.
pub fn is_weakly_stationary(
    x: &[f64],
    mult: &MpccMultipliers,
    sets: &IndexSets,
    residual: &MpccResidual,
    problem: &StandardProblem,
    tol: f64,
) -> bool {
    if residual.stationarity_norm() > tol {
        return false;
    }
    if residual.cons.len() > 0 && residual.cons.amax() > tol {
        return false;
    }
    for j in 0..problem.n0 {
        if !problem.bounded[j] {
            if mult.z0[j].abs() > tol {
                return false;
            }
            continue;
        }
        if mult.z0[j] < -tol || (mult.z0[j] * x[j]).abs() > tol {
            return false;
        }
    }
    sets.i_plus0.iter().all(|&i| mult.zeta1[i].abs() <= tol)
        && sets.i_0plus.iter().all(|&i| mult.zeta2[i].abs() <= tol)
}

/// Strongest stationarity label whose predicate, together with the
/// predicates of every weaker label it implies, holds at `x`.
pub fn classify_stationarity(
    x: &[f64],
    mult: &MpccMultipliers,
    sets: &IndexSets,
    problem: &StandardProblem,
    tol: f64,
) -> Result<Stationarity> {
    let residual = mpcc_kkt_residual(x, mult, problem)?;
    if !is_weakly_stationary(x, mult, sets, &residual, problem, tol) {
        return Ok(Stationarity::None);
    }
    Ok(label_from_biactive(&mult.zeta1, &mult.zeta2, &sets.i_00, tol))
}

/// Label implied by the biactive multipliers alone, assuming W holds.
pub fn label_from_biactive(zeta1: &[f64], zeta2: &[f64], i_00: &[usize], tol: f64) -> Stationarity {
    let all = |pred: fn(&BiactivePredicates) -> bool| {
        i_00
            .iter()
            .all(|&i| pred(&biactive_predicates(zeta1[i], zeta2[i], tol)))
    };
    let (s, m, c, a) = (all(|p| p.s), all(|p| p.m), all(|p| p.c), all(|p| p.a));
    if s && m && c && a {
        Stationarity::S
    } else if m && c {
        Stationarity::M
    } else if c {
        Stationarity::C
    } else if a {
        Stationarity::A
    } else {
        Stationarity::W
    }
}

/// Least-squares MPCC multipliers at a standard point: bound multipliers
/// of inactive components (`x_j > tol`) are held at zero and the remaining
/// ones minimize `‖∇x L^MPCC‖₂`.
pub fn estimate_multipliers(x: &[f64], problem: &StandardProblem, tol: f64) -> Result<MpccMultipliers> {
    let n = problem.num_vars();
    let m = problem.num_cons();
    let (n0, n_cc) = (problem.n0, problem.n_cc);
    let grad = problem.gradient(x)?;
    let active: Vec<usize> = (0..n)
        .filter(|&j| (j >= n0 || problem.bounded[j]) && x[j] <= tol)
        .collect();
    let mut a = DMatrix::zeros(n, m + active.len());
    if m > 0 {
        a.view_mut((0, 0), (n, m)).copy_from(&problem.jacobian(x)?.transpose());
    }
    for (k, &j) in active.iter().enumerate() {
        a[(j, m + k)] = -1.0;
    }
    if a.ncols() == 0 {
        return Ok(MpccMultipliers::zeros(m, n0, n_cc));
    }
    let u = a
        .svd(true, true)
        .solve(&(-grad), 1e-12)
        .map_err(|e| SolverError::Evaluation(e.to_string()))?;
    let mut mult = MpccMultipliers::zeros(m, n0, n_cc);
    mult.y.copy_from_slice(&u.as_slice()[..m]);
    for (k, &j) in active.iter().enumerate() {
        let v = u[m + k];
        if j < n0 {
            mult.z0[j] = v;
        } else if j < n0 + n_cc {
            mult.zeta1[j - n0] = v;
        } else {
            mult.zeta2[j - n0 - n_cc] = v;
        }
    }
    Ok(mult)
}
