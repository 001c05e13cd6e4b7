//! Quadratic programs with complementarity constraints: file schema and
//! exact-derivative evaluator.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::model::{Evaluator, MpccProblem, Triplets};

pub const QPCC_FORMAT_VERSION: u32 = 1;

/// Dense rows or coordinate entries `(row, col, value)`; duplicates sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matrix {
    Dense(Vec<Vec<f64>>),
    Coo {
        nrows: usize,
        ncols: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

impl Matrix {
    pub fn to_dense(&self, field: &str, nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(nrows, ncols);
        match self {
            Matrix::Dense(rows) => {
                if rows.len() != nrows {
                    return Err(parse_err(field, format!("expected {nrows} rows, got {}", rows.len())));
                }
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != ncols {
                        return Err(parse_err(
                            &format!("{field}[{i}]"),
                            format!("expected {ncols} columns, got {}", r.len()),
                        ));
                    }
                    for (j, &v) in r.iter().enumerate() {
                        out[(i, j)] = v;
                    }
                }
            }
            Matrix::Coo { nrows: r, ncols: c, entries } => {
                if (*r, *c) != (nrows, ncols) {
                    return Err(parse_err(field, format!("expected shape {nrows}x{ncols}, got {r}x{c}")));
                }
                for (k, &(i, j, v)) in entries.iter().enumerate() {
                    if i >= nrows || j >= ncols {
                        return Err(parse_err(&format!("{field}.entries[{k}]"), format!("index ({i}, {j}) out of range")));
                    }
                    out[(i, j)] += v;
                }
            }
        }
        Ok(out)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        Matrix::Dense(m.row_iter().map(|r| r.iter().cloned().collect()).collect())
    }
}

/// `min ½xᵀQx + qᵀx + c0  s.t.  lg <= Ax <= ug,  lx <= x <= ux,
/// x_i ⊥ x_j for (i, j) in pairs`. Infinite bounds are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpccData {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub q_matrix: Matrix,
    pub q: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub a: Option<Matrix>,
    #[serde(default)]
    pub lg: Vec<Option<f64>>,
    #[serde(default)]
    pub ug: Vec<Option<f64>>,
    pub lx: Vec<Option<f64>>,
    pub ux: Vec<Option<f64>>,
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

fn parse_err(location: &str, message: impl Into<String>) -> SolverError {
    SolverError::Parse {
        location: location.to_string(),
        message: message.into(),
    }
}

fn lower(v: &Option<f64>) -> f64 {
    v.unwrap_or(f64::NEG_INFINITY)
}

fn upper(v: &Option<f64>) -> f64 {
    v.unwrap_or(f64::INFINITY)
}

impl QpccData {
    pub fn num_rows(&self) -> usize {
        self.lg.len()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: QpccData = serde_json::from_str(text)
            .map_err(|e| parse_err(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        data.validate()?;
        Ok(data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("QPCC data serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != QPCC_FORMAT_VERSION {
            return Err(parse_err("version", format!("unsupported version {}", self.version)));
        }
        let n = self.n;
        let q = self.q_matrix.to_dense("q_matrix", n, n)?;
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (q[(i, j)], q[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(parse_err(&format!("q_matrix[{i}][{j}]"), "matrix is not symmetric"));
                }
            }
        }
        for (field, len) in [("q", self.q.len()), ("lx", self.lx.len()), ("ux", self.ux.len())] {
            if len != n {
                return Err(parse_err(field, format!("expected length {n}, got {len}")));
            }
        }
        let m = self.lg.len();
        if self.ug.len() != m {
            return Err(parse_err("ug", format!("expected length {m}, got {}", self.ug.len())));
        }
        match &self.a {
            Some(a) => {
                a.to_dense("a", m, n)?;
            }
            None if m > 0 => return Err(parse_err("a", "missing constraint matrix")),
            None => {}
        }
        let mut seen = vec![false; n];
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            for (side, v) in [(0, i), (1, j)] {
                if v >= n {
                    return Err(parse_err(&format!("pairs[{k}][{side}]"), format!("index {v} out of range")));
                }
                if seen[v] {
                    return Err(parse_err(&format!("pairs[{k}][{side}]"), format!("variable {v} already paired")));
                }
                seen[v] = true;
                if self.lx[v].is_none() {
                    return Err(parse_err(&format!("lx[{v}]"), "paired variable needs a finite lower bound"));
                }
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != n {
                return Err(parse_err("x0", format!("expected length {n}, got {}", x0.len())));
            }
        }
        Ok(())
    }

    /// Problem-variable order: unpaired variables, then the first and the
    /// second members of the pairs. `perm[k]` is the file index of problem
    /// variable `k`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut paired = vec![false; self.n];
        for &(i, j) in &self.pairs {
            paired[i] = true;
            paired[j] = true;
        }
        let mut perm: Vec<usize> = (0..self.n).filter(|&k| !paired[k]).collect();
        perm.extend(self.pairs.iter().map(|p| p.0));
        perm.extend(self.pairs.iter().map(|p| p.1));
        perm
    }

    /// Reorders a problem-order vector into file order.
    pub fn to_file_order(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (k, &f) in self.permutation().iter().enumerate() {
            out[f] = x[k];
        }
        out
    }

    /// Builds the MPCC with exact derivatives (assumes `validate` passed).
    pub fn to_problem(&self) -> Result<MpccProblem> {
        self.validate()?;
        let n = self.n;
        let m = self.num_rows();
        let perm = self.permutation();
        let q_file = self.q_matrix.to_dense("q_matrix", n, n)?;
        let a_file = match &self.a {
            Some(a) => a.to_dense("a", m, n)?,
            None => DMatrix::zeros(0, n),
        };
        let q_mat = DMatrix::from_fn(n, n, |i, j| q_file[(perm[i], perm[j])]);
        let a_mat = DMatrix::from_fn(m, n, |i, j| a_file[(i, perm[j])]);
        let q_vec = DVector::from_iterator(n, perm.iter().map(|&k| self.q[k]));
        let n_cc = self.pairs.len();
        let n0 = n - 2 * n_cc;
        let pick = |f: &dyn Fn(usize) -> f64, range: std::ops::Range<usize>| -> Vec<f64> {
            range.map(|k| f(perm[k])).collect()
        };
        let lo = |k: usize| lower(&self.lx[k]);
        let hi = |k: usize| upper(&self.ux[k]);
        let eval = QpccEvaluator {
            q: q_mat,
            c: q_vec,
            constant: self.constant,
            a: a_mat,
        };
        Ok(MpccProblem {
            name: self.name.clone(),
            n0,
            n_cc,
            m,
            lg: self.lg.iter().map(lower).collect(),
            ug: self.ug.iter().map(upper).collect(),
            lx0: pick(&lo, 0..n0),
            ux0: pick(&hi, 0..n0),
            lx1: pick(&lo, n0..n0 + n_cc),
            ux1: pick(&hi, n0..n0 + n_cc),
            lx2: pick(&lo, n0 + n_cc..n),
            ux2: pick(&hi, n0 + n_cc..n),
            x_init: self.x0.as_ref().map(|x| perm.iter().map(|&k| x[k]).collect()),
            eval: Arc::new(eval),
        })
    }
}

/// Reads and validates a QPCC file.
pub fn load_qpcc(path: &Path) -> Result<QpccData> {
    let text = std::fs::read_to_string(path)?;
    QpccData::from_json(&text).map_err(|e| match e {
        SolverError::Parse { location, message } => SolverError::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn load_problem(path: &Path) -> Result<MpccProblem> {
    load_qpcc(path)?.to_problem()
}

/// Evaluator of `½xᵀQx + cᵀx + c0` with linear rows `Ax`, in problem order.
#[derive(Debug, Clone)]
pub struct QpccEvaluator {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub constant: f64,
    pub a: DMatrix<f64>,
}

impl Evaluator for QpccEvaluator {
    fn objective(&self, x: &[f64]) -> Result<f64> {
        let x = DVector::from_column_slice(x);
        Ok(0.5 * x.dot(&(&self.q * &x)) + self.c.dot(&x) + self.constant)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        let g = &self.q * DVector::from_column_slice(x) + &self.c;
        grad.copy_from_slice(g.as_slice());
        Ok(())
    }

    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        let v = &self.a * DVector::from_column_slice(x);
        g.copy_from_slice(v.as_slice());
        Ok(())
    }

    fn jacobian(&self, _x: &[f64], jac: &mut Triplets) -> Result<()> {
        for i in 0..self.a.nrows() {
            for j in 0..self.a.ncols() {
                if self.a[(i, j)] != 0.0 {
                    jac.push((i, j, self.a[(i, j)]));
                }
            }
        }
        Ok(())
    }

    fn hessian(&self, _x: &[f64], obj_factor: f64, _y: &[f64], hess: &mut Triplets) -> Result<()> {
        for i in 0..self.q.nrows() {
            for j in 0..=i {
                if self.q[(i, j)] != 0.0 {
                    hess.push((i, j, obj_factor * self.q[(i, j)]));
                }
            }
        }
        Ok(())
    }
}
