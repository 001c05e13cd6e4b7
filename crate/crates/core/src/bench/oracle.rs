//! Brute-force global minimum of a small QPCC: every complementarity branch,
//! every active set of the remaining inequalities, one dense KKT solve each.

use nalgebra::{DMatrix, DVector};

use super::qpcc::QpccData;
use crate::error::{Result, SolverError};

/// Largest number of branch × face combinations the oracle will visit.
pub const ORACLE_CAP: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub objective: f64,
    /// Minimizer in file order.
    pub x: Vec<f64>,
    pub faces_visited: u64,
}

/// Linear inequality `aᵀx >= b` or equality `aᵀx = b`.
#[derive(Debug, Clone)]
struct Row {
    a: DVector<f64>,
    b: f64,
}

/// Global minimum over the feasible set, `None` if it is empty.
pub fn qpcc_global_min(data: &QpccData) -> Result<Option<OracleSolution>> {
    data.validate()?;
    let n = data.n;
    let m = data.num_rows();
    let q = data.q_matrix.to_dense("q_matrix", n, n)?;
    let a = match &data.a {
        Some(a) => a.to_dense("a", m, n)?,
        None => DMatrix::zeros(0, n),
    };
    let c = DVector::from_column_slice(&data.q);
    let unit = |j: usize, s: f64| {
        let mut e = DVector::zeros(n);
        e[j] = s;
        e
    };
    let mut eqs: Vec<Row> = Vec::new();
    let mut ineqs: Vec<Row> = Vec::new();
    let add = |row: Row, lo: Option<f64>, hi: Option<f64>, eqs: &mut Vec<Row>, ineqs: &mut Vec<Row>| match (lo, hi) {
        (Some(l), Some(u)) if l == u => eqs.push(Row { a: row.a, b: l }),
        _ => {
            if let Some(l) = lo {
                ineqs.push(Row { a: row.a.clone(), b: l });
            }
            if let Some(u) = hi {
                ineqs.push(Row { a: -row.a, b: -u });
            }
        }
    };
    for i in 0..m {
        let r = Row {
            a: a.row(i).transpose(),
            b: 0.0,
        };
        add(r, data.lg[i], data.ug[i], &mut eqs, &mut ineqs);
    }
    for j in 0..n {
        let r = Row { a: unit(j, 1.0), b: 0.0 };
        add(r, data.lx[j], data.ux[j], &mut eqs, &mut ineqs);
    }
    let n_cc = data.pairs.len();
    let combos = (1u64 << n_cc).saturating_mul(1u64 << ineqs.len().min(62));
    if ineqs.len() >= 62 || combos > ORACLE_CAP {
        return Err(SolverError::EnumerationCapExceeded {
            size: n_cc + ineqs.len(),
            cap: ORACLE_CAP as usize,
        });
    }
    let feas_tol = 1e-9;
    let mut best: Option<OracleSolution> = None;
    let mut visited = 0u64;
    for branch in 0..(1u64 << n_cc) {
        let mut fixed = eqs.clone();
        for (k, &(i, j)) in data.pairs.iter().enumerate() {
            let v = if branch >> k & 1 == 0 { i } else { j };
            fixed.push(Row {
                a: unit(v, 1.0),
                b: data.lx[v].expect("validated"),
            });
        }
        for face in 0..(1u64 << ineqs.len()) {
            visited += 1;
            let mut act = fixed.clone();
            act.extend((0..ineqs.len()).filter(|k| face >> k & 1 == 1).map(|k| ineqs[k].clone()));
            let Some(x) = face_stationary_point(&q, &c, &act) else {
                continue;
            };
            let feasible = act.iter().all(|r| (r.a.dot(&x) - r.b).abs() <= feas_tol * (1.0 + r.b.abs()))
                && ineqs.iter().all(|r| r.a.dot(&x) - r.b >= -feas_tol * (1.0 + r.b.abs()))
                && fixed.iter().all(|r| (r.a.dot(&x) - r.b).abs() <= feas_tol * (1.0 + r.b.abs()));
            if !feasible {
                continue;
            }
            let f = 0.5 * x.dot(&(&q * &x)) + c.dot(&x) + data.constant;
            if best.as_ref().is_none_or(|b| f < b.objective - 1e-12) {
                best = Some(OracleSolution {
                    objective: f,
                    x: x.as_slice().to_vec(),
                    faces_visited: 0,
                });
            }
        }
    }
    Ok(best.map(|mut b| {
        b.faces_visited = visited;
        b
    }))
}

/// Stationary point of `½xᵀQx + cᵀx` on `{x : aᵢᵀx = bᵢ}`, or `None` when
/// the KKT system is inconsistent.
fn face_stationary_point(q: &DMatrix<f64>, c: &DVector<f64>, rows: &[Row]) -> Option<DVector<f64>> {
    let n = q.nrows();
    let k = rows.len();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    let mut rhs = DVector::zeros(n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(q);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            kkt[(n + i, j)] = r.a[j];
            kkt[(j, n + i)] = r.a[j];
        }
        rhs[n + i] = r.b;
    }
    rhs.rows_mut(0, n).copy_from(&(-c));
    let sol = kkt.clone().svd(true, true).solve(&rhs, 1e-11).ok()?;
    let resid = (&kkt * &sol - &rhs).amax();
    if resid > 1e-8 * (1.0 + rhs.amax()) {
        return None;
    }
    Some(sol.rows(0, n).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::qpcc::Matrix;

    fn two_circle() -> QpccData {
        QpccData {
            version: 1,
            name: "tc".into(),
            n: 2,
            q_matrix: Matrix::Dense(vec![vec![2.0, 0.0], vec![0.0, 2.0]]),
            q: vec![-2.0, -2.0],
            constant: 2.0,
            a: None,
            lg: vec![],
            ug: vec![],
            lx: vec![Some(0.0); 2],
            ux: vec![None; 2],
            pairs: vec![(0, 1)],
            x0: None,
        }
    }

    #[test]
    fn two_circle_minimum() {
        let s = qpcc_global_min(&two_circle()).unwrap().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        // ties broken by first branch found
        assert!((s.x[0] * s.x[1]).abs() < 1e-14);
    }

    #[test]
    fn empty_feasible_set() {
        let mut d = two_circle();
        d.a = Some(Matrix::Dense(vec![vec![1.0, 1.0]]));
        d.lg = vec![Some(-2.0)];
        d.ug = vec![Some(-1.0)];
        assert!(qpcc_global_min(&d).unwrap().is_none());
    }
}
