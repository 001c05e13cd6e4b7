//! Small analytic problems with oracle-verified optima and labeled
//! stationary points.

use super::oracle::qpcc_global_min;
use super::qpcc::{Matrix, QpccData, QPCC_FORMAT_VERSION};
use crate::error::{Result, SolverError};
use crate::model::{
    estimate_multipliers, index_sets, to_standard_form, MpccMultipliers, MpccProblem, Stationarity, StandardProblem,
};

pub const BUILTIN_NAMES: [&str; 8] = [
    "trivial-corner",
    "two-circle",
    "bilinear-lpcc",
    "biactive-origin",
    "w-not-s",
    "tilted-switch",
    "degenerate-jacobian",
    "nonconvex-penalty",
];

/// A stationary point with its expected label, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub label: Stationarity,
}

#[derive(Debug, Clone)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub data: QpccData,
    /// Global optimum, checked against the brute-force oracle.
    pub optimum: f64,
    pub convex_objective: bool,
    pub points: Vec<LabeledPoint>,
}

impl Builtin {
    pub fn problem(&self) -> Result<MpccProblem> {
        self.data.to_problem()
    }
}

struct Spec {
    name: &'static str,
    description: &'static str,
    q: [[f64; 2]; 2],
    c: [f64; 2],
    constant: f64,
    upper: Option<f64>,
    optimum: f64,
    x0: [f64; 2],
    points: Vec<([f64; 2], Stationarity)>,
}

fn two_var(s: Spec) -> Builtin {
    let convex = s.q[0][0] >= 0.0 && s.q[1][1] >= 0.0 && s.q[0][0] * s.q[1][1] >= s.q[0][1] * s.q[1][0];
    Builtin {
        name: s.name,
        description: s.description,
        data: QpccData {
            version: QPCC_FORMAT_VERSION,
            name: s.name.into(),
            n: 2,
            q_matrix: Matrix::Dense(s.q.iter().map(|r| r.to_vec()).collect()),
            q: s.c.to_vec(),
            constant: s.constant,
            a: None,
            lg: vec![],
            ug: vec![],
            lx: vec![Some(0.0); 2],
            ux: vec![s.upper; 2],
            pairs: vec![(0, 1)],
            x0: Some(s.x0.to_vec()),
        },
        optimum: s.optimum,
        convex_objective: convex,
        points: s
            .points
            .into_iter()
            .map(|(x, label)| LabeledPoint { x: x.to_vec(), label })
            .collect(),
    }
}

/// Unverified registry entry.
fn raw(name: &str) -> Option<Builtin> {
    use Stationarity::{C, S};
    Some(match name {
        "trivial-corner" => two_var(Spec {
            name: "trivial-corner",
            description: "min x1 + x2, 0 <= x1 ⊥ x2 >= 0",
            q: [[0.0, 0.0], [0.0, 0.0]],
            c: [1.0, 1.0],
            constant: 0.0,
            upper: None,
            optimum: 0.0,
            x0: [1.0, 0.5],
            points: vec![([0.0, 0.0], S)],
        }),
        "two-circle" => two_var(Spec {
            name: "two-circle",
            description: "min (x1-1)^2 + (x2-1)^2, 0 <= x1 ⊥ x2 >= 0",
            q: [[2.0, 0.0], [0.0, 2.0]],
            c: [-2.0, -2.0],
            constant: 2.0,
            upper: None,
            optimum: 1.0,
            x0: [0.8, 0.2],
            points: vec![([1.0, 0.0], S), ([0.0, 1.0], S)],
        }),
        "bilinear-lpcc" => two_var(Spec {
            name: "bilinear-lpcc",
            description: "min -x1 - x2, 0 <= x1 ⊥ x2 >= 0, x <= 1",
            q: [[0.0, 0.0], [0.0, 0.0]],
            c: [-1.0, -1.0],
            constant: 0.0,
            upper: Some(1.0),
            optimum: -1.0,
            x0: [0.6, 0.3],
            points: vec![([1.0, 0.0], S), ([0.0, 1.0], S)],
        }),
        "biactive-origin" => two_var(Spec {
            name: "biactive-origin",
            description: "min x1^2 + x2^2, 0 <= x1 ⊥ x2 >= 0",
            q: [[2.0, 0.0], [0.0, 2.0]],
            c: [0.0, 0.0],
            constant: 0.0,
            upper: None,
            optimum: 0.0,
            x0: [1.0, 0.5],
            points: vec![([0.0, 0.0], S)],
        }),
        "w-not-s" => two_var(Spec {
            name: "w-not-s",
            description: "min (x1-1)(x2-1), 0 <= x1 ⊥ x2 >= 0, x <= 2",
            q: [[0.0, 1.0], [1.0, 0.0]],
            c: [-1.0, -1.0],
            constant: 1.0,
            upper: Some(2.0),
            optimum: -1.0,
            x0: [1.5, 0.5],
            points: vec![([0.0, 0.0], C), ([2.0, 0.0], S), ([0.0, 2.0], S)],
        }),
        "tilted-switch" => two_var(Spec {
            name: "tilted-switch",
            description: "min (x1-2)^2 + (x2-1)^2, 0 <= x1 ⊥ x2 >= 0",
            q: [[2.0, 0.0], [0.0, 2.0]],
            c: [-4.0, -2.0],
            constant: 5.0,
            upper: None,
            optimum: 1.0,
            x0: [1.0, 0.5],
            points: vec![([2.0, 0.0], S), ([0.0, 1.0], S)],
        }),
        "nonconvex-penalty" => two_var(Spec {
            name: "nonconvex-penalty",
            description: "min -x1 x2 + x1 + x2, 0 <= x1 ⊥ x2 >= 0, x <= 1",
            q: [[0.0, -1.0], [-1.0, 0.0]],
            c: [1.0, 1.0],
            constant: 0.0,
            upper: Some(1.0),
            optimum: 0.0,
            x0: [0.7, 0.4],
            points: vec![([0.0, 0.0], S)],
        }),
        "degenerate-jacobian" => {
            // variables (w, x1, x2); the row w + x1 + x2 = 1 appears twice
            let row = vec![1.0, 1.0, 1.0];
            Builtin {
                name: "degenerate-jacobian",
                description: "min w^2 + (x1-1)^2 + (x2-1)^2, w + x1 + x2 = 1 (twice), 0 <= x1 ⊥ x2 >= 0, w >= 0",
                data: QpccData {
                    version: QPCC_FORMAT_VERSION,
                    name: "degenerate-jacobian".into(),
                    n: 3,
                    q_matrix: Matrix::Dense(vec![
                        vec![2.0, 0.0, 0.0],
                        vec![0.0, 2.0, 0.0],
                        vec![0.0, 0.0, 2.0],
                    ]),
                    q: vec![0.0, -2.0, -2.0],
                    constant: 2.0,
                    a: Some(Matrix::Dense(vec![row.clone(), row])),
                    lg: vec![Some(1.0); 2],
                    ug: vec![Some(1.0); 2],
                    lx: vec![Some(0.0); 3],
                    ux: vec![None; 3],
                    pairs: vec![(1, 2)],
                    x0: Some(vec![0.2, 0.6, 0.2]),
                },
                optimum: 1.0,
                convex_objective: true,
                points: vec![LabeledPoint {
                    x: vec![0.0, 1.0, 0.0],
                    label: Stationarity::S,
                }],
            }
        }
        _ => return None,
    })
}

/// Registry entry for `name`, with its optimum re-verified by the oracle.
pub fn builtin_entry(name: &str) -> Result<Builtin> {
    let b = raw(name).ok_or_else(|| SolverError::UnknownBuiltin(name.to_string()))?;
    let oracle = qpcc_global_min(&b.data)?
        .ok_or_else(|| SolverError::Evaluation(format!("builtin `{name}` is infeasible")))?;
    if (oracle.objective - b.optimum).abs() > 1e-9 {
        return Err(SolverError::Evaluation(format!(
            "builtin `{name}`: registered optimum {} disagrees with oracle {}",
            b.optimum, oracle.objective
        )));
    }
    Ok(b)
}

pub fn builtin(name: &str) -> Result<MpccProblem> {
    builtin_entry(name)?.problem()
}

/// Least-squares multipliers and stationarity label at a labeled point.
pub fn label_point(b: &Builtin, point: &LabeledPoint, tol: f64) -> Result<(StandardProblem, Vec<f64>, MpccMultipliers, Stationarity)> {
    let problem = b.problem()?;
    let sp = to_standard_form(&problem)?;
    let perm = b.data.permutation();
    let x: Vec<f64> = perm.iter().map(|&k| point.x[k]).collect();
    let xs = sp.from_original(&x)?;
    let mult = estimate_multipliers(&xs, &sp, tol)?;
    let x1: Vec<f64> = (0..sp.n_cc).map(|i| xs[sp.x1_index(i)]).collect();
    let x2: Vec<f64> = (0..sp.n_cc).map(|i| xs[sp.x2_index(i)]).collect();
    let sets = index_sets(&x1, &x2, tol)?;
    let label = crate::model::classify_stationarity(&xs, &mult, &sets, &sp, tol)?;
    Ok((sp, xs, mult, label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_optimum_matches_oracle() {
        for name in BUILTIN_NAMES {
            builtin_entry(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(builtin("nope").unwrap_err(), SolverError::UnknownBuiltin("nope".into()));
    }

    #[test]
    fn labeled_points_classify() {
        for name in BUILTIN_NAMES {
            let b = builtin_entry(name).unwrap();
            for p in &b.points {
                let (_, _, _, label) = label_point(&b, p, 1e-9).unwrap();
                assert_eq!(label, p.label, "{name} at {:?}", p.x);
            }
        }
    }

    #[test]
    fn two_circle_values_at_one_one() {
        let p = builtin("two-circle").unwrap();
        assert_eq!(p.eval.objective(&[1.0, 1.0]).unwrap(), 0.0);
        let mut g = [0.0; 2];
        p.eval.gradient(&[1.0, 1.0], &mut g).unwrap();
        assert_eq!(g, [0.0, 0.0]);
        let mut g = [0.0; 2];
        p.eval.gradient(&[2.0, 0.0], &mut g).unwrap();
        assert_eq!(g, [2.0, -2.0]);
    }
}
