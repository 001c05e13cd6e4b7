use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SolverError};

/// Coordinate-format sparse entries `(row, col, value)`. Duplicates are summed.
pub type Triplets = Vec<(usize, usize, f64)>;

/// Callback surface for the functions of an MPCC.
///
/// Variables are laid out as `x = (x0, x1, x2)` where `x0` holds the `n0`
/// ordinary variables and `x1`, `x2` the two sides of the `n_cc`
/// complementarity pairs.
pub trait Evaluator: Send + Sync {
    fn objective(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()>;

    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()>;

    /// Appends the nonzeros of the constraint Jacobian.
    fn jacobian(&self, x: &[f64], jac: &mut Triplets) -> Result<()>;

    /// Appends the lower triangle (`row >= col`) of
    /// `obj_factor * ∇²f(x) + Σ y_i ∇²g_i(x)`.
    fn hessian(&self, x: &[f64], obj_factor: f64, y: &[f64], hess: &mut Triplets) -> Result<()>;
}

/// An MPCC in bounded form:
///
/// ```text
/// min f(x)  s.t.  lg <= g(x) <= ug,  lx0 <= x0 <= ux0,
///                 lx1 <= x1 ⊥ x2 >= lx2,  x1 <= ux1,  x2 <= ux2
/// ```
#[derive(Clone)]
pub struct MpccProblem {
    pub name: String,
    pub n0: usize,
    pub n_cc: usize,
    pub m: usize,
    pub lg: Vec<f64>,
    pub ug: Vec<f64>,
    pub lx0: Vec<f64>,
    pub ux0: Vec<f64>,
    pub lx1: Vec<f64>,
    pub lx2: Vec<f64>,
    pub ux1: Vec<f64>,
    pub ux2: Vec<f64>,
    /// Optional starting point in the original variable space.
    pub x_init: Option<Vec<f64>>,
    pub eval: Arc<dyn Evaluator>,
}

impl fmt::Debug for MpccProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MpccProblem")
            .field("name", &self.name)
            .field("n0", &self.n0)
            .field("n_cc", &self.n_cc)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl MpccProblem {
    /// A problem with every ordinary variable in `[0, ∞)`, every pair in
    /// `0 <= x1 ⊥ x2 >= 0` and all constraint rows as equalities `g(x) = 0`.
    pub fn standard_shape(
        name: impl Into<String>,
        n0: usize,
        n_cc: usize,
        m: usize,
        eval: Arc<dyn Evaluator>,
    ) -> Self {
        MpccProblem {
            name: name.into(),
            n0,
            n_cc,
            m,
            lg: vec![0.0; m],
            ug: vec![0.0; m],
            lx0: vec![0.0; n0],
            ux0: vec![f64::INFINITY; n0],
            lx1: vec![0.0; n_cc],
            lx2: vec![0.0; n_cc],
            ux1: vec![f64::INFINITY; n_cc],
            ux2: vec![f64::INFINITY; n_cc],
            x_init: None,
            eval,
        }
    }

    /// Total number of original variables, `n0 + 2 n_cc`.
    pub fn num_vars(&self) -> usize {
        self.n0 + 2 * self.n_cc
    }

    pub fn x1_index(&self, i: usize) -> usize {
        self.n0 + i
    }

    pub fn x2_index(&self, i: usize) -> usize {
        self.n0 + self.n_cc + i
    }

    pub fn validate(&self) -> Result<()> {
        let dims: [(&str, usize, usize); 8] = [
            ("lg", self.lg.len(), self.m),
            ("ug", self.ug.len(), self.m),
            ("lx0", self.lx0.len(), self.n0),
            ("ux0", self.ux0.len(), self.n0),
            ("lx1", self.lx1.len(), self.n_cc),
            ("lx2", self.lx2.len(), self.n_cc),
            ("ux1", self.ux1.len(), self.n_cc),
            ("ux2", self.ux2.len(), self.n_cc),
        ];
        for (what, got, expected) in dims {
            if got != expected {
                return Err(SolverError::Dimension {
                    what: what.to_string(),
                    expected,
                    got,
                });
            }
        }
        if let Some(x) = &self.x_init {
            if x.len() != self.num_vars() {
                return Err(SolverError::Dimension {
                    what: "x_init".into(),
                    expected: self.num_vars(),
                    got: x.len(),
                });
            }
        }
        for i in 0..self.n_cc {
            if !self.lx1[i].is_finite() {
                return Err(SolverError::InfiniteComplementarityBound { index: i, side: "x1" });
            }
            if !self.lx2[i].is_finite() {
                return Err(SolverError::InfiniteComplementarityBound { index: i, side: "x2" });
            }
        }
        check_pairs("constraint", &self.lg, &self.ug)?;
        check_pairs("x0", &self.lx0, &self.ux0)?;
        check_pairs("x1", &self.lx1, &self.ux1)?;
        check_pairs("x2", &self.lx2, &self.ux2)?;
        Ok(())
    }
}

fn check_pairs(kind: &'static str, lower: &[f64], upper: &[f64]) -> Result<()> {
    for (index, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        if l.is_nan() || u.is_nan() || l > u {
            return Err(SolverError::InconsistentBounds {
                kind,
                index,
                lower: l,
                upper: u,
            });
        }
    }
    Ok(())
}

/// Builds an evaluator from closures; handy for small hand-written problems.
pub struct ClosureEvaluator<F, G, C, J, H> {
    pub f: F,
    pub grad: G,
    pub cons: C,
    pub jac: J,
    pub hess: H,
}

impl<F, G, C, J, H> Evaluator for ClosureEvaluator<F, G, C, J, H>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
    C: Fn(&[f64], &mut [f64]) + Send + Sync,
    J: Fn(&[f64], &mut Triplets) + Send + Sync,
    H: Fn(&[f64], f64, &[f64], &mut Triplets) + Send + Sync,
{
    fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok((self.f)(x))
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        (self.grad)(x, grad);
        Ok(())
    }
    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        (self.cons)(x, g);
        Ok(())
    }
    fn jacobian(&self, x: &[f64], jac: &mut Triplets) -> Result<()> {
        (self.jac)(x, jac);
        Ok(())
    }
    fn hessian(&self, x: &[f64], obj_factor: f64, y: &[f64], hess: &mut Triplets) -> Result<()> {
        (self.hess)(x, obj_factor, y, hess);
        Ok(())
    }
}
