use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// How the complementarity pairs couple into the Lagrangian Hessian.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    None,
    /// Relaxation rows `x1_i x2_i + s_i − τ_i = 0`: the coupling of pair `i`
    /// is the multiplier of `rows[i]`; `slacks[i]` is the variable `s_i`.
    Scholtes { rows: Vec<usize>, slacks: Vec<usize> },
    /// Penalty term `ρ x1ᵀx2`.
    Penalty { rho: f64 },
}

/// Complementarity structure an NLP exposes to the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct CompStructure {
    /// `(x1_i, x2_i)` variable indices.
    pub pairs: Vec<(usize, usize)>,
    pub coupling: Coupling,
}

impl CompStructure {
    pub fn none() -> Self {
        CompStructure {
            pairs: Vec::new(),
            coupling: Coupling::None,
        }
    }

    pub fn scholtes_rows(&self) -> &[usize] {
        match &self.coupling {
            Coupling::Scholtes { rows, .. } => rows,
            _ => &[],
        }
    }

    pub fn scholtes_slacks(&self) -> &[usize] {
        match &self.coupling {
            Coupling::Scholtes { slacks, .. } => slacks,
            _ => &[],
        }
    }

    /// Coupling off-diagonals `(a, b, value)` for the multipliers `y`.
    pub fn couplings(&self, y: &DVector<f64>) -> Vec<(usize, usize, f64)> {
        match &self.coupling {
            Coupling::None => Vec::new(),
            Coupling::Scholtes { rows, .. } => self
                .pairs
                .iter()
                .zip(rows)
                .map(|(&(a, b), &r)| (a, b, y[r]))
                .collect(),
            Coupling::Penalty { rho } => self.pairs.iter().map(|&(a, b)| (a, b, *rho)).collect(),
        }
    }
}

/// `min f(x) s.t. c(x) = 0, x_j >= l_j` for the components with finite `l_j`.
pub trait Nlp {
    fn num_vars(&self) -> usize;
    fn num_cons(&self) -> usize;
    /// Lower bounds; `-inf` marks a free variable.
    fn lower_bounds(&self) -> DVector<f64>;
    fn objective(&self, x: &DVector<f64>) -> Result<f64>;
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
    fn constraints(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;
    /// Full symmetric `obj_factor ∇²f + Σ y_i ∇²c_i`.
    fn hessian(&self, x: &DVector<f64>, obj_factor: f64, y: &DVector<f64>) -> Result<DMatrix<f64>>;
    fn structure(&self) -> CompStructure {
        CompStructure::none()
    }
}

/// Dense data for `min ½xᵀHx + gᵀx s.t. A x = b, x_j >= l_j`.
#[derive(Debug, Clone)]
pub struct DenseQp {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lower: DVector<f64>,
}

impl Nlp for DenseQp {
    fn num_vars(&self) -> usize {
        self.g.len()
    }
    fn num_cons(&self) -> usize {
        self.b.len()
    }
    fn lower_bounds(&self) -> DVector<f64> {
        self.lower.clone()
    }
    fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(0.5 * x.dot(&(&self.h * x)) + self.g.dot(x))
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.h * x + &self.g)
    }
    fn constraints(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * x - &self.b)
    }
    fn jacobian(&self, _x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.a.clone())
    }
    fn hessian(&self, _x: &DVector<f64>, obj_factor: f64, _y: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(&self.h * obj_factor)
    }
}
