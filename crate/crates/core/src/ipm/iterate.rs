use nalgebra::{DMatrix, DVector};

use super::nlp::Nlp;
use crate::error::Result;
use crate::linalg::{solve_step, Factorization};

/// Primal-dual point with cached first-order evaluations.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// Bound multipliers; zero for free variables.
    pub z: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub c: DVector<f64>,
    pub jac: DMatrix<f64>,
}

impl Iterate {
    pub fn evaluate<N: Nlp + ?Sized>(
        nlp: &N,
        x: DVector<f64>,
        y: DVector<f64>,
        z: DVector<f64>,
    ) -> Result<Iterate> {
        let f = nlp.objective(&x)?;
        let grad = nlp.gradient(&x)?;
        let c = nlp.constraints(&x)?;
        let jac = nlp.jacobian(&x)?;
        Ok(Iterate {
            x,
            y,
            z,
            f,
            grad,
            c,
            jac,
        })
    }

    /// Re-evaluates the cached functions at the stored point.
    pub fn refresh<N: Nlp + ?Sized>(&mut self, nlp: &N) -> Result<()> {
        self.f = nlp.objective(&self.x)?;
        self.grad = nlp.gradient(&self.x)?;
        self.c = nlp.constraints(&self.x)?;
        self.jac = nlp.jacobian(&self.x)?;
        Ok(())
    }

    /// `∇f + Jᵀy − z`.
    pub fn grad_lag(&self) -> DVector<f64> {
        let mut g = &self.grad - &self.z;
        if self.y.len() > 0 {
            g += self.jac.tr_mul(&self.y);
        }
        g
    }

    /// `θ = ‖c‖₁`.
    pub fn theta(&self) -> f64 {
        self.c.lp_norm(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.x.amax().max(self.y.amax()).max(self.z.amax())
    }
}

/// Bound bookkeeping for the current lower bounds.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: DVector<f64>,
    pub bounded: Vec<bool>,
}

impl Bounds {
    pub fn new(lower: DVector<f64>) -> Self {
        let bounded = lower.iter().map(|l| l.is_finite()).collect();
        Bounds { lower, bounded }
    }

    /// `x_j − l_j` on bounded components, `1` elsewhere.
    pub fn slack(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            (0..x.len()).map(|j| if self.bounded[j] { x[j] - self.lower[j] } else { 1.0 }),
        )
    }

    pub fn num_bounded(&self) -> usize {
        self.bounded.iter().filter(|&&b| b).count()
    }
}

/// Right-hand-side pieces of the Newton system.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// `∇f + Jᵀy − z`
    pub r_x: DVector<f64>,
    /// `c(x)`
    pub r_c: DVector<f64>,
    /// `(x − l) z − μ` on bounded components.
    pub r_z: DVector<f64>,
}

impl Residuals {
    pub fn at(it: &Iterate, bounds: &Bounds, mu: f64) -> Residuals {
        let sl = bounds.slack(&it.x);
        let r_z = DVector::from_iterator(
            it.x.len(),
            (0..it.x.len()).map(|j| if bounds.bounded[j] { sl[j] * it.z[j] - mu } else { 0.0 }),
        );
        Residuals {
            r_x: it.grad_lag(),
            r_c: it.c.clone(),
            r_z,
        }
    }

    /// Stacked right-hand side `r` of `K d = −r` after eliminating `Δz`.
    pub fn augmented_rhs(&self, it: &Iterate, bounds: &Bounds) -> DVector<f64> {
        let n = self.r_x.len();
        let sl = bounds.slack(&it.x);
        let mut r = DVector::zeros(n + self.r_c.len());
        for j in 0..n {
            r[j] = self.r_x[j] + if bounds.bounded[j] { self.r_z[j] / sl[j] } else { 0.0 };
        }
        r.rows_mut(n, self.r_c.len()).copy_from(&self.r_c);
        r
    }
}

/// Primal-dual search direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dx: DVector<f64>,
    pub dy: DVector<f64>,
    pub dz: DVector<f64>,
}

impl Direction {
    pub fn is_finite(&self) -> bool {
        self.dx.iter().chain(self.dy.iter()).chain(self.dz.iter()).all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.dx.amax().max(self.dy.amax()).max(self.dz.amax())
    }

    pub fn axpy(&self, sigma: f64, other: &Direction) -> Direction {
        Direction {
            dx: &self.dx + &other.dx * sigma,
            dy: &self.dy + &other.dy * sigma,
            dz: &self.dz + &other.dz * sigma,
        }
    }
}

/// Solves the augmented system for `res` and recovers `Δz`. Also returns the
/// refined linear residual and whether refinement fell short.
pub fn compute_direction(
    fact: &Factorization,
    it: &Iterate,
    bounds: &Bounds,
    res: &Residuals,
) -> (Direction, f64, bool) {
    let n = it.x.len();
    let rhs = res.augmented_rhs(it, bounds);
    let step = solve_step(fact, &rhs);
    let dx = step.d.rows(0, n).into_owned();
    let dy = step.d.rows(n, res.r_c.len()).into_owned();
    let sl = bounds.slack(&it.x);
    let dz = DVector::from_iterator(
        n,
        (0..n).map(|j| {
            if bounds.bounded[j] {
                -(res.r_z[j] + it.z[j] * dx[j]) / sl[j]
            } else {
                0.0
            }
        }),
    );
    (Direction { dx, dy, dz }, step.residual, step.degraded)
}
