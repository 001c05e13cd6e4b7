use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::ipm::{Bounds, CompStructure, Coupling, Iterate, Nlp};
use crate::model::StandardProblem;
use crate::options::CenteringSlackMode;

/// The Scholtes-relaxed NLP over `v = (x0, x1, x2, s)`:
///
/// ```text
/// min f(x)  s.t.  c(x) = 0,  X1 x2 + s − τ_v = 0,
///                 x0 >= 0,  x1 >= −δ1,  x2 >= −δ2,  s >= 0
/// ```
pub struct RelaxedNlp<'a> {
    pub sp: &'a StandardProblem,
    pub tau_v: Vec<f64>,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
}

impl<'a> RelaxedNlp<'a> {
    pub fn new(sp: &'a StandardProblem, tau: f64) -> Self {
        RelaxedNlp {
            sp,
            tau_v: vec![tau; sp.n_cc],
            delta1: vec![0.0; sp.n_cc],
            delta2: vec![0.0; sp.n_cc],
        }
    }

    /// Number of standard (non-slack) variables.
    pub fn n_x(&self) -> usize {
        self.sp.num_vars()
    }

    pub fn m_c(&self) -> usize {
        self.sp.num_cons()
    }

    pub fn n_cc(&self) -> usize {
        self.sp.n_cc
    }

    pub fn x1_index(&self, i: usize) -> usize {
        self.sp.x1_index(i)
    }

    pub fn x2_index(&self, i: usize) -> usize {
        self.sp.x2_index(i)
    }

    pub fn s_index(&self, i: usize) -> usize {
        self.n_x() + i
    }

    pub fn row_index(&self, i: usize) -> usize {
        self.m_c() + i
    }

    pub fn set_tau(&mut self, tau: f64) {
        self.tau_v.iter_mut().for_each(|t| *t = tau);
    }

    /// Scholtes row values at `v` for relaxation `tau`.
    pub fn scholtes_rows(&self, v: &DVector<f64>, tau: &[f64]) -> Vec<f64> {
        (0..self.n_cc())
            .map(|i| v[self.x1_index(i)] * v[self.x2_index(i)] + v[self.s_index(i)] - tau[i])
            .collect()
    }
}

impl Nlp for RelaxedNlp<'_> {
    fn num_vars(&self) -> usize {
        self.n_x() + self.n_cc()
    }

    fn num_cons(&self) -> usize {
        self.m_c() + self.n_cc()
    }

    fn lower_bounds(&self) -> DVector<f64> {
        let n = self.num_vars();
        let mut l = DVector::zeros(n);
        for j in 0..self.sp.n0 {
            if !self.sp.bounded[j] {
                l[j] = f64::NEG_INFINITY;
            }
        }
        for i in 0..self.n_cc() {
            l[self.x1_index(i)] = -self.delta1[i];
            l[self.x2_index(i)] = -self.delta2[i];
        }
        l
    }

    fn objective(&self, v: &DVector<f64>) -> Result<f64> {
        self.sp.objective(&v.as_slice()[..self.n_x()])
    }

    fn gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.sp.gradient(&v.as_slice()[..self.n_x()])?;
        let mut out = DVector::zeros(self.num_vars());
        out.rows_mut(0, self.n_x()).copy_from(&g);
        Ok(out)
    }

    fn constraints(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let c = self.sp.constraints(&v.as_slice()[..self.n_x()])?;
        let mut out = DVector::zeros(self.num_cons());
        out.rows_mut(0, self.m_c()).copy_from(&c);
        for (i, r) in self.scholtes_rows(v, &self.tau_v).into_iter().enumerate() {
            out[self.row_index(i)] = r;
        }
        Ok(out)
    }

    fn jacobian(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let j = self.sp.jacobian(&v.as_slice()[..self.n_x()])?;
        let mut out = DMatrix::zeros(self.num_cons(), self.num_vars());
        out.view_mut((0, 0), (self.m_c(), self.n_x())).copy_from(&j);
        for i in 0..self.n_cc() {
            let r = self.row_index(i);
            out[(r, self.x1_index(i))] = v[self.x2_index(i)];
            out[(r, self.x2_index(i))] = v[self.x1_index(i)];
            out[(r, self.s_index(i))] = 1.0;
        }
        Ok(out)
    }

    fn hessian(&self, v: &DVector<f64>, obj_factor: f64, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self
            .sp
            .hessian(&v.as_slice()[..self.n_x()], obj_factor, &y.as_slice()[..self.m_c()])?;
        let n = self.num_vars();
        let mut out = DMatrix::zeros(n, n);
        out.view_mut((0, 0), (self.n_x(), self.n_x())).copy_from(&h);
        for i in 0..self.n_cc() {
            let (a, b) = (self.x1_index(i), self.x2_index(i));
            let ys = y[self.row_index(i)];
            out[(a, b)] += ys;
            out[(b, a)] += ys;
        }
        Ok(out)
    }

    fn structure(&self) -> CompStructure {
        let n_cc = self.n_cc();
        CompStructure {
            pairs: (0..n_cc).map(|i| (self.x1_index(i), self.x2_index(i))).collect(),
            coupling: Coupling::Scholtes {
                rows: (0..n_cc).map(|i| self.row_index(i)).collect(),
                slacks: (0..n_cc).map(|i| self.s_index(i)).collect(),
            },
        }
    }
}

/// The ten residual blocks of the perturbed relaxed KKT conditions.
#[derive(Debug, Clone)]
pub struct RelaxedResidual {
    /// `∇_{x0} L`
    pub r1: DVector<f64>,
    /// `∇_{x1} L`
    pub r2: DVector<f64>,
    /// `∇_{x2} L`
    pub r3: DVector<f64>,
    /// `y_s − z_s`
    pub r4: DVector<f64>,
    /// `c(x)`
    pub r5: DVector<f64>,
    /// `X1 x2 + s − τ e`
    pub r6: DVector<f64>,
    /// `X0 z0 − μ e` (bounded components)
    pub r7: DVector<f64>,
    /// `(X1 + Δ1) z1 − μ e`
    pub r8: DVector<f64>,
    /// `(X2 + Δ2) z2 − μ e`
    pub r9: DVector<f64>,
    /// `S z_s − μ e`
    pub r10: DVector<f64>,
}

impl RelaxedResidual {
    pub fn max_abs(&self) -> f64 {
        [&self.r1, &self.r2, &self.r3, &self.r4, &self.r5, &self.r6, &self.r7, &self.r8, &self.r9, &self.r10]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.amax()))
    }
}

/// Evaluates the relaxed residuals at `it` for `(μ, τ)`.
pub fn relaxed_kkt_residual(nlp: &RelaxedNlp<'_>, it: &Iterate, mu: f64, tau: f64) -> RelaxedResidual {
    let bounds = Bounds::new(nlp.lower_bounds());
    let gl = it.grad_lag();
    let (n0, n_cc, m) = (nlp.sp.n0, nlp.n_cc(), nlp.m_c());
    let sl = bounds.slack(&it.x);
    let comp = |j: usize| sl[j] * it.z[j] - mu;
    let r7 = DVector::from_iterator(
        n0,
        (0..n0).map(|j| if bounds.bounded[j] { comp(j) } else { 0.0 }),
    );
    let tau_v = vec![tau; n_cc];
    RelaxedResidual {
        r1: gl.rows(0, n0).into_owned(),
        r2: DVector::from_iterator(n_cc, (0..n_cc).map(|i| gl[nlp.x1_index(i)])),
        r3: DVector::from_iterator(n_cc, (0..n_cc).map(|i| gl[nlp.x2_index(i)])),
        r4: DVector::from_iterator(n_cc, (0..n_cc).map(|i| gl[nlp.s_index(i)])),
        r5: it.c.rows(0, m).into_owned(),
        r6: DVector::from_vec(nlp.scholtes_rows(&it.x, &tau_v)),
        r7,
        r8: DVector::from_iterator(n_cc, (0..n_cc).map(|i| comp(nlp.x1_index(i)))),
        r9: DVector::from_iterator(n_cc, (0..n_cc).map(|i| comp(nlp.x2_index(i)))),
        r10: DVector::from_iterator(n_cc, (0..n_cc).map(|i| comp(nlp.s_index(i)))),
    }
}

/// Starting point `(x0, x1, x2, s)` placing each pair on the curve
/// `x1 x2 = k τ⁰` and `s` so the relaxed row holds.
///
/// When `x_hint` has both sides of a pair positive and distinct, their ratio
/// is kept (a symmetric start can otherwise never leave the `x1 = x2`
/// line on symmetric problems); otherwise `x1 = x2 = √(k τ⁰)`.
pub fn centered_init(
    nlp: &RelaxedNlp<'_>,
    x_hint: &[f64],
    tau0: f64,
    k_cen: f64,
    mode: CenteringSlackMode,
) -> DVector<f64> {
    let k = k_cen.clamp(1e-12, 1.0 - 1e-4);
    let mut v = DVector::zeros(nlp.num_vars());
    v.rows_mut(0, nlp.n_x()).copy_from_slice(x_hint);
    for i in 0..nlp.n_cc() {
        let (a, b) = (nlp.x1_index(i), nlp.x2_index(i));
        let target = k * tau0;
        let ratio = if x_hint[a] > 0.0 && x_hint[b] > 0.0 {
            (x_hint[a] / x_hint[b]).clamp(1e-2, 1e2)
        } else {
            1.0
        };
        v[a] = (target * ratio).sqrt();
        v[b] = (target / ratio).sqrt();
        v[nlp.s_index(i)] = match mode {
            CenteringSlackMode::Feasible => (1.0 - k) * tau0,
            CenteringSlackMode::Formula => (2.0 * (1.0 - k * tau0)).abs().sqrt(),
        };
    }
    v
}

/// Start without centering: the hint for `x`, and `s = τ⁰ − x1 x2` (pushed
/// inside later if not positive).
pub fn plain_init(nlp: &RelaxedNlp<'_>, x_hint: &[f64], tau0: f64) -> DVector<f64> {
    let mut v = DVector::zeros(nlp.num_vars());
    v.rows_mut(0, nlp.n_x()).copy_from_slice(x_hint);
    for i in 0..nlp.n_cc() {
        v[nlp.s_index(i)] = tau0 - x_hint[nlp.x1_index(i)] * x_hint[nlp.x2_index(i)];
    }
    v
}
