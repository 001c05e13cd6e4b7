use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};

/// Which algorithm produced the system; only affects the target inertia and
/// reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktShape {
    /// Scholtes relaxation: primal block includes the relaxation slacks.
    Relaxation,
    /// Interior penalty: no slack rows.
    Penalty,
    /// Plain NLP (branch problems, LPs, restoration).
    Plain,
}

/// One 2×2 complementarity block `[[σ1, q], [q, σ2]]` sitting at the
/// `(a, b)` coordinates of the primal block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBlock {
    pub a: usize,
    pub b: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Coupling off-diagonal from the relaxation multiplier or the penalty.
    pub coupling: f64,
    /// Off-diagonal currently written into the matrix.
    pub offdiag: f64,
    /// Diagonal shifts applied by a regularization (eigenvalue clipping).
    pub diag_shift: (f64, f64),
}

impl QBlock {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.sigma1 + self.diag_shift.0, self.offdiag],
            [self.offdiag, self.sigma2 + self.diag_shift.1],
        ]
    }
}

/// Symmetric augmented system
///
/// ```text
/// [ H + Σ + δw I    Jᵀ    ]
/// [ J             −δc I   ]
/// ```
///
/// `h` excludes the barrier diagonal `Σ` and the coupling off-diagonals of the
/// complementarity blocks, which are kept separately in `blocks` so that they
/// can be regularized.
#[derive(Debug, Clone)]
pub struct AugmentedKkt {
    pub shape: KktShape,
    pub h: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub jac: DMatrix<f64>,
    pub blocks: Vec<QBlock>,
    pub delta_w: f64,
    pub delta_c: f64,
}

impl AugmentedKkt {
    /// `h_full` is the Lagrangian Hessian including the coupling terms; the
    /// coupling values in `couplings` are subtracted out of it.
    pub fn new(
        shape: KktShape,
        mut h_full: DMatrix<f64>,
        sigma: DVector<f64>,
        jac: DMatrix<f64>,
        couplings: &[(usize, usize, f64)],
    ) -> Self {
        let blocks = couplings
            .iter()
            .map(|&(a, b, q)| {
                h_full[(a, b)] -= q;
                h_full[(b, a)] -= q;
                QBlock {
                    a,
                    b,
                    sigma1: sigma[a],
                    sigma2: sigma[b],
                    coupling: q,
                    offdiag: q,
                    diag_shift: (0.0, 0.0),
                }
            })
            .collect();
        AugmentedKkt {
            shape,
            h: h_full,
            sigma,
            jac,
            blocks,
            delta_w: 0.0,
            delta_c: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn m(&self) -> usize {
        self.jac.nrows()
    }

    pub fn order(&self) -> usize {
        self.n() + self.m()
    }

    /// Inertia the factorization must have for the step to be a descent
    /// direction.
    pub fn target_inertia(&self) -> super::Inertia {
        super::Inertia::new(self.n(), self.m(), 0)
    }

    /// Restores the unregularized complementarity blocks.
    pub fn reset_blocks(&mut self) {
        for b in &mut self.blocks {
            b.offdiag = b.coupling;
            b.diag_shift = (0.0, 0.0);
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.h);
        for i in 0..n {
            k[(i, i)] += self.sigma[i] + self.delta_w;
        }
        for blk in &self.blocks {
            k[(blk.a, blk.b)] += blk.offdiag;
            k[(blk.b, blk.a)] += blk.offdiag;
            k[(blk.a, blk.a)] += blk.diag_shift.0;
            k[(blk.b, blk.b)] += blk.diag_shift.1;
        }
        for r in 0..m {
            for c in 0..n {
                let v = self.jac[(r, c)];
                k[(n + r, c)] = v;
                k[(c, n + r)] = v;
            }
            k[(n + r, n + r)] = -self.delta_c;
        }
        k
    }

    /// The 2×2 Q blocks as currently written into the matrix.
    pub fn q_blocks(&self) -> Vec<[[f64; 2]; 2]> {
        self.blocks.iter().map(QBlock::matrix).collect()
    }
}

/// Barrier diagonal `Σ_j = z_j / (x_j − l_j)` (zero for unbounded variables).
pub fn barrier_sigma(slack: &[f64], z: &[f64], bounded: &[bool]) -> Result<DVector<f64>> {
    let mut s = DVector::zeros(slack.len());
    for j in 0..slack.len() {
        if !bounded[j] {
            continue;
        }
        if !(slack[j] > 0.0) {
            return Err(SolverError::NonInterior {
                component: "x",
                index: j,
                value: slack[j],
            });
        }
        if !(z[j] > 0.0) {
            return Err(SolverError::NonInterior {
                component: "z",
                index: j,
                value: z[j],
            });
        }
        s[j] = z[j] / slack[j];
    }
    Ok(s)
}

/// Relaxation-system inputs in the partitioned variables `(x0, x1, x2)` plus
/// relaxation slacks `s`.
#[derive(Debug, Clone)]
pub struct RelaxationKktInput<'a> {
    pub n0: usize,
    pub n_cc: usize,
    /// `W = ∇²(f + y_cᵀc)` of order `n0 + 2 n_cc` (without the `Y_s` terms).
    pub w: &'a DMatrix<f64>,
    /// Jacobian of `c`, `m × (n0 + 2 n_cc)`.
    pub jac_c: &'a DMatrix<f64>,
    pub x: &'a [f64],
    /// Distances to the lower bounds of `x` (equal to `x` without endgame).
    pub x_slack: &'a [f64],
    pub bounded: &'a [bool],
    pub z: &'a [f64],
    pub s: &'a [f64],
    pub z_s: &'a [f64],
    pub y_s: &'a [f64],
}

/// Builds the augmented relaxation system over `(x, s)` and `(y_c, y_s)`:
/// primal block `W + Q` with `Q` carrying `Σ_x` and `Y_s`, slack block `Σ_s`,
/// and the relaxation rows `[0, X2, X1, I]`.
pub fn assemble_relaxation_kkt(inp: &RelaxationKktInput<'_>) -> Result<AugmentedKkt> {
    let (n0, n_cc) = (inp.n0, inp.n_cc);
    let n = n0 + 2 * n_cc;
    let m = inp.jac_c.nrows();
    let nt = n + n_cc;
    let mut h = DMatrix::zeros(nt, nt);
    h.view_mut((0, 0), (n, n)).copy_from(inp.w);
    let mut sig = barrier_sigma(inp.x_slack, inp.z, inp.bounded)?;
    sig = sig.resize_vertically(nt, 0.0);
    for i in 0..n_cc {
        if !(inp.s[i] > 0.0) {
            return Err(SolverError::NonInterior {
                component: "s",
                index: i,
                value: inp.s[i],
            });
        }
        if !(inp.z_s[i] > 0.0) {
            return Err(SolverError::NonInterior {
                component: "z_s",
                index: i,
                value: inp.z_s[i],
            });
        }
        sig[n + i] = inp.z_s[i] / inp.s[i];
    }
    let mut jac = DMatrix::zeros(m + n_cc, nt);
    jac.view_mut((0, 0), (m, n)).copy_from(inp.jac_c);
    let mut couplings = Vec::with_capacity(n_cc);
    for i in 0..n_cc {
        let (a, b) = (n0 + i, n0 + n_cc + i);
        jac[(m + i, a)] = inp.x[b];
        jac[(m + i, b)] = inp.x[a];
        jac[(m + i, n + i)] = 1.0;
        h[(a, b)] += inp.y_s[i];
        h[(b, a)] += inp.y_s[i];
        couplings.push((a, b, inp.y_s[i]));
    }
    Ok(AugmentedKkt::new(KktShape::Relaxation, h, sig, jac, &couplings))
}

/// Penalty-system inputs.
#[derive(Debug, Clone)]
pub struct PenaltyKktInput<'a> {
    pub n0: usize,
    pub n_cc: usize,
    pub w: &'a DMatrix<f64>,
    pub jac_c: &'a DMatrix<f64>,
    pub x_slack: &'a [f64],
    pub bounded: &'a [bool],
    pub z: &'a [f64],
    pub rho: f64,
}

/// Builds the augmented penalty system with `Q_ρ` off-diagonals `ρ`.
pub fn assemble_penalty_kkt(inp: &PenaltyKktInput<'_>) -> Result<AugmentedKkt> {
    let (n0, n_cc) = (inp.n0, inp.n_cc);
    let mut h = inp.w.clone();
    let sig = barrier_sigma(inp.x_slack, inp.z, inp.bounded)?;
    let mut couplings = Vec::with_capacity(n_cc);
    for i in 0..n_cc {
        let (a, b) = (n0 + i, n0 + n_cc + i);
        h[(a, b)] += inp.rho;
        h[(b, a)] += inp.rho;
        couplings.push((a, b, inp.rho));
    }
    Ok(AugmentedKkt::new(KktShape::Penalty, h, sig, inp.jac_c.clone(), &couplings))
}

/// Bound-multiplier steps eliminated from the unreduced system:
/// `Δz_j = −(r_j + z_j Δx_j) / (x_j − l_j)` with `r_j = (x_j − l_j) z_j − μ`.
pub fn recover_bound_multiplier_steps(
    x_slack: &[f64],
    z: &[f64],
    bounded: &[bool],
    dx: &[f64],
    mu: f64,
) -> Vec<f64> {
    (0..x_slack.len())
        .map(|j| {
            if bounded[j] {
                let r = x_slack[j] * z[j] - mu;
                -(r + z[j] * dx[j]) / x_slack[j]
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxation_q_block_unit_iterate() {
        let w = DMatrix::zeros(2, 2);
        let jac = DMatrix::zeros(0, 2);
        let kkt = assemble_relaxation_kkt(&RelaxationKktInput {
            n0: 0,
            n_cc: 1,
            w: &w,
            jac_c: &jac,
            x: &[1.0, 1.0],
            x_slack: &[1.0, 1.0],
            bounded: &[true, true],
            z: &[1.0, 1.0],
            s: &[1.0],
            z_s: &[1.0],
            y_s: &[0.5],
        })
        .unwrap();
        assert_eq!(kkt.q_blocks(), vec![[[1.0, 0.5], [0.5, 1.0]]]);
        let k = kkt.matrix();
        assert_eq!(k, k.transpose());
        assert_eq!(kkt.order(), 4);
    }

    #[test]
    fn penalty_q_block() {
        let w = DMatrix::zeros(3, 3);
        let jac = DMatrix::zeros(0, 3);
        let kkt = assemble_penalty_kkt(&PenaltyKktInput {
            n0: 1,
            n_cc: 1,
            w: &w,
            jac_c: &jac,
            x_slack: &[1.0, 1.0, 1.0],
            bounded: &[true, true, true],
            z: &[1.0, 1.0, 1.0],
            rho: 2.0,
        })
        .unwrap();
        assert_eq!(kkt.q_blocks(), vec![[[1.0, 2.0], [2.0, 1.0]]]);
    }

    #[test]
    fn non_interior_is_named() {
        let w = DMatrix::zeros(1, 1);
        let jac = DMatrix::zeros(0, 1);
        let err = assemble_penalty_kkt(&PenaltyKktInput {
            n0: 1,
            n_cc: 0,
            w: &w,
            jac_c: &jac,
            x_slack: &[0.0],
            bounded: &[true],
            z: &[1.0],
            rho: 0.0,
        })
        .unwrap_err();
        assert!(matches!(err, SolverError::NonInterior { component: "x", index: 0, .. }));
    }

    #[test]
    fn bound_multiplier_hand_substitution() {
        let dx = 0.3;
        let dz = recover_bound_multiplier_steps(&[1.0], &[2.0], &[true], &[dx], 1.0);
        assert!((dz[0] + (1.0 + 2.0 * dx)).abs() < 1e-15);
        let dz = recover_bound_multiplier_steps(&[1.0], &[1.0], &[true], &[0.0], 1.0);
        assert_eq!(dz[0], 0.0);
    }
}
