use super::kkt::AugmentedKkt;
use super::ldl::sym2_eigs;

/// Complementarity-block regularization applied before inertia correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRegularization {
    /// Clamp the coupling to `α_B √(σ1 σ2)` (sign preserved).
    Critical { alpha_b: f64 },
    /// Clip the block eigenvalues from below.
    EigenClip { lambda_min: f64 },
    Off,
}

/// Clamps every coupling off-diagonal whose magnitude exceeds
/// `α_B √(z1 z2 / (x1 x2))`. Returns the number of blocks modified.
pub fn q_regularize_critical(kkt: &mut AugmentedKkt, alpha_b: f64) -> usize {
    let mut changed = 0;
    for blk in &mut kkt.blocks {
        let bound = alpha_b * (blk.sigma1 * blk.sigma2).sqrt();
        if blk.offdiag.abs() > bound {
            blk.offdiag = bound.copysign(blk.offdiag);
            changed += 1;
        }
    }
    changed
}

/// Raises the eigenvalues of every 2×2 block to at least `λ_min`. Returns the
/// number of blocks modified.
pub fn q_regularize_eig(kkt: &mut AugmentedKkt, lambda_min: f64) -> usize {
    let mut changed = 0;
    for blk in &mut kkt.blocks {
        let [[a, b], [_, c]] = blk.matrix();
        if let Some([[na, nb], [_, nc]]) = clip_block(a, b, c, lambda_min) {
            blk.diag_shift = (blk.diag_shift.0 + na - a, blk.diag_shift.1 + nc - c);
            blk.offdiag = nb;
            // the stored block is base + shift; re-check after that rounding
            for _ in 0..4 {
                let [[a, b], [_, c]] = blk.matrix();
                let (lo, _) = sym2_eigs(a, b, c);
                if lo >= lambda_min {
                    break;
                }
                let shift = (lambda_min - lo).max(f64::EPSILON * a.abs().max(c.abs()));
                blk.diag_shift = (blk.diag_shift.0 + shift, blk.diag_shift.1 + shift);
            }
            changed += 1;
        }
    }
    changed
}

/// Returns the clipped block, or `None` when both eigenvalues already exceed
/// `lambda_min`.
pub fn clip_block(a: f64, b: f64, c: f64, lambda_min: f64) -> Option<[[f64; 2]; 2]> {
    let (lo, hi) = sym2_eigs(a, b, c);
    if lo >= lambda_min {
        return None;
    }
    if b == 0.0 {
        return Some([[a.max(lambda_min), 0.0], [0.0, c.max(lambda_min)]]);
    }
    let mut out = [[a, b], [b, c]];
    for lam in [lo, hi] {
        if lam >= lambda_min {
            continue;
        }
        let v = eigvec(a, b, c, lam);
        let bump = lambda_min - lam;
        out[0][0] += bump * v[0] * v[0];
        out[0][1] += bump * v[0] * v[1];
        out[1][0] += bump * v[1] * v[0];
        out[1][1] += bump * v[1] * v[1];
    }
    // the rank-one bumps round at the scale of the large eigenvalue
    for _ in 0..4 {
        let (lo, _) = sym2_eigs(out[0][0], out[0][1], out[1][1]);
        if lo >= lambda_min {
            break;
        }
        let shift = (lambda_min - lo).max(f64::EPSILON * out[0][0].abs().max(out[1][1].abs()));
        out[0][0] += shift;
        out[1][1] += shift;
    }
    Some(out)
}

fn eigvec(a: f64, b: f64, c: f64, lam: f64) -> [f64; 2] {
    let (p, q) = if (lam - a).abs() >= (lam - c).abs() {
        (b, lam - a)
    } else {
        (lam - c, b)
    };
    let nrm = p.hypot(q);
    [p / nrm, q / nrm]
}

/// Positive definiteness of `[[a, b], [b, c]]` by the trace/determinant test.
pub fn block_is_pd(m: &[[f64; 2]; 2]) -> bool {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    det > 0.0 && m[0][0] + m[1][1] > 0.0
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::linalg::kkt::KktShape;

    fn unit_block(y: f64) -> AugmentedKkt {
        AugmentedKkt::new(
            KktShape::Relaxation,
            DMatrix::from_row_slice(2, 2, &[0.0, y, y, 0.0]),
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::zeros(0, 2),
            &[(0, 1, y)],
        )
    }

    #[test]
    fn critical_within_bound_unchanged() {
        let mut k = unit_block(0.5);
        assert_eq!(q_regularize_critical(&mut k, 0.999), 0);
        assert_eq!(k.q_blocks()[0], [[1.0, 0.5], [0.5, 1.0]]);
        let mut k = unit_block(0.0);
        assert_eq!(q_regularize_critical(&mut k, 0.999), 0);
    }

    #[test]
    fn critical_clamps_large_multiplier() {
        let mut k = unit_block(5.0);
        assert_eq!(q_regularize_critical(&mut k, 0.999), 1);
        let blk = k.q_blocks()[0];
        assert_eq!(blk[0][1], 0.999);
        let (lo, hi) = sym2_eigs(blk[0][0], blk[0][1], blk[1][1]);
        assert!((lo - 0.001).abs() < 1e-12 && (hi - 1.999).abs() < 1e-12);
        let mut k = unit_block(-5.0);
        q_regularize_critical(&mut k, 0.999);
        assert_eq!(k.q_blocks()[0][0][1], -0.999);
    }

    #[test]
    fn eig_clip_cases() {
        assert!(clip_block(1.0, 0.0, 1.0, 1e-8).is_none());
        let m = clip_block(0.0, 1.0, 0.0, 1e-8).unwrap();
        for v in m.iter().flatten() {
            assert!((v - 0.5).abs() < 1e-8);
        }
        let m = clip_block(2.0, 3.0, 2.0, 1e-8).unwrap();
        let (lo, _) = sym2_eigs(m[0][0], m[0][1], m[1][1]);
        assert!(lo >= 1e-8 - 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn regularized_blocks_are_positive_definite(
            s1 in 1e-6f64..1e3,
            s2 in 1e-6f64..1e3,
            y in -1e3f64..1e3,
            alpha in 0.5f64..0.9999,
        ) {
            let mut k = AugmentedKkt::new(
                KktShape::Relaxation,
                DMatrix::from_row_slice(2, 2, &[0.0, y, y, 0.0]),
                DVector::from_vec(vec![s1, s2]),
                DMatrix::zeros(0, 2),
                &[(0, 1, y)],
            );
            q_regularize_critical(&mut k, alpha);
            proptest::prop_assert!(block_is_pd(&k.q_blocks()[0]));
            k.reset_blocks();
            q_regularize_eig(&mut k, 1e-8);
            let m = k.q_blocks()[0];
            let (lo, _) = sym2_eigs(m[0][0], m[0][1], m[1][1]);
            proptest::prop_assert!(lo >= 1e-8 - 1e-14 * (1.0 + s1.max(s2).max(y.abs())), "{lo}");
        }
    }
}
