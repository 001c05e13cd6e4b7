use nalgebra::{DMatrix, DVector};

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_zero: usize,
}

impl Inertia {
    pub fn new(n_pos: usize, n_neg: usize, n_zero: usize) -> Self {
        Inertia { n_pos, n_neg, n_zero }
    }

    pub fn order(&self) -> usize {
        self.n_pos + self.n_neg + self.n_zero
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.n_pos, self.n_neg, self.n_zero)
    }
}

#[derive(Debug, Clone, Copy)]
enum Pivot {
    One(f64),
    Two(f64, f64, f64),
}

/// Pivots below this magnitude (after equilibration) count as zero.
pub const ZERO_PIVOT_TOL: f64 = 1e-12;

/// Bunch–Kaufman growth bound `(1 + √17) / 8`.
const BK_ALPHA: f64 = 0.640_388_203_202_208_4;

/// Dense symmetric indefinite factorization `P S A S Pᵀ = L D Lᵀ`, where `S`
/// is a diagonal equilibration and `D` has 1×1 and 2×2 blocks.
#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    l: DMatrix<f64>,
    pivots: Vec<(usize, Pivot)>,
    perm: Vec<usize>,
    scale: Vec<f64>,
    inertia: Inertia,
    /// Magnitude substituted for zero pivots when solving anyway.
    zero_substitute: f64,
}

impl Ldl {
    pub fn factor(a: &DMatrix<f64>) -> Ldl {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LDLᵀ needs a square matrix");
        let scale = ruiz_scaling(a, 10);
        let mut w = a.clone();
        for j in 0..n {
            for i in 0..n {
                w[(i, j)] *= scale[i] * scale[j];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = DMatrix::<f64>::identity(n, n);
        let mut pivots = Vec::new();
        let mut inertia = Inertia::default();

        let mut k = 0;
        while k < n {
            let akk = w[(k, k)].abs();
            let (mut lambda, mut r) = (0.0, k);
            for i in k + 1..n {
                if w[(i, k)].abs() > lambda {
                    lambda = w[(i, k)].abs();
                    r = i;
                }
            }
            if akk.max(lambda) <= ZERO_PIVOT_TOL {
                // column is numerically zero
                pivots.push((k, Pivot::One(w[(k, k)])));
                inertia.n_zero += 1;
                for i in k + 1..n {
                    l[(i, k)] = 0.0;
                }
                k += 1;
                continue;
            }
            let two_by_two;
            if akk >= BK_ALPHA * lambda {
                two_by_two = false;
            } else {
                let mut sigma = 0.0f64;
                for j in k..n {
                    if j != r {
                        sigma = sigma.max(w[(r, j)].abs());
                    }
                }
                if akk * sigma >= BK_ALPHA * lambda * lambda {
                    two_by_two = false;
                } else if w[(r, r)].abs() >= BK_ALPHA * sigma {
                    swap_sym(&mut w, &mut l, &mut perm, k, r);
                    two_by_two = false;
                } else {
                    swap_sym(&mut w, &mut l, &mut perm, k + 1, r);
                    two_by_two = true;
                }
            }

            if !two_by_two {
                let d = w[(k, k)];
                if d.abs() <= ZERO_PIVOT_TOL {
                    inertia.n_zero += 1;
                } else if d > 0.0 {
                    inertia.n_pos += 1;
                } else {
                    inertia.n_neg += 1;
                }
                let dinv = if d.abs() <= ZERO_PIVOT_TOL { 0.0 } else { 1.0 / d };
                for i in k + 1..n {
                    l[(i, k)] = w[(i, k)] * dinv;
                }
                for j in k + 1..n {
                    let ljd = l[(j, k)] * d;
                    if ljd == 0.0 {
                        continue;
                    }
                    for i in j..n {
                        w[(i, j)] -= l[(i, k)] * ljd;
                        w[(j, i)] = w[(i, j)];
                    }
                }
                pivots.push((k, Pivot::One(d)));
                k += 1;
            } else {
                let (a, b, c) = (w[(k, k)], w[(k + 1, k)], w[(k + 1, k + 1)]);
                let det = a * c - b * b;
                let (e1, e2) = sym2_eigs(a, b, c);
                for e in [e1, e2] {
                    if e.abs() <= ZERO_PIVOT_TOL {
                        inertia.n_zero += 1;
                    } else if e > 0.0 {
                        inertia.n_pos += 1;
                    } else {
                        inertia.n_neg += 1;
                    }
                }
                for i in k + 2..n {
                    let (p, q) = (w[(i, k)], w[(i, k + 1)]);
                    l[(i, k)] = (p * c - q * b) / det;
                    l[(i, k + 1)] = (q * a - p * b) / det;
                }
                for j in k + 2..n {
                    let (pj, qj) = (w[(j, k)], w[(j, k + 1)]);
                    for i in j..n {
                        w[(i, j)] -= l[(i, k)] * pj + l[(i, k + 1)] * qj;
                        w[(j, i)] = w[(i, j)];
                    }
                }
                pivots.push((k, Pivot::Two(a, b, c)));
                k += 2;
            }
        }

        Ldl {
            n,
            l,
            pivots,
            perm,
            scale,
            inertia,
            zero_substitute: 1e-300,
        }
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn is_singular(&self) -> bool {
        self.inertia.n_zero > 0
    }

    /// Solves `A x = b` with the stored factors (no refinement).
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        // y = P S b
        let mut y = DVector::zeros(n);
        for i in 0..n {
            y[i] = self.scale[self.perm[i]] * b[self.perm[i]];
        }
        // forward: L u = y
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for i in j + 1..n {
                    y[i] -= self.l[(i, j)] * yj;
                }
            }
        }
        // block diagonal
        for &(k, piv) in &self.pivots {
            match piv {
                Pivot::One(d) => {
                    let d = if d.abs() <= ZERO_PIVOT_TOL {
                        if d < 0.0 {
                            -self.zero_substitute.max(d.abs())
                        } else {
                            self.zero_substitute.max(d.abs())
                        }
                    } else {
                        d
                    };
                    y[k] /= d;
                }
                Pivot::Two(a, b, c) => {
                    let det = a * c - b * b;
                    let (p, q) = (y[k], y[k + 1]);
                    y[k] = (c * p - b * q) / det;
                    y[k + 1] = (a * q - b * p) / det;
                }
            }
        }
        // backward: Lᵀ v = u
        for j in (0..n).rev() {
            let mut s = y[j];
            for i in j + 1..n {
                s -= self.l[(i, j)] * y[i];
            }
            y[j] = s;
        }
        let mut x = DVector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = self.scale[self.perm[i]] * y[i];
        }
        x
    }

    /// Sets the value used in place of zero pivots by [`Ldl::solve`].
    pub fn with_zero_substitute(mut self, v: f64) -> Self {
        self.zero_substitute = v;
        self
    }
}

fn swap_sym(w: &mut DMatrix<f64>, l: &mut DMatrix<f64>, perm: &mut [usize], a: usize, b: usize) {
    if a == b {
        return;
    }
    w.swap_rows(a, b);
    w.swap_columns(a, b);
    perm.swap(a, b);
    // previously computed multipliers live in columns < min(a, b)
    let lo = a.min(b);
    for j in 0..lo {
        let t = l[(a, j)];
        l[(a, j)] = l[(b, j)];
        l[(b, j)] = t;
    }
}

/// Eigenvalues of `[[a, b], [b, c]]`, ascending.
pub fn sym2_eigs(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let hi = mean + rad;
    // avoid cancellation in the smaller eigenvalue
    // Kahan's fma determinant: exact up to one rounding
    let w = b * b;
    let det = a.mul_add(c, -w) + (-b).mul_add(b, w);
    let lo = if hi != 0.0 && mean > 0.0 { det / hi } else { mean - rad };
    if lo <= hi {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

/// Symmetric Ruiz equilibration: returns `d` such that `diag(d) A diag(d)`
/// has rows of max-norm close to one.
pub fn ruiz_scaling(a: &DMatrix<f64>, passes: usize) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    let mut work = a.clone();
    for _ in 0..passes {
        let mut done = true;
        let mut r = vec![1.0; n];
        for i in 0..n {
            let mut m = 0.0f64;
            for j in 0..n {
                m = m.max(work[(i, j)].abs());
            }
            if m > 0.0 && m.is_finite() {
                r[i] = 1.0 / m.sqrt();
                if (1.0 - m).abs() > 1e-2 {
                    done = false;
                }
            }
        }
        if done {
            break;
        }
        for j in 0..n {
            for i in 0..n {
                work[(i, j)] *= r[i] * r[j];
            }
        }
        for i in 0..n {
            d[i] *= r[i];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_inertia() {
        let f = Ldl::factor(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])));
        assert_eq!(f.inertia(), Inertia::new(1, 1, 0));
        let f = Ldl::factor(&DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 0.0])));
        assert_eq!(f.inertia(), Inertia::new(2, 0, 1));
        assert!(f.is_singular());
    }

    #[test]
    fn saddle_point_needs_two_by_two() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 2.0, 1.0]);
        let f = Ldl::factor(&a);
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|&&e| e > 0.0).count();
        assert_eq!(f.inertia().n_pos, pos);
        assert_eq!(f.inertia().n_neg, 3 - pos);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = f.solve(&b);
        assert!((&a * x - b).amax() < 1e-12);
    }

    #[test]
    fn sym2_small_eigenvalue_accurate() {
        let (lo, hi) = sym2_eigs(1.0, 0.999_9, 1.0);
        assert!((lo - 1e-4).abs() < 1e-15);
        assert!((hi - 1.9999).abs() < 1e-12);
    }

    fn sign_counts(a: &DMatrix<f64>) -> Option<Inertia> {
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let scale = eig.amax().max(1.0);
        // ambiguous near-zero eigenvalues say nothing about the factorization
        if eig.iter().any(|e| e.abs() <= 1e-9 * scale) {
            return None;
        }
        let pos = eig.iter().filter(|&&e| e > 0.0).count();
        Some(Inertia::new(pos, a.nrows() - pos, 0))
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn inertia_matches_eigensolver(
            vals in proptest::collection::vec(-3.0f64..3.0, 400),
            zeros in proptest::collection::vec(proptest::bool::weighted(0.3), 400),
            m in 0usize..8,
        ) {
            // 20×20 saddle-point matrix with a sparse-ish primal block
            let n = 20;
            let a = DMatrix::from_fn(n, n, |i, j| {
                let (i, j) = (i.min(j), i.max(j));
                let k = i * n + j;
                if i >= n - m && j >= n - m || zeros[k] { 0.0 } else { vals[k] }
            });
            if let Some(expected) = sign_counts(&a) {
                let f = Ldl::factor(&a);
                proptest::prop_assert_eq!(f.inertia(), expected);
                let b = DVector::from_fn(n, |i, _| i as f64 - 7.0);
                let x = f.solve(&b);
                proptest::prop_assert!((&a * x - &b).amax() <= 1e-6 * (1.0 + b.amax()));
            }
        }
    }
}
