//! Flux and stabilization matrices of the micro-macro P_N system.
//!
//! All matrices are built from the `N+1` point Gauss-Legendre rule through
//! the transform `T_ik = sqrt(w_k) p_i(mu_k)`, `i = 1..N`. In particular the
//! stabilization `|A| = T |M| T^T` is *not* the Roe matrix obtained from the
//! eigendecomposition of `A`; the extra quadrature column is what lets the
//! stability estimates diagonalise the scheme.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, legendre_orthonormal_upto, recurrence_coeff, QuadratureSet};

#[derive(Debug, Clone)]
pub struct FluxOperators {
    /// Number of microscopic moments `N`.
    pub n: usize,
    pub quad: QuadratureSet,
    /// Flux matrix `A = T M T^T` (symmetric tridiagonal, zero diagonal).
    pub a: DMatrix<f64>,
    /// Analytic off-diagonal `a_1, ..., a_{N-1}`.
    pub a_offdiag: Vec<f64>,
    pub abs_a: DMatrix<f64>,
    pub a_plus: DMatrix<f64>,
    pub a_minus: DMatrix<f64>,
    /// Coupling vector `(a_0, 0, ..., 0)`.
    pub a_vec: DVector<f64>,
    /// `N x (N+1)` transform over degrees `1..=N`.
    pub t: DMatrix<f64>,
    /// `(N+1) x (N+1)` transform over degrees `0..=N`.
    pub tf: DMatrix<f64>,
    /// `(0, a_0, 0, ..., 0)` of length `N+1`.
    pub af: DVector<f64>,
    pub a0: f64,
}

pub fn build_operators(n: usize) -> Result<FluxOperators> {
    if n == 0 {
        return Err(Error::InvalidArgument("moment count N must be at least 1".into()));
    }
    let quad = gauss_legendre(n + 1)?;
    let nodes = &quad.nodes;

    let mut tf = DMatrix::zeros(n + 1, n + 1);
    for (k, (&mu, &w)) in nodes.iter().zip(&quad.weights).enumerate() {
        let p = legendre_orthonormal_upto(n, mu);
        let sw = w.sqrt();
        for i in 0..=n {
            tf[(i, k)] = sw * p[i];
        }
    }
    let t = tf.rows(1, n).into_owned();

    let m = DVector::from_column_slice(nodes);
    let abs_m = m.map(f64::abs);
    let plus_m = (&m + &abs_m) * 0.5;
    let minus_m = (&m - &abs_m) * 0.5;

    let sandwich = |d: &DVector<f64>| -> DMatrix<f64> {
        let mut td = t.clone();
        for (k, mut col) in td.column_iter_mut().enumerate() {
            col *= d[k];
        }
        let mut out = &td * t.transpose();
        symmetrize(&mut out);
        out
    };

    let a = sandwich(&m);
    let abs_a = sandwich(&abs_m);
    let a_plus = sandwich(&plus_m);
    let a_minus = sandwich(&minus_m);

    let a0 = recurrence_coeff(0);
    let mut a_vec = DVector::zeros(n);
    a_vec[0] = a0;
    let mut af = DVector::zeros(n + 1);
    af[1] = a0;

    Ok(FluxOperators {
        n,
        quad,
        a,
        a_offdiag: (1..n).map(recurrence_coeff).collect(),
        abs_a,
        a_plus,
        a_minus,
        a_vec,
        t,
        tf,
        af,
        a0,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

impl FluxOperators {
    /// The analytic tridiagonal flux matrix.
    pub fn analytic_a(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (l, &c) in self.a_offdiag.iter().enumerate() {
            a[(l, l + 1)] = c;
            a[(l + 1, l)] = c;
        }
        a
    }

    /// `Y A` for a row-stacked field `Y` (`rows x N`), using the tridiagonal
    /// structure of `A`.
    pub(crate) fn right_mul_a(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(y.nrows(), n);
        for (l, &c) in self.a_offdiag.iter().enumerate() {
            // (Y A)_{:,l+1} += c Y_{:,l};  (Y A)_{:,l} += c Y_{:,l+1}
            let yl = y.column(l).into_owned();
            let yl1 = y.column(l + 1).into_owned();
            out.column_mut(l + 1).axpy(c, &yl, 1.0);
            out.column_mut(l).axpy(c, &yl1, 1.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn zero_moments_rejected() {
        assert!(build_operators(0).is_err());
    }

    #[test]
    fn single_moment() {
        let ops = build_operators(1).unwrap();
        assert_eq!(ops.a.shape(), (1, 1));
        assert_abs_diff_eq!(ops.a[(0, 0)], 0.0, epsilon = 1e-15);
        // sum_k w_k p_1(mu_k)^2 |mu_k| with the 2-point rule
        let s = 1.0 / 3f64.sqrt();
        let expected = 2.0 * 1.5 * s * s * s;
        assert_abs_diff_eq!(ops.abs_a[(0, 0)], expected, epsilon = 1e-14);
        assert!(ops.abs_a[(0, 0)] > 0.0);
    }

    #[test]
    fn two_moments_offdiagonal() {
        let ops = build_operators(2).unwrap();
        assert_abs_diff_eq!(ops.a[(0, 1)], 2.0 / 15f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(ops.a[(1, 0)], 2.0 / 15f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn splitting_identities() {
        for n in [1, 2, 5, 20, 64] {
            let ops = build_operators(n).unwrap();
            assert!(max_abs(&(&ops.a - (&ops.a_plus + &ops.a_minus))) < 1e-13);
            assert!(max_abs(&(&ops.abs_a - (&ops.a_plus - &ops.a_minus))) < 1e-13);
            assert!(max_abs(&(&ops.a - ops.analytic_a())) < 1e-12);
            let eig = ops.abs_a.clone().symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > -1e-12));
            let tf_tft = &ops.tf * ops.tf.transpose();
            assert!(max_abs(&(tf_tft - DMatrix::identity(n + 1, n + 1))) < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_right_multiplication() {
        let ops = build_operators(6).unwrap();
        let y = DMatrix::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.7);
        let dense = &y * &ops.a;
        assert!(max_abs(&(ops.right_mul_a(&y) - dense)) < 1e-14);
    }

    #[test]
    fn tf_transpose_af_entries() {
        let ops = build_operators(9).unwrap();
        let v = ops.tf.transpose() * &ops.af;
        for k in 0..=ops.n {
            let expected = (ops.quad.weights[k] / 2.0).sqrt() * ops.quad.nodes[k];
            assert_abs_diff_eq!(v[k], expected, epsilon = 1e-14);
        }
    }
}
