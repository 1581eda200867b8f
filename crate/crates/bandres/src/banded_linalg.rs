//! Direct solution of (H − e·I)X = Y for complex-symmetric bands.
//!
//! The factorization is Gaussian elimination without pivoting, specialized
//! to symmetric band structure: eliminating column J below the diagonal
//! uses multipliers m_I = u(J,I)/d(J) read from the *upper* band, so only
//! the upper triangle is ever stored or updated. Row interchanges would
//! destroy both symmetry and bandwidth; they are also unnecessary here,
//! because the factorization is always applied to a shifted matrix whose
//! shift is a spectral estimate — exact pivot breakdown then means the
//! shift sits numerically on an eigenvalue, which the caller treats as a
//! reportable condition ([`LinalgError::SingularShift`]), not a panic.

use thiserror::Error;

use crate::hamiltonian_builder::{band_index, BandedComplexSymmetric};
use crate::ComplexScalar;

/// Pivot magnitudes at or below this floor are reported as a singular
/// shift. The floor is far below any physically scaled pivot, so it only
/// trips on genuine breakdown.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Errors from factorization and solves.
#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    /// A pivot collapsed: the shift coincides with an eigenvalue to
    /// working precision. `row` is 1-based.
    #[error("singular shift: pivot at row {row} below {PIVOT_FLOOR:e}")]
    SingularShift { row: usize },
    /// Right-hand side or vector length does not match the matrix.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Residual of the zero vector is undefined.
    #[error("residual of an identically zero vector is undefined")]
    ZeroColumn,
}

/// Eliminated upper band of (H − e·I), reusable across many right-hand
/// sides.
#[derive(Debug, Clone)]
pub struct BandFactorization {
    dim: usize,
    halfwidth: usize,
    /// Upper band of the eliminated matrix U, same 1-based layout
    /// b·J+K−b as the input band.
    data: Vec<ComplexScalar>,
}

impl BandFactorization {
    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Band halfwidth.
    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    /// Eliminated entry U(J,K), 1-based, K = J..=J+b (zero past the
    /// band or the matrix edge).
    fn u(&self, j: usize, k: usize) -> ComplexScalar {
        if k > self.dim || k > j + self.halfwidth {
            return ComplexScalar::new(0.0, 0.0);
        }
        let idx = band_index(j, k, self.halfwidth).expect("in band");
        self.data[idx - 1]
    }

    fn u_mut(&mut self, j: usize, k: usize) -> &mut ComplexScalar {
        let idx = band_index(j, k, self.halfwidth).expect("in band");
        &mut self.data[idx - 1]
    }

    /// Diagonal pivots d(J) of the eliminated matrix.
    pub fn pivot(&self, j: usize) -> ComplexScalar {
        self.u(j, j)
    }

    /// Solves (H − e·I)x = y using the stored elimination.
    ///
    /// Forward pass replays the row operations on the right-hand side
    /// with multipliers u(J,I)/d(J) recovered from symmetry; the back
    /// pass substitutes through the upper band.
    pub fn solve(&self, y: &[ComplexScalar]) -> Result<Vec<ComplexScalar>, LinalgError> {
        if y.len() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        let n = self.dim;
        let b = self.halfwidth;
        let mut x = y.to_vec();

        // Forward elimination of the right-hand side.
        for j in 1..=n {
            let d = self.u(j, j);
            let xj = x[j - 1];
            for i in (j + 1)..=(j + b).min(n) {
                let m = self.u(j, i) / d;
                x[i - 1] -= m * xj;
            }
        }

        // Back substitution.
        for j in (1..=n).rev() {
            let mut acc = x[j - 1];
            for k in (j + 1)..=(j + b).min(n) {
                acc -= self.u(j, k) * x[k - 1];
            }
            x[j - 1] = acc / self.u(j, j);
        }
        Ok(x)
    }
}

/// Eliminates the upper band of (H − e·I).
///
/// The input band is copied, the shift subtracted from the diagonal, and
/// symmetric Gaussian elimination applied in place. Pivots at or below
/// [`PIVOT_FLOOR`] abort with [`LinalgError::SingularShift`].
pub fn factor_shifted(
    h: &BandedComplexSymmetric,
    e: ComplexScalar,
) -> Result<BandFactorization, LinalgError> {
    let n = h.dim();
    let b = h.halfwidth();
    let mut f = BandFactorization {
        dim: n,
        halfwidth: b,
        data: h.data().to_vec(),
    };
    for j in 1..=n {
        *f.u_mut(j, j) -= e;
    }

    for j in 1..=n {
        let d = f.u(j, j);
        if d.norm() <= PIVOT_FLOOR {
            return Err(LinalgError::SingularShift { row: j });
        }
        // Eliminate rows I = J+1..J+b using the symmetric multiplier
        // m_I = u(J,I)/d; only the stored upper wedge of those rows is
        // touched.
        for i in (j + 1)..=(j + b).min(n) {
            let m = f.u(j, i) / d;
            for k in i..=(j + b).min(n) {
                let upd = m * f.u(j, k);
                *f.u_mut(i, k) -= upd;
            }
        }
    }
    // The last pivot is produced by the loop above but never used to
    // eliminate; it still must be checked before solves divide by it.
    Ok(f)
}

/// Infinity-norm relative residual ‖(H − e·I)x − s·y‖∞ / ‖x‖∞ with the
/// scaling s chosen so the residual measures the eigenpair quality of
/// (e, x) when y is the iterate that produced x. For eigenvalue work the
/// caller passes y = 0 and this reduces to ‖(H − e·I)x‖∞ / ‖x‖∞.
pub fn residual_norm(
    h: &BandedComplexSymmetric,
    e: ComplexScalar,
    x: &[ComplexScalar],
) -> Result<f64, LinalgError> {
    if x.len() != h.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: h.dim(),
            got: x.len(),
        });
    }
    let xmax = x.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    if xmax == 0.0 {
        return Err(LinalgError::ZeroColumn);
    }
    let hx = h.matvec(x);
    let rmax = hx
        .iter()
        .zip(x)
        .map(|(hv, xv)| (hv - e * xv).norm())
        .fold(0.0_f64, f64::max);
    Ok(rmax / xmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian_builder::BandedComplexSymmetric;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    #[test]
    fn one_by_one_shifted_pivot() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(3.0, 0.0)]);
        let f = factor_shifted(&h, c(1.0, 0.0)).unwrap();
        assert_eq!(f.pivot(1), c(2.0, 0.0));
        let x = f.solve(&[c(4.0, 0.0)]).unwrap();
        assert_eq!(x, vec![c(2.0, 0.0)]);
    }

    #[test]
    fn diagonal_pivots_are_shifted_entries() {
        let h = BandedComplexSymmetric::from_diagonal(&[
            c(1.0, 0.0),
            c(3.0, 0.0),
            c(5.0, 0.0),
        ]);
        let f = factor_shifted(&h, c(2.9, 0.0)).unwrap();
        for (j, want) in [(1, -1.9), (2, 0.1), (3, 2.1)] {
            assert!((f.pivot(j) - c(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn exact_eigenvalue_shift_is_singular() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let err = factor_shifted(&h, c(3.0, 0.0)).unwrap_err();
        assert_eq!(err, LinalgError::SingularShift { row: 2 });
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let h = BandedComplexSymmetric::from_upper_fn(4, 1, |j, k| {
            if j == k {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let f = factor_shifted(&h, c(0.0, 0.0)).unwrap();
        let y = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 0.0), c(7.0, -7.0)];
        let x = f.solve(&y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_solve_matches_hand_elimination() {
        // H = [[2,1,0],[1,2,1],[0,1,2]], e = 0. Solve H x = [1,0,1]^T:
        // exact solution x = [1, −1, 1]^T.
        let h = BandedComplexSymmetric::from_upper_fn(3, 1, |j, k| {
            if j == k {
                c(2.0, 0.0)
            } else {
                c(1.0, 0.0)
            }
        });
        let f = factor_shifted(&h, c(0.0, 0.0)).unwrap();
        let x = f.solve(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let want = [c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        for (a, b) in x.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_symmetric_solve_verified_by_matvec() {
        let h = BandedComplexSymmetric::from_upper_fn(6, 2, |j, k| {
            c(
                (j + k) as f64 + if j == k { 8.0 } else { 0.0 },
                (j as f64 - k as f64) * 0.3 + 0.1,
            )
        });
        let e = c(0.37, -0.21);
        let f = factor_shifted(&h, e).unwrap();
        let y: Vec<ComplexScalar> = (0..6).map(|i| c(i as f64 + 0.5, -(i as f64))).collect();
        let x = f.solve(&y).unwrap();
        let hx = h.matvec(&x);
        for i in 0..6 {
            let lhs = hx[i] - e * x[i];
            assert!(
                (lhs - y[i]).norm() <= 1e-12 * y[i].norm().max(1.0),
                "row {i}: {lhs} vs {}",
                y[i]
            );
        }
    }

    #[test]
    fn factorization_is_reusable_across_rhs() {
        let h = BandedComplexSymmetric::from_upper_fn(5, 1, |j, k| {
            if j == k {
                c(4.0 + j as f64, 1.0)
            } else {
                c(1.0, -0.5)
            }
        });
        let f = factor_shifted(&h, c(0.5, 0.5)).unwrap();
        for seed in 0..3_u32 {
            let y: Vec<ComplexScalar> = (0..5)
                .map(|i| c((i as f64) * 1.7 - seed as f64, seed as f64 * 0.3))
                .collect();
            let x = f.solve(&y).unwrap();
            let hx = h.matvec(&x);
            for i in 0..5 {
                let lhs = hx[i] - c(0.5, 0.5) * x[i];
                assert!((lhs - y[i]).norm() <= 1e-12 * (1.0 + y[i].norm()));
            }
        }
    }

    #[test]
    fn residual_of_exact_eigenvector_is_tiny() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0), c(5.0, 0.0)]);
        let x = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let r = residual_norm(&h, c(3.0, 0.0), &x).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn residual_scales_with_shift_error() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(1.0, 0.0), c(3.0, 0.0)]);
        let x = [c(0.0, 0.0), c(2.0, 0.0)];
        let r = residual_norm(&h, c(3.5, 0.0), &x).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn residual_rejects_zero_vector() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(1.0, 0.0)]);
        let err = residual_norm(&h, c(0.0, 0.0), &[c(0.0, 0.0)]).unwrap_err();
        assert_eq!(err, LinalgError::ZeroColumn);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let h = BandedComplexSymmetric::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let f = factor_shifted(&h, c(0.0, 0.0)).unwrap();
        assert_eq!(
            f.solve(&[c(1.0, 0.0)]).unwrap_err(),
            LinalgError::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
        assert_eq!(
            residual_norm(&h, c(0.0, 0.0), &[c(1.0, 0.0)]).unwrap_err(),
            LinalgError::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }
}
