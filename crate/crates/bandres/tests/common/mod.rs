//! Helpers shared by the integration suites: densification into
//! nalgebra types, a general dense eigensolver used as an independent
//! oracle, and small distance utilities.
#![allow(dead_code)]

use bandres::hamiltonian_builder::BandedComplexSymmetric;
use bandres::ComplexScalar;
use nalgebra::DMatrix;

/// Expands a compact band into a dense nalgebra matrix (0-based),
/// independent of the crate's own `to_dense`.
pub fn densify(m: &BandedComplexSymmetric) -> DMatrix<ComplexScalar> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |r, c| m.get(r + 1, c + 1))
}

/// All eigenvalues of a dense complex matrix via Schur decomposition —
/// an algorithm entirely unrelated to shifted inverse iteration, which
/// is what makes it usable as an oracle.
pub fn dense_eigenvalues(m: &DMatrix<ComplexScalar>) -> Vec<ComplexScalar> {
    let t = m.clone().schur().unpack().1;
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// Distance from `z` to the nearest element of `set`.
pub fn nearest_distance(set: &[ComplexScalar], z: ComplexScalar) -> f64 {
    set.iter()
        .map(|e| (e - z).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Max relative entrywise difference between two ndarray matrices.
pub fn max_rel_diff(
    a: &ndarray::Array2<ComplexScalar>,
    b: &ndarray::Array2<ComplexScalar>,
) -> f64 {
    let scale = a
        .iter()
        .map(|z| z.norm())
        .fold(1e-300_f64, f64::max)
        .max(b.iter().map(|z| z.norm()).fold(1e-300_f64, f64::max));
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0_f64, f64::max)
        / scale
}

/// Shorthand complex constructor.
pub fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}
