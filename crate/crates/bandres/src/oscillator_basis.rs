//! Reference oscillator spectrum and exact coordinate-power matrices.
//!
//! The reference Hamiltonian is H(W) = −αD² + Wx² with α > 0 real and W
//! complex. Its n-th level energy is E_n = (2n+1)·(Wα)^{1/2} and the
//! coordinate operator has the single nonzero matrix element
//! ⟨n|x|n+1⟩ = (α/4W)^{1/4}·(n+1)^{1/2} between neighbouring levels, so
//! every polynomial in x maps to a banded complex *symmetric* matrix in
//! this basis. Complex roots are taken on the principal branch; that
//! choice reproduces all shipped reference data (see the presets).
//!
//! Matrices of x^p are built edge-effect free: the x matrix is formed at
//! dimension size+p and multiplied p−1 times, shrinking the trusted block
//! by one row/column per multiplication, so the returned size×size block
//! contains no truncation artifacts and has bandwidth exactly p.

use ndarray::Array2;
use thiserror::Error;

use crate::{is_finite_c, ComplexScalar};

/// Errors from basis-level operations.
#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    /// An input carried a NaN or infinite component.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    /// Root order other than 2 or 4 requested.
    #[error("unsupported root order {0}; only square and fourth roots are provided")]
    UnsupportedRootOrder(u32),
    /// Parameters violate a BasisSpec invariant.
    #[error("invalid basis spec: {0}")]
    InvalidSpec(&'static str),
}

/// Parity sector of the oscillator basis.
///
/// `Even`/`Odd` retain only the even- or odd-index basis functions, valid
/// when the assembled potential couples states of a single parity (checked
/// by the Hamiltonian builder); `Full` is always permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Full,
}

/// Reference-oscillator parameters: kinetic coefficient α, complex width
/// W, parity sector, and the number of retained basis functions.
///
/// Construction validates α > 0, dim ≥ 1, finite components, and W ≠ 0
/// (the reference oscillator degenerates at W = 0, which is why the
/// coordinate matrix element has no value there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    alpha: f64,
    w: ComplexScalar,
    parity: Parity,
    dim: usize,
}

impl BasisSpec {
    /// Validates and builds a basis description.
    pub fn new(
        alpha: f64,
        w: ComplexScalar,
        parity: Parity,
        dim: usize,
    ) -> Result<Self, BasisError> {
        if !alpha.is_finite() {
            return Err(BasisError::NonFinite("alpha"));
        }
        if !is_finite_c(w) {
            return Err(BasisError::NonFinite("w"));
        }
        if alpha <= 0.0 {
            return Err(BasisError::InvalidSpec("alpha must be > 0"));
        }
        if w == ComplexScalar::new(0.0, 0.0) {
            return Err(BasisError::InvalidSpec(
                "w must be nonzero (reference oscillator undefined at W = 0)",
            ));
        }
        if dim < 1 {
            return Err(BasisError::InvalidSpec("dim must be >= 1"));
        }
        Ok(Self {
            alpha,
            w,
            parity,
            dim,
        })
    }

    /// Kinetic coefficient α.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Complex reference width W.
    pub fn w(&self) -> ComplexScalar {
        self.w
    }

    /// Parity sector.
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Number of retained basis functions.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Copy of this spec with a different dimension (used by dimension
    /// sweeps).
    pub fn with_dim(&self, dim: usize) -> Result<Self, BasisError> {
        Self::new(self.alpha, self.w, self.parity, dim)
    }
}

/// Principal k-th root of a complex number, k ∈ {2, 4}.
///
/// The result's argument lies in (−π/k, π/k] and result^k reproduces the
/// input to ≤ 1e-14 relative error. `z = 0` returns 0 (documented
/// convention, not an error); NaN/Inf components are rejected.
pub fn principal_root(z: ComplexScalar, k: u32) -> Result<ComplexScalar, BasisError> {
    if !is_finite_c(z) {
        return Err(BasisError::NonFinite("principal_root argument"));
    }
    match k {
        2 => Ok(z.sqrt()),
        4 => Ok(z.sqrt().sqrt()),
        other => Err(BasisError::UnsupportedRootOrder(other)),
    }
}

/// Energy of reference level n: E_n = (2n+1)·(Wα)^{1/2}, principal branch.
pub fn level_energy(spec: &BasisSpec, n: usize) -> ComplexScalar {
    // W and α are finite and nonzero by construction, so the principal
    // square root cannot fail.
    let root = (spec.w * spec.alpha).sqrt();
    ComplexScalar::new((2 * n + 1) as f64, 0.0) * root
}

/// Coordinate matrix element ⟨n|x|n+1⟩ = (α/4W)^{1/4}·(n+1)^{1/2},
/// principal branch.
pub fn x_matrix_element(spec: &BasisSpec, n: usize) -> ComplexScalar {
    // α/(4W) is finite and nonzero by the BasisSpec invariants, so the
    // principal fourth root cannot fail. (W = 0 is rejected at
    // construction; the element is undefined there.)
    let quarter = ComplexScalar::new(spec.alpha, 0.0) / (4.0 * spec.w);
    let root = quarter.sqrt().sqrt();
    root * ((n + 1) as f64).sqrt()
}

/// Full size×size matrix of the coordinate operator: zero except for the
/// super- and sub-diagonal entries from [`x_matrix_element`]. Complex
/// symmetric (M = Mᵀ, no conjugation) by construction.
///
/// # Panics
/// If `size` is 0.
pub fn build_x_matrix(spec: &BasisSpec, size: usize) -> Array2<ComplexScalar> {
    assert!(size >= 1, "build_x_matrix requires size >= 1");
    let mut m = Array2::zeros((size, size));
    for n in 0..size.saturating_sub(1) {
        let e = x_matrix_element(spec, n);
        m[[n, n + 1]] = e;
        m[[n + 1, n]] = e;
    }
    m
}

/// Exact size×size matrix of x^p, edge-effect free.
///
/// The x matrix is built at dimension size+p and multiplied p−1 times.
/// After each multiplication by the (tridiagonal) x matrix the trusted
/// block shrinks by one index, because entry (j,k) of x^{m+1} draws on
/// rows k±1 of x^m; starting p rows oversized therefore leaves the
/// returned block free of truncation edge effects. The result has
/// bandwidth exactly p and is bitwise symmetric: only the upper triangle
/// is computed and then mirrored.
///
/// # Panics
/// If `p` is 0 or `size` is 0.
pub fn build_power_matrix(spec: &BasisSpec, p: usize, size: usize) -> Array2<ComplexScalar> {
    assert!(p >= 1, "build_power_matrix requires p >= 1");
    assert!(size >= 1, "build_power_matrix requires size >= 1");
    let padded = size + p;
    let x = build_x_matrix(spec, padded);
    // `cur` holds x^m, exact on its leading `valid`×`valid` block.
    let mut cur = x.clone();
    let mut valid = padded;
    for m in 1..p {
        valid -= 1;
        let mut next = Array2::zeros((valid, valid));
        // Multiply by the tridiagonal x: (x^{m+1})[j][k] has only the
        // i = k−1 and i = k+1 contributions. Upper triangle within the
        // bandwidth m+1, mirrored afterwards for bitwise symmetry.
        let bw = m + 1;
        for j in 0..valid {
            let kmax = (j + bw).min(valid - 1);
            for k in j..=kmax {
                let mut sum = ComplexScalar::new(0.0, 0.0);
                if k > 0 {
                    sum += cur[[j, k - 1]] * x[[k - 1, k]];
                }
                if k + 1 < padded {
                    sum += cur[[j, k + 1]] * x[[k + 1, k]];
                }
                next[[j, k]] = sum;
                next[[k, j]] = sum;
            }
        }
        cur = next;
    }
    let mut out = Array2::zeros((size, size));
    for j in 0..size {
        for k in 0..size {
            out[[j, k]] = cur[[j, k]];
        }
    }
    out
}
