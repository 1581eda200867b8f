//! Bound-state and resonance energies of polynomially perturbed oscillator
//! Hamiltonians.
//!
//! The method expands H = −αD² + V(x), with V a polynomial, in the
//! eigenbasis of a reference oscillator H(W) = −αD² + Wx² whose width
//! parameter W may be complex. A complex W tilts the basis functions into
//! the complex plane, so metastable (resonance) states acquire square-
//! integrable representatives and their complex energies E = ER + i·EI
//! become ordinary eigenvalues of a finite complex *symmetric* (not
//! Hermitian) matrix. Because x couples only neighbouring oscillator
//! levels, a degree-p potential produces a banded matrix of halfwidth p,
//! which is stored compactly and factored by Gaussian elimination without
//! pivoting. Selected eigenvalues are then located by shifted inverse
//! iteration and confirmed by scanning the energy range.
//!
//! Module map:
//! - [`oscillator_basis`] — reference spectrum and exact matrices of x^p;
//! - [`hamiltonian_builder`] — polynomial potentials, origin shifts,
//!   parity reduction, band assembly;
//! - [`banded_linalg`] — in-band Gaussian elimination and solves;
//! - [`resonance_engine`] — inverse iteration, energy scans, dimension
//!   sweeps, reference-row diagnostics;
//! - [`observables`] — expectation values by the energy-shift
//!   (finite-difference Hellmann–Feynman) method;
//! - [`cli_runner`] — configuration files, shipped presets, report
//!   emission; drives the `bandres` binary.

pub mod banded_linalg;
pub mod cli_runner;
pub mod hamiltonian_builder;
pub mod observables;
pub mod oscillator_basis;
pub mod resonance_engine;

/// Complex scalar used throughout: energies E = ER + i·EI, basis
/// parameters W = WR + i·WI, matrix entries.
///
/// Public operations reject NaN/Inf components at their boundaries; see
/// each module's error type.
pub type ComplexScalar = num_complex::Complex64;

/// Returns true when both components of `z` are finite.
pub(crate) fn is_finite_c(z: ComplexScalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
