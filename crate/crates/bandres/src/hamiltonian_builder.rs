//! Assembly of H = −αD² + V(x) as a compact complex-symmetric band.
//!
//! The Hamiltonian is partitioned against the reference oscillator:
//! H = diag(E_n) + Σ_k c_k·x^k − W·x², where the diagonal holds the
//! reference level energies and the −W·x² renormalizing term removes the
//! reference's implicit quadratic so it is not double counted. The net
//! quadratic coefficient (c₂ − W) is formed *before* the matrix product,
//! so a pure x² potential at W = c₂ cancels exactly and leaves a clean
//! diagonal. Constant terms c₀ fold into the diagonal, which makes
//! reported energies directly comparable with origin-shifted reference
//! data.
//!
//! For single-parity potentials the basis may be restricted to even- or
//! odd-index oscillator functions. The reduction is done by index
//! selection from power matrices built at a padded full-basis dimension,
//! so the reduced matrix elements are exact and the halfwidth halves.
//!
//! Storage generalizes the classic compact band layout H(J,K) → HC(3J+K−3)
//! to any halfwidth b: entry (J,K), K = J..J+b, lives at b·J+K−b
//! (1-based). Only the upper band is kept; symmetry supplies the rest.

use ndarray::Array2;
use thiserror::Error;

use crate::oscillator_basis::{
    build_power_matrix, level_energy, BasisSpec, Parity,
};
use crate::{is_finite_c, ComplexScalar};

/// Highest supported polynomial degree (covers every shipped system, max
/// degree 6, with headroom while keeping the band small).
pub const DEGREE_CAP: usize = 8;

/// Guard for accidental huge densification in [`to_dense`].
pub const DENSE_GUARD: usize = 512;

/// Errors from potential construction and Hamiltonian assembly.
#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    /// A coefficient carried a NaN or infinite component.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    /// Degree must be at least 1 and at most [`DEGREE_CAP`].
    #[error("potential degree {0} unsupported (must be 1..={DEGREE_CAP})")]
    DegreeOutOfRange(usize),
    /// Even/Odd basis requested for a potential with odd powers.
    #[error("parity restriction requires an even-power potential; x^{0} present")]
    ParityMismatch(usize),
    /// Band index arguments outside K = J..J+b.
    #[error("band index K={k} outside [J, J+b] for J={j}, b={b}")]
    IndexOutOfBand { j: usize, k: usize, b: usize },
    /// Densification guard exceeded.
    #[error("to_dense guard: dim {0} exceeds {DENSE_GUARD}")]
    DenseGuard(usize),
}

/// Polynomial potential Σ_k c_k x^k with complex coefficients.
///
/// `coeffs[k]` multiplies x^k. The `origin` field is provenance metadata:
/// it records the cumulative coordinate shift that produced these
/// coefficients (the polynomial is expressed in the local coordinate t of
/// x = origin + t). Assembly always uses the coefficients as stored; the
/// spectrum is translation invariant, so the recorded origin never enters
/// the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    coeffs: Vec<ComplexScalar>,
    origin: f64,
}

impl PolynomialPotential {
    /// Validates and builds a potential. The highest nonzero coefficient
    /// defines the degree, which must lie in 1..=[`DEGREE_CAP`].
    pub fn new(coeffs: Vec<ComplexScalar>, origin: f64) -> Result<Self, BuildError> {
        if !origin.is_finite() {
            return Err(BuildError::NonFinite("origin"));
        }
        for c in &coeffs {
            if !is_finite_c(*c) {
                return Err(BuildError::NonFinite("potential coefficient"));
            }
        }
        let degree = coeffs
            .iter()
            .rposition(|c| *c != ComplexScalar::new(0.0, 0.0));
        match degree {
            None | Some(0) => Err(BuildError::DegreeOutOfRange(degree.unwrap_or(0))),
            Some(d) if d > DEGREE_CAP => Err(BuildError::DegreeOutOfRange(d)),
            Some(d) => {
                let mut coeffs = coeffs;
                coeffs.truncate(d + 1);
                Ok(Self { coeffs, origin })
            }
        }
    }

    /// Convenience constructor from (power, coefficient) pairs; powers not
    /// listed are zero.
    pub fn from_terms(terms: &[(usize, ComplexScalar)], origin: f64) -> Result<Self, BuildError> {
        let top = terms.iter().map(|t| t.0).max().unwrap_or(0);
        if top > DEGREE_CAP {
            return Err(BuildError::DegreeOutOfRange(top));
        }
        let mut coeffs = vec![ComplexScalar::new(0.0, 0.0); top + 1];
        for (p, c) in terms {
            coeffs[*p] += *c;
        }
        Self::new(coeffs, origin)
    }

    /// Coefficient of x^k (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> ComplexScalar {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or_else(|| ComplexScalar::new(0.0, 0.0))
    }

    /// Coefficients c_0..c_degree.
    pub fn coeffs(&self) -> &[ComplexScalar] {
        &self.coeffs
    }

    /// Degree (index of the highest nonzero coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Recorded cumulative origin shift (provenance only).
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Evaluates Σ c_k z^k by Horner's rule.
    pub fn eval(&self, z: ComplexScalar) -> ComplexScalar {
        let mut acc = ComplexScalar::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// True when only even powers carry nonzero coefficients.
    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| k % 2 == 0 || *c == ComplexScalar::new(0.0, 0.0))
    }
}

/// Exact binomial re-expansion of the polynomial about x = a: evaluating
/// the original at (a + t) equals evaluating the result at t. The degree
/// is preserved (the leading coefficient is untouched) and the result's
/// `origin` records the cumulative shift, so
/// `shift_origin(shift_origin(p, a), −a)` restores `p`.
pub fn shift_origin(pot: &PolynomialPotential, a: f64) -> PolynomialPotential {
    let n = pot.coeffs.len();
    let mut out = vec![ComplexScalar::new(0.0, 0.0); n];
    // c'_j = Σ_{k≥j} c_k · C(k,j) · a^{k−j}, with binomials built by the
    // Pascal recurrence to keep them exact for the small degrees used.
    for k in 0..n {
        let ck = pot.coeffs[k];
        if ck == ComplexScalar::new(0.0, 0.0) {
            continue;
        }
        let mut binom = 1.0_f64;
        let mut apow = 1.0_f64;
        // j descending from k: C(k,j)·a^{k−j}, starting at j=k.
        for j in (0..=k).rev() {
            out[j] += ck * (binom * apow);
            if j > 0 {
                binom = binom * j as f64 / (k - j + 1) as f64;
                apow *= a;
            }
        }
    }
    PolynomialPotential {
        coeffs: out,
        origin: pot.origin + a,
    }
}

/// Compact storage index for band entry (J,K), K = J..J+b, 1-based:
/// b·J + K − b. For b = 3 this is the classic HC(3J+K−3) layout.
pub fn band_index(j: usize, k: usize, b: usize) -> Result<usize, BuildError> {
    if k < j || k > j + b {
        return Err(BuildError::IndexOutOfBand { j, k, b });
    }
    Ok(b * j + k - b)
}

/// Complex symmetric matrix stored as its upper band.
///
/// `data` holds H(J,K) for K = J..J+b at 1-based index b·J+K−b; the array
/// length is dim·(b+1) with trailing out-of-range slots zero. Entries with
/// |J−K| > b are exactly zero and `get` answers both triangles through
/// symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedComplexSymmetric {
    dim: usize,
    halfwidth: usize,
    data: Vec<ComplexScalar>,
}

impl BandedComplexSymmetric {
    /// Builds a band from a function over 1-based upper-band positions
    /// (J, K), J = 1..=dim, K = J..=J+b (K clipped to dim; out-of-range
    /// trailing slots stay zero). Support plumbing for tests and oracles.
    pub fn from_upper_fn(
        dim: usize,
        halfwidth: usize,
        mut f: impl FnMut(usize, usize) -> ComplexScalar,
    ) -> Self {
        let mut m = Self {
            dim,
            halfwidth,
            data: vec![ComplexScalar::new(0.0, 0.0); dim * (halfwidth + 1)],
        };
        for j in 1..=dim {
            for k in j..=(j + halfwidth).min(dim) {
                let idx = band_index(j, k, halfwidth).expect("in-band by construction");
                m.data[idx - 1] = f(j, k);
            }
        }
        m
    }

    /// Diagonal matrix as a zero-halfwidth band.
    pub fn from_diagonal(diag: &[ComplexScalar]) -> Self {
        Self {
            dim: diag.len(),
            halfwidth: 0,
            data: diag.to_vec(),
        }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Band halfwidth b.
    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    /// Raw band array (length dim·(b+1), 1-based layout b·J+K−b).
    pub fn data(&self) -> &[ComplexScalar] {
        &self.data
    }

    /// Logical entry (J,K), 1-based, either triangle; zero outside the
    /// band.
    pub fn get(&self, j: usize, k: usize) -> ComplexScalar {
        debug_assert!(j >= 1 && j <= self.dim && k >= 1 && k <= self.dim);
        let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
        if hi - lo > self.halfwidth {
            return ComplexScalar::new(0.0, 0.0);
        }
        let idx = self.halfwidth * lo + hi - self.halfwidth;
        self.data[idx - 1]
    }

    /// Infinity norm ‖H‖∞ = max row sum of entry magnitudes.
    pub fn inf_norm(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 1..=self.dim {
            let lo = j.saturating_sub(self.halfwidth).max(1);
            let hi = (j + self.halfwidth).min(self.dim);
            let sum: f64 = (lo..=hi).map(|k| self.get(j, k).norm()).sum();
            best = best.max(sum);
        }
        best
    }

    /// Banded matrix–vector product H·x.
    pub fn matvec(&self, x: &[ComplexScalar]) -> Vec<ComplexScalar> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut y = vec![ComplexScalar::new(0.0, 0.0); self.dim];
        for j in 1..=self.dim {
            let lo = j.saturating_sub(self.halfwidth).max(1);
            let hi = (j + self.halfwidth).min(self.dim);
            let mut acc = ComplexScalar::new(0.0, 0.0);
            for k in lo..=hi {
                acc += self.get(j, k) * x[k - 1];
            }
            y[j - 1] = acc;
        }
        y
    }
}

/// Full symmetric expansion of a band (test/oracle plumbing). Guarded by
/// [`DENSE_GUARD`] against accidental huge densifications.
pub fn to_dense(m: &BandedComplexSymmetric) -> Result<Array2<ComplexScalar>, BuildError> {
    if m.dim() > DENSE_GUARD {
        return Err(BuildError::DenseGuard(m.dim()));
    }
    let n = m.dim();
    let mut out = Array2::zeros((n, n));
    for j in 1..=n {
        for k in 1..=n {
            out[[j - 1, k - 1]] = m.get(j, k);
        }
    }
    Ok(out)
}

/// Assembles the banded matrix of diag(E_n) + Σ_k c_k·x^k − W·x² in the
/// given basis.
///
/// For `Parity::Even`/`Parity::Odd` the potential must contain only even
/// powers; power matrices are then built in the full basis at dimension
/// 2·dim (plus internal padding) and restricted to even- or odd-index
/// rows/columns, giving halfwidth degree/2. `Parity::Full` gives halfwidth
/// equal to the degree. The constant term c₀ and the reference level
/// energies sit on the diagonal; the net quadratic coefficient (c₂ − W)
/// is formed before multiplying the x² matrix so an exact cancellation
/// stays exact.
pub fn assemble(
    spec: &BasisSpec,
    pot: &PolynomialPotential,
) -> Result<BandedComplexSymmetric, BuildError> {
    let degree = pot.degree();
    if degree > DEGREE_CAP {
        return Err(BuildError::DegreeOutOfRange(degree));
    }
    let restricted = !matches!(spec.parity(), Parity::Full);
    if restricted {
        if let Some(odd) = pot
            .coeffs()
            .iter()
            .enumerate()
            .find(|(k, c)| k % 2 == 1 && **c != ComplexScalar::new(0.0, 0.0))
        {
            return Err(BuildError::ParityMismatch(odd.0));
        }
    }

    let dim = spec.dim();
    // Net coefficient per power: the potential minus the reference's
    // implicit W·x².
    let top = degree.max(2);
    let mut net = vec![ComplexScalar::new(0.0, 0.0); top + 1];
    for (k, c) in pot.coeffs().iter().enumerate() {
        net[k] = *c;
    }
    net[2] -= spec.w();

    // Basis-function indices retained in this sector.
    let full_size = if restricted { 2 * dim } else { dim };
    let select = |row: usize| -> usize {
        match spec.parity() {
            Parity::Even => 2 * row,
            Parity::Odd => 2 * row + 1,
            Parity::Full => row,
        }
    };

    let halfwidth = if restricted { top / 2 } else { top };
    let mut band = BandedComplexSymmetric {
        dim,
        halfwidth,
        data: vec![ComplexScalar::new(0.0, 0.0); dim * (halfwidth + 1)],
    };

    // Diagonal: reference level energies plus the constant term.
    for j in 0..dim {
        let idx = band_index(j + 1, j + 1, halfwidth).expect("diagonal is in band");
        band.data[idx - 1] = level_energy(spec, select(j)) + net[0];
    }

    // Power terms. Each x^p matrix is exact on the padded full basis;
    // parity selection then picks the retained rows/columns.
    for (p, coeff) in net.iter().enumerate().skip(1) {
        if *coeff == ComplexScalar::new(0.0, 0.0) {
            continue;
        }
        let xp = build_power_matrix(spec, p, full_size);
        for j in 0..dim {
            let kmax = (j + halfwidth).min(dim - 1);
            for k in j..=kmax {
                let v = xp[[select(j), select(k)]];
                if v == ComplexScalar::new(0.0, 0.0) {
                    continue;
                }
                let idx = band_index(j + 1, k + 1, halfwidth).expect("in band");
                band.data[idx - 1] += *coeff * v;
            }
        }
    }

    Ok(band)
}
