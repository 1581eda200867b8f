//! Expectation values by the energy-shift method.
//!
//! Instead of integrating |ψ|² against x^m (awkward for complex-scaled
//! eigencolumns), an expectation value is read off the eigenvalue's
//! response to a small change of the potential: ⟨x^m⟩ = dE/dc_m,
//! approximated by the central difference [E(+δ) − E(−δ)]/(2δ) with
//! δ·x^m added to and subtracted from the potential. Both perturbed runs
//! reuse the unperturbed energy as their shift; a plausibility bound on
//! |E(+δ) − E(−δ)| guards against the two runs converging to different
//! branches.
//!
//! For perturbations whose first-order response vanishes by symmetry the
//! interesting quantity is the second-order (quadratic) coefficient;
//! [`quadratic_response_fit`] samples E(β) on a symmetric four-point grid
//! and least-squares fits E = E₀ + c·β².

use rayon::join;
use thiserror::Error;

use crate::hamiltonian_builder::{
    assemble, BuildError, PolynomialPotential, DEGREE_CAP,
};
use crate::oscillator_basis::BasisSpec;
use crate::resonance_engine::{iterate, EngineError, IterationConfig};
use crate::ComplexScalar;

/// Default perturbation strength for shift probes.
pub const DEFAULT_DELTA: f64 = 0.00005;

/// Symmetric β grid for the quadratic-response fit.
pub const QUADRATIC_BETAS: [f64; 4] = [-0.002, -0.001, 0.001, 0.002];

/// Errors from energy-shift probes.
#[derive(Debug, Error)]
pub enum ObservableError {
    /// Iteration on a perturbed Hamiltonian failed outright.
    #[error(transparent)]
    Engine(#[from] EngineError),
    /// The perturbed potential could not be built.
    #[error(transparent)]
    Build(#[from] BuildError),
    /// A perturbed run hit the iteration cap without converging.
    #[error("perturbed run ({which}) not converged after {iterations} iterations")]
    NotConverged {
        which: &'static str,
        iterations: usize,
    },
    /// The two perturbed runs disagree by more than the plausibility
    /// bound: they converged to different eigenvalue branches.
    #[error("branch jump: |E(+δ) − E(−δ)| = {split:e} exceeds bound {bound:e}")]
    BranchJump { split: f64, bound: f64 },
    /// Probe parameters failed validation.
    #[error("invalid probe: {0}")]
    InvalidProbe(&'static str),
}

/// A single monomial perturbation ±δ·x^power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftProbe {
    /// Monomial power m of the probed ⟨x^m⟩ (1 ≤ m ≤ degree cap).
    pub power: usize,
    /// Perturbation strength δ > 0.
    pub delta: f64,
}

impl Default for ShiftProbe {
    fn default() -> Self {
        Self {
            power: 2,
            delta: DEFAULT_DELTA,
        }
    }
}

impl ShiftProbe {
    /// Probe of x^power at the default δ.
    pub fn of_power(power: usize) -> Self {
        Self {
            power,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), ObservableError> {
        if self.power < 1 || self.power > DEGREE_CAP {
            return Err(ObservableError::InvalidProbe(
                "probe power must lie in [1, degree cap]",
            ));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(ObservableError::InvalidProbe("delta must be finite and > 0"));
        }
        Ok(())
    }
}

/// Returns the potential with c_power moved by `shift`.
fn perturbed(
    pot: &PolynomialPotential,
    power: usize,
    shift: f64,
) -> Result<PolynomialPotential, BuildError> {
    let top = pot.degree().max(power);
    let mut coeffs: Vec<ComplexScalar> = (0..=top).map(|k| pot.coeff(k)).collect();
    coeffs[power] += ComplexScalar::new(shift, 0.0);
    PolynomialPotential::new(coeffs, pot.origin())
}

/// Solves one perturbed eigenvalue, requiring convergence.
fn perturbed_energy(
    spec: &BasisSpec,
    pot: &PolynomialPotential,
    power: usize,
    shift: f64,
    cfg: &IterationConfig,
    which: &'static str,
) -> Result<ComplexScalar, ObservableError> {
    let p = perturbed(pot, power, shift)?;
    let h = assemble(spec, &p)?;
    let r = iterate(&h, cfg)?;
    if !r.converged {
        return Err(ObservableError::NotConverged {
            which,
            iterations: r.iterations,
        });
    }
    Ok(r.energy)
}

/// Central-difference expectation value ⟨x^power⟩ = dE/dc_power at the
/// eigenvalue tracked from `cfg.e0`.
///
/// Runs the iteration twice with ±δ·x^power added to the potential, both
/// from the same shift, and returns [E(+δ) − E(−δ)]/(2δ). The two runs
/// are independent and execute concurrently. If they separate by more
/// than 10·δ·dim — far beyond any first-order response the matrix can
/// produce — they followed different branches and a
/// [`ObservableError::BranchJump`] is reported instead of a silently
/// wrong number.
pub fn expectation_by_shift(
    spec: &BasisSpec,
    pot: &PolynomialPotential,
    probe: &ShiftProbe,
    cfg: &IterationConfig,
) -> Result<ComplexScalar, ObservableError> {
    probe.validate()?;
    let (plus, minus) = join(
        || perturbed_energy(spec, pot, probe.power, probe.delta, cfg, "+δ"),
        || perturbed_energy(spec, pot, probe.power, -probe.delta, cfg, "−δ"),
    );
    let (e_plus, e_minus) = (plus?, minus?);

    let split = (e_plus - e_minus).norm();
    let bound = 10.0 * probe.delta * spec.dim() as f64;
    if split > bound {
        return Err(ObservableError::BranchJump { split, bound });
    }
    Ok((e_plus - e_minus) / (2.0 * probe.delta))
}

/// Least-squares fit of E(β) = E₀ + c·β² with β·x^power added to the
/// potential, sampled at the given β grid (use [`QUADRATIC_BETAS`] for
/// the standard four-point probe). Returns (E₀, c).
///
/// This is the second-order companion of [`expectation_by_shift`] for
/// perturbations whose first-order response vanishes by symmetry; a
/// symmetric β grid keeps any residual odd-order contamination out of
/// both fitted parameters.
pub fn quadratic_response_fit(
    spec: &BasisSpec,
    pot: &PolynomialPotential,
    power: usize,
    betas: &[f64],
    cfg: &IterationConfig,
) -> Result<(ComplexScalar, ComplexScalar), ObservableError> {
    if power < 1 || power > DEGREE_CAP {
        return Err(ObservableError::InvalidProbe(
            "fit power must lie in [1, degree cap]",
        ));
    }
    if betas.len() < 3 {
        return Err(ObservableError::InvalidProbe(
            "quadratic fit needs at least three β samples",
        ));
    }
    let energies: Vec<(f64, ComplexScalar)> = betas
        .iter()
        .map(|&b| perturbed_energy(spec, pot, power, b, cfg, "β").map(|e| (b, e)))
        .collect::<Result<_, _>>()?;

    // Normal equations for the design (1, β²).
    let n = energies.len() as f64;
    let s2: f64 = energies.iter().map(|(b, _)| b * b).sum();
    let s4: f64 = energies.iter().map(|(b, _)| b.powi(4)).sum();
    let det = n * s4 - s2 * s2;
    if det.abs() < 1e-30 {
        return Err(ObservableError::InvalidProbe(
            "β samples must contain at least two distinct magnitudes",
        ));
    }
    let b0: ComplexScalar = energies.iter().map(|(_, e)| *e).sum();
    let b2: ComplexScalar = energies.iter().map(|(b, e)| *e * (b * b)).sum();
    let e0 = (b0 * s4 - b2 * s2) / det;
    let c = (b2 * n - b0 * s2) / det;
    Ok((e0, c))
}
