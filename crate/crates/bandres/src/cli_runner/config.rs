//! Plain-text problem configuration: parsing, validation, and conversion
//! into the engine's domain types.
//!
//! Configs are TOML with explicit keys only — no positional values — so
//! every run's parameters remain inspectable in version control. Unknown
//! keys are rejected (fail-closed) to catch typos before they silently
//! change a run.

use serde::{Deserialize, Serialize};

use crate::hamiltonian_builder::{shift_origin, PolynomialPotential};
use crate::observables::{ShiftProbe, DEFAULT_DELTA};
use crate::oscillator_basis::{BasisSpec, Parity};
use crate::resonance_engine::{IterationConfig, ScanConfig};
use crate::ComplexScalar;

use super::CliError;

/// Basis parity selector as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityName {
    Even,
    Odd,
    Full,
}

impl From<ParityName> for Parity {
    fn from(p: ParityName) -> Self {
        match p {
            ParityName::Even => Parity::Even,
            ParityName::Odd => Parity::Odd,
            ParityName::Full => Parity::Full,
        }
    }
}

impl std::fmt::Display for ParityName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParityName::Even => write!(f, "even"),
            ParityName::Odd => write!(f, "odd"),
            ParityName::Full => write!(f, "full"),
        }
    }
}

/// One monomial term c·x^power of the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialTerm {
    pub power: usize,
    pub coeff_re: f64,
    #[serde(default)]
    pub coeff_im: f64,
}

/// Scan window section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub e_min: f64,
    pub e_max: f64,
    pub de: f64,
}

/// Iteration template section; omitted fields take the engine defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationSection {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_reference_row")]
    pub reference_row: usize,
    #[serde(default)]
    pub rayleigh_update: bool,
}

fn default_max_iters() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-13
}
fn default_reference_row() -> usize {
    1
}

impl Default for IterationSection {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            tol: default_tol(),
            reference_row: default_reference_row(),
            rayleigh_update: false,
        }
    }
}

/// One energy-shift probe section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub power: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// A complete problem description: basis, potential, scan window,
/// iteration template, and optional expectation-value probes.
///
/// Scalar keys precede the table sections so the serialized form is
/// always valid TOML. `potential` coefficients are given in the local
/// coordinate of the *unshifted* frame; when `origin_shift` is present
/// the polynomial is re-expanded about that point before assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    /// Basis width parameter W as [re, im].
    pub w: [f64; 2],
    pub parity: ParityName,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_shift: Option<f64>,
    pub scan: ScanSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration: Option<IterationSection>,
    pub potential: Vec<PotentialTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<ProbeSection>>,
}

impl ProblemConfig {
    /// Parses a config from TOML text, rejecting unknown keys.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Canonical TOML serialization (field order fixed by the struct).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds the validated basis specification.
    pub fn basis_spec(&self) -> Result<BasisSpec, CliError> {
        BasisSpec::new(
            self.alpha,
            ComplexScalar::new(self.w[0], self.w[1]),
            Parity::from(self.parity),
            self.dim,
        )
        .map_err(|e| CliError::Config(format!("invalid basis: {e}")))
    }

    /// Builds the potential, applying `origin_shift` when present.
    pub fn potential(&self) -> Result<PolynomialPotential, CliError> {
        let terms: Vec<(usize, ComplexScalar)> = self
            .potential
            .iter()
            .map(|t| (t.power, ComplexScalar::new(t.coeff_re, t.coeff_im)))
            .collect();
        let base = PolynomialPotential::from_terms(&terms, 0.0)
            .map_err(|e| CliError::Config(format!("invalid potential: {e}")))?;
        Ok(match self.origin_shift {
            Some(a) if a != 0.0 => shift_origin(&base, a),
            _ => base,
        })
    }

    /// Iteration template (engine defaults when the section is omitted).
    pub fn iteration_template(&self) -> IterationConfig {
        let section = self.iteration.clone().unwrap_or_default();
        IterationConfig {
            e0: ComplexScalar::new(0.0, 0.0),
            max_iters: section.max_iters,
            tol: section.tol,
            reference_row: section.reference_row,
            rayleigh_update: section.rayleigh_update,
            pin_reference_row: false,
        }
    }

    /// Scan configuration with the engine's dedupe/persistence defaults.
    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig::new(
            self.scan.e_min,
            self.scan.e_max,
            self.scan.de,
            self.iteration_template(),
        )
    }

    /// Probe list (empty when the section is omitted).
    pub fn probe_list(&self) -> Vec<ShiftProbe> {
        self.probes
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|p| ShiftProbe {
                power: p.power,
                delta: p.delta,
            })
            .collect()
    }
}
