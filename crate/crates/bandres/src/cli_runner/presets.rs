//! The six built-in problem families, each encoding one reference
//! configuration (basis parameters, potential, parity sectors, scan
//! window) with a small set of physical overrides.

use super::config::{
    IterationSection, ParityName, PotentialTerm, ProbeSection, ProblemConfig, ScanSection,
};
use super::CliError;

/// Names of the built-in presets, in documentation order.
pub const PRESET_NAMES: [&str; 6] = [
    "triple-well-resonance",
    "triple-well-bound",
    "pt-cubic",
    "cubic-oscillator",
    "unorthodox",
    "double-well",
];

/// Physical overrides accepted by `--set key=value`.
///
/// Each preset consumes the keys meaningful to it and rejects the rest,
/// so a misspelled or misplaced override fails instead of being ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PresetParams {
    pub g: Option<f64>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub phi: Option<f64>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub de: Option<f64>,
}

impl PresetParams {
    /// Parses `key=value` pairs.
    pub fn from_pairs(pairs: &[String]) -> Result<Self, CliError> {
        let mut p = Self::default();
        for pair in pairs {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                CliError::Config(format!("override '{pair}' is not of the form key=value"))
            })?;
            let fval = || -> Result<f64, CliError> {
                value
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("override '{key}': bad number '{value}'")))
            };
            let ival = || -> Result<usize, CliError> {
                value
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("override '{key}': bad integer '{value}'")))
            };
            match key {
                "g" => p.g = Some(fval()?),
                "lambda" => p.lambda = Some(fval()?),
                "a" => p.a = Some(fval()?),
                "b" => p.b = Some(fval()?),
                "phi" => p.phi = Some(fval()?),
                "m" => p.m = Some(ival()?),
                "n" => p.n = Some(ival()?),
                "dim" => p.dim = Some(ival()?),
                "e_min" => p.e_min = Some(fval()?),
                "e_max" => p.e_max = Some(fval()?),
                "de" => p.de = Some(fval()?),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown override key '{other}' (known: g, lambda, a, b, phi, m, n, dim, e_min, e_max, de)"
                    )))
                }
            }
        }
        Ok(p)
    }

    fn reject_unused(&self, preset: &str, used: &[&str]) -> Result<(), CliError> {
        let set: [(&str, bool); 11] = [
            ("g", self.g.is_some()),
            ("lambda", self.lambda.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("phi", self.phi.is_some()),
            ("m", self.m.is_some()),
            ("n", self.n.is_some()),
            ("dim", self.dim.is_some()),
            ("e_min", self.e_min.is_some()),
            ("e_max", self.e_max.is_some()),
            ("de", self.de.is_some()),
        ];
        for (key, present) in set {
            if present && !used.contains(&key) {
                return Err(CliError::Config(format!(
                    "preset '{preset}' does not accept override '{key}' (accepted: {})",
                    used.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn window(&self, e_min: f64, e_max: f64, de: f64) -> ScanSection {
        ScanSection {
            e_min: self.e_min.unwrap_or(e_min),
            e_max: self.e_max.unwrap_or(e_max),
            de: self.de.unwrap_or(de),
        }
    }
}

/// One fully resolved run of a preset: a label and its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub label: String,
    pub config: ProblemConfig,
}

fn term(power: usize, re: f64, im: f64) -> PotentialTerm {
    PotentialTerm {
        power,
        coeff_re: re,
        coeff_im: im,
    }
}

/// Resolves a preset name and overrides into its run list.
pub fn preset_runs(name: &str, params: &PresetParams) -> Result<Vec<ResolvedRun>, CliError> {
    match name {
        "triple-well-resonance" => triple_well(params, name, true),
        "triple-well-bound" => triple_well(params, name, false),
        "pt-cubic" => pt_cubic(params, name),
        "cubic-oscillator" => cubic_oscillator(params, name),
        "unorthodox" => unorthodox(params, name),
        "double-well" => double_well(params, name),
        other => Err(CliError::Config(format!(
            "unknown preset '{other}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Triple well V = x²(1 − g²x²)² = x² − 2g²x⁴ + g⁴x⁶ in even and odd
/// sectors. The resonance variant uses the complex basis W = (1,15);
/// the bound variant uses W = (1,0) and carries an ⟨x²⟩ probe.
fn triple_well(
    params: &PresetParams,
    name: &str,
    resonance: bool,
) -> Result<Vec<ResolvedRun>, CliError> {
    params.reject_unused(name, &["g", "dim", "e_min", "e_max", "de"])?;
    let g = params.g.unwrap_or(0.20);
    let dim = params.dim.unwrap_or(150);
    let (w, scan, probes) = if resonance {
        ([1.0, 15.0], params.window(0.8, 4.0, 0.05), None)
    } else {
        (
            [1.0, 0.0],
            params.window(0.7, 2.9, 0.05),
            Some(vec![ProbeSection {
                power: 2,
                delta: 5e-5,
            }]),
        )
    };
    let potential = vec![
        term(2, 1.0, 0.0),
        term(4, -2.0 * g * g, 0.0),
        term(6, g.powi(4), 0.0),
    ];
    Ok([ParityName::Even, ParityName::Odd]
        .into_iter()
        .map(|parity| ResolvedRun {
            label: parity.to_string(),
            config: ProblemConfig {
                alpha: 1.0,
                w,
                parity,
                dim,
                origin_shift: None,
                scan: scan.clone(),
                iteration: None,
                potential: potential.clone(),
                probes: probes.clone(),
            },
        })
        .collect())
}

/// PT-symmetric cubic V = iAx³ + iBx in the full basis, scanned along
/// the real energy axis (the real spectrum for unbroken symmetry; broken
/// conjugate pairs are reached by iterating from a complex shift
/// instead).
fn pt_cubic(params: &PresetParams, name: &str) -> Result<Vec<ResolvedRun>, CliError> {
    params.reject_unused(name, &["a", "b", "dim", "e_min", "e_max", "de"])?;
    let a = params.a.unwrap_or(1.0);
    let b = params.b.unwrap_or(0.0);
    let dim = params.dim.unwrap_or(150);
    let mut potential = vec![term(3, 0.0, a)];
    if b != 0.0 {
        potential.push(term(1, 0.0, b));
    }
    Ok(vec![ResolvedRun {
        label: "full".into(),
        config: ProblemConfig {
            alpha: 1.0,
            w: [1.0, 0.0],
            parity: ParityName::Full,
            dim,
            origin_shift: None,
            scan: params.window(0.5, 16.0, 0.25),
            iteration: None,
            potential,
            probes: None,
        },
    }])
}

/// Rotated cubic perturbation V = ½x² + g·e^{iφ}x³ with α = ½ and
/// W = (0.5, −0.5). Without a φ override the preset sweeps the eleven
/// values φ = −0.10(0.02)0.10.
fn cubic_oscillator(params: &PresetParams, name: &str) -> Result<Vec<ResolvedRun>, CliError> {
    params.reject_unused(name, &["g", "phi", "dim", "e_min", "e_max", "de"])?;
    let g = params.g.unwrap_or(0.1);
    let dim = params.dim.unwrap_or(150);
    let phis: Vec<f64> = match params.phi {
        Some(phi) => vec![phi],
        None => (-5..=5).map(|k| k as f64 * 0.02).collect(),
    };
    Ok(phis
        .into_iter()
        .map(|phi| ResolvedRun {
            label: format!("phi={phi:+.2}"),
            config: ProblemConfig {
                alpha: 0.5,
                w: [0.5, -0.5],
                parity: ParityName::Full,
                dim,
                origin_shift: None,
                scan: params.window(0.3, 0.7, 0.02),
                iteration: None,
                potential: vec![
                    term(2, 0.5, 0.0),
                    term(3, g * phi.cos(), g * phi.sin()),
                ],
                probes: None,
            },
        })
        .collect())
}

/// Unorthodox perturbation V = x^M − λx^N (N > M) with W = (1,1); the
/// two lowest states live in the even and odd sectors respectively.
fn unorthodox(params: &PresetParams, name: &str) -> Result<Vec<ResolvedRun>, CliError> {
    params.reject_unused(name, &["m", "n", "lambda", "dim", "e_min", "e_max", "de"])?;
    let m = params.m.unwrap_or(4);
    let n = params.n.unwrap_or(6);
    let lambda = params.lambda.unwrap_or(0.0);
    let dim = params.dim.unwrap_or(150);
    if m % 2 != 0 || n % 2 != 0 {
        return Err(CliError::Config(format!(
            "preset '{name}': powers must be even for the parity sectors (got m={m}, n={n})"
        )));
    }
    let mut potential = vec![term(m, 1.0, 0.0)];
    if lambda != 0.0 {
        potential.push(term(n, -lambda, 0.0));
    }
    let windows = [
        (ParityName::Even, params.window(0.5, 2.0, 0.05)),
        (ParityName::Odd, params.window(2.2, 4.2, 0.05)),
    ];
    Ok(windows
        .into_iter()
        .map(|(parity, scan)| ResolvedRun {
            label: parity.to_string(),
            config: ProblemConfig {
                alpha: 1.0,
                w: [1.0, 1.0],
                parity,
                dim,
                origin_shift: None,
                scan,
                iteration: None,
                potential: potential.clone(),
                probes: None,
            },
        })
        .collect())
}

/// Deep double well V = −x² + ½λ²x⁴ analyzed about the right minimum
/// x = 1/λ (the config carries the unshifted coefficients plus
/// `origin_shift`). The low doublet converges slowly under a fixed
/// shift, hence the raised iteration cap; probes read ⟨x⟩ and ⟨x²⟩ with
/// a δ small enough not to mix the near-degenerate pair.
fn double_well(params: &PresetParams, name: &str) -> Result<Vec<ResolvedRun>, CliError> {
    params.reject_unused(name, &["lambda", "dim", "e_min", "e_max", "de"])?;
    let lambda = params.lambda.unwrap_or(0.3);
    if !(lambda > 0.0) {
        return Err(CliError::Config(format!(
            "preset '{name}': lambda must be > 0 (got {lambda})"
        )));
    }
    let dim = params.dim.unwrap_or(80);
    let depth = -1.0 / (2.0 * lambda * lambda);
    let scan = if lambda == 0.3 {
        params.window(-4.3, -4.1, 0.02)
    } else if lambda == 0.4 {
        params.window(-1.9, -1.7, 0.02)
    } else {
        params.window(depth + 1.0, depth + 1.8, 0.02)
    };
    Ok(vec![ResolvedRun {
        label: "full".into(),
        config: ProblemConfig {
            alpha: 1.0,
            w: [2.0, 0.0],
            parity: ParityName::Full,
            dim,
            origin_shift: Some(1.0 / lambda),
            scan,
            iteration: Some(IterationSection {
                max_iters: 2000,
                ..IterationSection::default()
            }),
            potential: vec![term(2, -1.0, 0.0), term(4, lambda * lambda / 2.0, 0.0)],
            probes: Some(vec![
                ProbeSection {
                    power: 1,
                    delta: 1e-6,
                },
                ProbeSection {
                    power: 2,
                    delta: 1e-6,
                },
            ]),
        },
    }])
}
