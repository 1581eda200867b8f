//! Inverse iteration on the shifted band, energy scanning, and stability
//! diagnostics.
//!
//! A single eigenvalue near a trial energy e₀ is found by inverse
//! iteration: starting from the all-ones column, repeatedly solve
//! (H − e₀)X_new = X_old and rescale so a fixed reference row carries the
//! exact entry (1,0). The eigenvalue estimate is then row `reference_row`
//! of H·X. With the shift held fixed the whole history is deterministic;
//! an optional Rayleigh-style variant refactors at the latest estimate
//! for faster (quadratic) convergence at the price of one elimination per
//! step.
//!
//! Scanning walks e₀ over a real grid, re-initializing the start column
//! at every step, and keeps only eigenvalues that emerge repeatedly at
//! consecutive grid points — transient pseudo-eigenvalues of strongly
//! non-normal complex-symmetric matrices do not persist under shift
//! changes, so persistence is the primary acceptance filter. Dimension
//! sweeps re-run a scan at increasing basis sizes to expose
//! semi-convergence, and reference-row checks re-run one iteration with
//! several estimate rows to confirm row independence.

use rayon::prelude::*;
use thiserror::Error;

use crate::banded_linalg::{factor_shifted, residual_norm, LinalgError};
use crate::hamiltonian_builder::{assemble, BandedComplexSymmetric, BuildError, PolynomialPotential};
use crate::oscillator_basis::{BasisError, BasisSpec};
use crate::{is_finite_c, ComplexScalar};

/// A converged result must have residual ≤ RESIDUAL_FACTOR·‖H‖∞.
pub const RESIDUAL_FACTOR: f64 = 1e-8;

/// Reference-row entry below this fraction of ‖X‖∞ marks the row as
/// degenerate for estimation purposes.
pub const DEGENERATE_ROW_FRACTION: f64 = 1e-12;

/// Errors from iteration and scanning.
#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    /// Linear-algebra failure (singular shift, dimension mismatch).
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// Assembly failure inside a dimension sweep.
    #[error(transparent)]
    Build(#[from] BuildError),
    /// Basis re-validation failure inside a dimension sweep.
    #[error(transparent)]
    Basis(#[from] BasisError),
    /// The pinned reference row stopped contributing to the eigencolumn.
    #[error("reference row {row} degenerate: entry below {DEGENERATE_ROW_FRACTION:e} of the column norm")]
    ReferenceRowDegenerate { row: usize },
    /// Configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Controls a single inverse-iteration run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    /// Initial shift (scans use real shifts; complex shifts are allowed
    /// and useful for following complex-pair branches directly).
    pub e0: ComplexScalar,
    /// Iteration cap.
    pub max_iters: usize,
    /// Convergence threshold on the successive-estimate change |ΔE|.
    pub tol: f64,
    /// 1-based row used for rescaling and the energy estimate.
    pub reference_row: usize,
    /// Refactor at the latest complex estimate each step instead of
    /// keeping the initial shift fixed.
    pub rayleigh_update: bool,
    /// When true, a degenerate reference row aborts with an error instead
    /// of falling back to the largest-magnitude row. Row-variation
    /// diagnostics pin the row so the answer is attributable to it.
    pub pin_reference_row: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            e0: ComplexScalar::new(0.0, 0.0),
            max_iters: 200,
            tol: 1e-13,
            reference_row: 1,
            rayleigh_update: false,
            pin_reference_row: false,
        }
    }
}

impl IterationConfig {
    /// Convenience constructor: defaults with the given shift.
    pub fn at(e0: ComplexScalar) -> Self {
        Self {
            e0,
            ..Self::default()
        }
    }

    fn validate(&self, dim: usize) -> Result<(), EngineError> {
        if !is_finite_c(self.e0) {
            return Err(EngineError::InvalidConfig("e0 must be finite"));
        }
        if self.max_iters < 1 {
            return Err(EngineError::InvalidConfig("max_iters must be ≥ 1"));
        }
        if !(self.tol > 0.0) {
            return Err(EngineError::InvalidConfig("tol must be > 0"));
        }
        if self.reference_row < 1 || self.reference_row > dim {
            return Err(EngineError::InvalidConfig(
                "reference_row must lie in [1, dim]",
            ));
        }
        Ok(())
    }
}

/// One converged (or capped) inverse-iteration outcome.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Final eigenvalue estimate.
    pub energy: ComplexScalar,
    /// Solve steps performed.
    pub iterations: usize,
    /// ‖(H − E)X‖∞ / ‖X‖∞ at the final estimate.
    pub residual: f64,
    /// Eigencolumn, scaled so `eigencolumn[reference_row − 1]` is (1,0)
    /// exactly.
    pub eigencolumn: Vec<ComplexScalar>,
    /// Row used for the final estimate (may differ from the configured
    /// row after a degenerate-row fallback).
    pub reference_row: usize,
    /// True only when |ΔE| < tol and the residual contract held.
    pub converged: bool,
}

/// Controls an energy-range scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    /// Grid start (inclusive).
    pub e_min: f64,
    /// Grid end (inclusive when on the grid).
    pub e_max: f64,
    /// Grid step DE.
    pub de: f64,
    /// Template for the per-step iteration; its `e0` is replaced by each
    /// grid point.
    pub iteration: IterationConfig,
    /// Energies closer than this cluster as one eigenvalue.
    pub dedupe_tol: f64,
    /// Minimum consecutive grid steps a cluster must span.
    pub min_persistence: usize,
}

impl ScanConfig {
    /// Scan with default dedupe tolerance (1e-9) and persistence (2).
    pub fn new(e_min: f64, e_max: f64, de: f64, iteration: IterationConfig) -> Self {
        Self {
            e_min,
            e_max,
            de,
            iteration,
            dedupe_tol: 1e-9,
            min_persistence: 2,
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        if !(self.e_min.is_finite() && self.e_max.is_finite() && self.e_min < self.e_max) {
            return Err(EngineError::InvalidConfig("scan needs e_min < e_max"));
        }
        if !(self.de > 0.0) || self.de > self.e_max - self.e_min {
            return Err(EngineError::InvalidConfig(
                "scan step must satisfy 0 < de ≤ e_max − e_min",
            ));
        }
        if !(self.dedupe_tol > 0.0) {
            return Err(EngineError::InvalidConfig("dedupe_tol must be > 0"));
        }
        if self.min_persistence < 1 {
            return Err(EngineError::InvalidConfig("min_persistence must be ≥ 1"));
        }
        Ok(())
    }

    /// Grid points e_min, e_min+de, …, up to and including e_max when it
    /// sits on the grid (within a small relative slop).
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.e_max - self.e_min) / self.de + 1e-9).floor() as usize;
        (0..=n).map(|i| self.e_min + i as f64 * self.de).collect()
    }
}

/// One deduplicated eigenvalue retained by a scan.
#[derive(Debug, Clone)]
pub struct ResonanceRecord {
    /// Representative energy (the member with the smallest residual).
    pub energy: ComplexScalar,
    /// Iterations taken by the representative member.
    pub iterations: usize,
    /// Residual of the representative member.
    pub residual: f64,
    /// Longest run of consecutive grid steps on which this eigenvalue
    /// emerged.
    pub persistence: usize,
    /// Reference row of the representative member.
    pub reference_row: usize,
}

/// A grid step that produced no usable eigenvalue.
#[derive(Debug, Clone)]
pub struct ScanFailure {
    /// The shift at which the step ran.
    pub e0: f64,
    /// Why the step was discarded.
    pub reason: String,
}

/// Outcome of a scan: retained eigenvalues sorted by real part, plus the
/// discarded steps.
#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    /// Number of grid steps executed.
    pub steps: usize,
    /// Retained eigenvalues, ascending in ER.
    pub resonances: Vec<ResonanceRecord>,
    /// Steps that errored or did not converge.
    pub failures: Vec<ScanFailure>,
}

/// Scans re-run per dimension for semi-convergence studies.
#[derive(Debug, Clone)]
pub struct DimensionScan {
    /// Basis dimension of this entry.
    pub dim: usize,
    /// Scan outcome at that dimension.
    pub report: ScanReport,
}

/// Inverse iteration for one eigenvalue of the complex-symmetric band.
///
/// Starts from the all-ones column. Each step solves (H − e)X = Y with
/// the stored elimination, rescales X so the reference row holds (1,0)
/// exactly, and reads the estimate off row `reference_row` of H·X.
/// Convergence requires both |ΔE| < tol between successive estimates and
/// the residual contract residual ≤ [`RESIDUAL_FACTOR`]·‖H‖∞; hitting
/// `max_iters` first returns `converged = false` honestly.
///
/// If the reference-row entry falls below [`DEGENERATE_ROW_FRACTION`] of
/// ‖X‖∞ before scaling, the row no longer carries information about the
/// emerging eigencolumn: with `pin_reference_row` the run aborts with
/// [`EngineError::ReferenceRowDegenerate`], otherwise estimation falls
/// back to the largest-magnitude row and continues.
pub fn iterate(
    m: &BandedComplexSymmetric,
    cfg: &IterationConfig,
) -> Result<EigenResult, EngineError> {
    cfg.validate(m.dim())?;
    let n = m.dim();
    let h_norm = m.inf_norm();
    let residual_cap = RESIDUAL_FACTOR * h_norm;

    let mut factor = factor_shifted(m, cfg.e0)?;
    let mut rr = cfg.reference_row;
    let mut x = vec![ComplexScalar::new(1.0, 0.0); n];
    let mut energy = cfg.e0;
    let mut residual = f64::INFINITY;
    let mut prev: Option<ComplexScalar> = None;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        let y = factor.solve(&x)?;
        iterations += 1;

        let ymax = y.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        if !(ymax > 0.0) || !ymax.is_finite() {
            // Iterate collapsed or overflowed; report the last estimate
            // as unconverged rather than divide by a junk entry.
            residual = residual_norm(m, energy, &x).unwrap_or(f64::INFINITY);
            break;
        }
        if y[rr - 1].norm() < DEGENERATE_ROW_FRACTION * ymax {
            if cfg.pin_reference_row {
                return Err(EngineError::ReferenceRowDegenerate { row: rr });
            }
            // The configured row contributes nothing; estimate from the
            // dominant row instead.
            let (best, _) = y
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("nonempty column");
            rr = best + 1;
        }

        let pivot = y[rr - 1];
        x = y.iter().map(|v| v / pivot).collect();
        x[rr - 1] = ComplexScalar::new(1.0, 0.0);

        let hx = m.matvec(&x);
        let e_est = hx[rr - 1];
        let xmax = x.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        residual = hx
            .iter()
            .zip(&x)
            .map(|(hv, xv)| (hv - e_est * xv).norm())
            .fold(0.0_f64, f64::max)
            / xmax;

        let delta = prev.map(|p| (e_est - p).norm());
        energy = e_est;
        prev = Some(e_est);

        if let Some(d) = delta {
            if d < cfg.tol && residual <= residual_cap {
                converged = true;
                break;
            }
        }

        if cfg.rayleigh_update {
            factor = factor_shifted(m, e_est)?;
        }
    }

    Ok(EigenResult {
        energy,
        iterations,
        residual,
        eigencolumn: x,
        reference_row: rr,
        converged,
    })
}

/// Scans the energy grid, keeping eigenvalues that persist over
/// consecutive steps.
///
/// Each grid point runs a fresh [`iterate`] (all-ones start column) with
/// the template configuration at that shift. A grid point that lands
/// exactly on an eigenvalue makes the shifted matrix singular; such a
/// step is retried once at e0 + de/17 (an offset that cannot collide
/// with another grid point) before being recorded as a failure. Converged
/// energies are clustered within `dedupe_tol`; clusters whose longest run
/// of consecutive grid steps reaches `min_persistence` are retained, each
/// represented by its smallest-residual member, and reported in ascending
/// order of ER. Grid steps execute in parallel; clustering is
/// order-normalized so parallel and serial runs agree exactly.
pub fn scan(m: &BandedComplexSymmetric, cfg: &ScanConfig) -> Result<ScanReport, EngineError> {
    cfg.validate()?;
    cfg.iteration.validate(m.dim())?;
    let grid = cfg.grid();

    let outcomes: Vec<(f64, Result<EigenResult, EngineError>)> = grid
        .par_iter()
        .map(|&e| {
            let run = |shift: f64| {
                let step_cfg = IterationConfig {
                    e0: ComplexScalar::new(shift, 0.0),
                    ..cfg.iteration.clone()
                };
                iterate(m, &step_cfg)
            };
            let first = run(e);
            let out = match first {
                Err(EngineError::Linalg(LinalgError::SingularShift { .. })) => {
                    run(e + cfg.de / 17.0)
                }
                other => other,
            };
            (e, out)
        })
        .collect();

    // Serial clustering in grid order.
    struct Cluster {
        members: Vec<(usize, EigenResult)>,
        best: usize, // index into members with the smallest residual
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut failures = Vec::new();

    for (step, (e0, outcome)) in outcomes.into_iter().enumerate() {
        match outcome {
            Err(err) => failures.push(ScanFailure {
                e0,
                reason: err.to_string(),
            }),
            Ok(res) if !res.converged => failures.push(ScanFailure {
                e0,
                reason: format!(
                    "not converged after {} iterations (residual {:.3e})",
                    res.iterations, res.residual
                ),
            }),
            Ok(res) => {
                let target = clusters
                    .iter_mut()
                    .filter(|c| {
                        (c.members[c.best].1.energy - res.energy).norm() < cfg.dedupe_tol
                    })
                    .min_by(|a, b| {
                        let da = (a.members[a.best].1.energy - res.energy).norm();
                        let db = (b.members[b.best].1.energy - res.energy).norm();
                        da.total_cmp(&db)
                    });
                match target {
                    Some(c) => {
                        c.members.push((step, res));
                        let last = c.members.len() - 1;
                        if c.members[last].1.residual < c.members[c.best].1.residual {
                            c.best = last;
                        }
                    }
                    None => clusters.push(Cluster {
                        members: vec![(step, res)],
                        best: 0,
                    }),
                }
            }
        }
    }

    let mut resonances: Vec<ResonanceRecord> = clusters
        .into_iter()
        .filter_map(|c| {
            let mut longest = 1_usize;
            let mut run = 1_usize;
            for w in c.members.windows(2) {
                if w[1].0 == w[0].0 + 1 {
                    run += 1;
                    longest = longest.max(run);
                } else {
                    run = 1;
                }
            }
            if longest < cfg.min_persistence {
                return None;
            }
            let rep = &c.members[c.best].1;
            Some(ResonanceRecord {
                energy: rep.energy,
                iterations: rep.iterations,
                residual: rep.residual,
                persistence: longest,
                reference_row: rep.reference_row,
            })
        })
        .collect();
    resonances.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));

    Ok(ScanReport {
        steps: grid.len(),
        resonances,
        failures,
    })
}

/// Re-assembles and re-scans at each basis dimension, ascending, so
/// semi-convergence of the eigenvalue lists is visible.
pub fn dimension_sweep(
    spec: &BasisSpec,
    pot: &PolynomialPotential,
    dims: &[usize],
    cfg: &ScanConfig,
) -> Result<Vec<DimensionScan>, EngineError> {
    if dims.is_empty() {
        return Err(EngineError::InvalidConfig("dimension list is empty"));
    }
    if dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EngineError::InvalidConfig(
            "dimension list must be strictly ascending",
        ));
    }
    let mut out = Vec::with_capacity(dims.len());
    for &d in dims {
        let h = assemble(&spec.with_dim(d)?, pot)?;
        let report = scan(&h, cfg)?;
        out.push(DimensionScan { dim: d, report });
    }
    Ok(out)
}

/// Repeats one iteration per requested reference row, pinning each row so
/// failures are attributable, and returns every outcome for the caller to
/// compare.
pub fn reference_row_check(
    m: &BandedComplexSymmetric,
    cfg: &IterationConfig,
    rows: &[usize],
) -> Vec<(usize, Result<EigenResult, EngineError>)> {
    rows.iter()
        .map(|&row| {
            let row_cfg = IterationConfig {
                reference_row: row,
                pin_reference_row: true,
                ..cfg.clone()
            };
            (row, iterate(m, &row_cfg))
        })
        .collect()
}
