//! Numerical working-point search and parameter sweeps over `(η, n0)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fringe::{
    derive_fringe, detected_variance, FringeModel, InterferometerSpec, NoiseChannel,
    PhotonStatistics,
};
use crate::solve::{brent_root, golden_section};
use crate::uncertainty::{distillation_uncertainty, wp_uncertainty_closed, ScanPlan};

/// Distance kept from the stationary points `0` and `π`.
pub const PHASE_MARGIN: f64 = 1e-9;
/// Absolute phase tolerance of the refinement.
pub const PHASE_TOLERANCE: f64 = 1e-10;
const COARSE_POINTS: usize = 64;
const LOG_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPointResult {
    /// `θ_WP ∈ [0, π]`; `0` when the optimum is the `φ → 0` infimum.
    pub phase: f64,
    pub variance: f64,
    /// The infimum is only approached at an endpoint.
    pub at_boundary: bool,
    pub iterations: usize,
}

/// One-sided limits of the single-setting variance at the stationary points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLimits {
    pub at_zero: f64,
    pub at_pi: f64,
}

/// Single-setting variance per measurement count,
/// `f(φ) = ΔN²(φ)/(M(𝒜𝒞 sin φ)²)`.
fn objective(model: &FringeModel, m: f64, phi: f64) -> f64 {
    let slope = model.slope(phi);
    detected_variance(model, phi) / (m * slope * slope)
}

/// Limits of `f` as `φ → 0⁺` and `φ → π⁻`.
///
/// `ΔN²` stays positive at both endpoints unless the dark fringe is perfectly
/// dark (`n_n = 0`, `𝒞 = 1`). There `n_φ ≈ 𝒜φ²/2` and the ratio tends to
/// `1/(2𝒜M)` whatever the signal statistics.
pub fn boundary_limits(model: &FringeModel, plan: &ScanPlan) -> Result<BoundaryLimits> {
    model.validate_for_phase()?;
    let m = plan.steps() as f64;
    let at_zero = if model.noise_mean == 0.0 && model.contrast == 1.0 {
        1.0 / (2.0 * model.amplitude * m)
    } else {
        f64::INFINITY
    };
    Ok(BoundaryLimits {
        at_zero,
        at_pi: f64::INFINITY,
    })
}

/// Locates the phase minimising the single-setting variance.
///
/// A coarse scan (uniform, plus logarithmic near `φ = 0` where optima of
/// nearly noiseless fringes sit) seeds a golden-section refinement in `ln φ`.
pub fn minimize_phase_uncertainty(
    model: &FringeModel,
    plan: &ScanPlan,
) -> Result<WorkingPointResult> {
    model.validate_for_phase()?;
    for (name, v) in [
        ("amplitude", model.amplitude),
        ("noise_mean", model.noise_mean),
    ] {
        if !v.is_finite() {
            return Err(Error::invalid(name, "must be finite"));
        }
    }
    let m = plan.steps() as f64;
    let lo = PHASE_MARGIN;
    let hi = PI - PHASE_MARGIN;
    let first_cell = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..LOG_POINTS)
        .map(|i| lo * (first_cell / lo).powf(i as f64 / LOG_POINTS as f64))
        .collect();
    grid.extend((0..COARSE_POINTS).map(|i| lo + first_cell * i as f64));
    let values: Vec<f64> = grid.iter().map(|&x| objective(model, m, x)).collect();
    let best = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Consistency("objective is NaN on the whole scan".into()))?;
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (ta, tb) = (a.ln(), b.ln());
    let min = golden_section(
        |t| objective(model, m, t.exp()),
        ta,
        tb,
        PHASE_TOLERANCE / b,
        500,
    );
    let phase = min.x.exp();
    let limits = boundary_limits(model, plan)?;
    let iterations = grid.len() + min.iterations;
    if limits.at_zero <= min.value * (1.0 + 1e-9) {
        return Ok(WorkingPointResult {
            phase: 0.0,
            variance: limits.at_zero,
            at_boundary: true,
            iterations,
        });
    }
    Ok(WorkingPointResult {
        phase,
        variance: min.value,
        at_boundary: false,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferometerKind {
    Mzi,
    Nli,
}

impl InterferometerKind {
    /// Balanced setup of this kind with `n0` photons per arm.
    pub fn balanced(self, n0: f64) -> InterferometerSpec {
        match self {
            InterferometerKind::Mzi => InterferometerSpec::balanced_mzi(n0),
            InterferometerKind::Nli => InterferometerSpec::balanced_nli(n0),
        }
    }
}

/// `(η, n0)` grid with noise `n_n = (1 − η)n0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub eta_axis: Vec<f64>,
    pub n0_axis: Vec<f64>,
    #[serde(default = "thermal")]
    pub noise_stats: PhotonStatistics,
}

fn thermal() -> PhotonStatistics {
    PhotonStatistics::Thermal
}

impl SweepGrid {
    pub fn new(
        eta_axis: Vec<f64>,
        n0_axis: Vec<f64>,
        noise_stats: PhotonStatistics,
    ) -> Result<Self> {
        let grid = SweepGrid {
            eta_axis,
            n0_axis,
            noise_stats,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis(
            "eta_axis",
            &self.eta_axis,
            |x| x > 0.0 && x <= 1.0,
            "(0, 1]",
        )?;
        check_axis(
            "n0_axis",
            &self.n0_axis,
            |x| x > 0.0 && x.is_finite(),
            "(0, inf)",
        )
    }

    /// Noise channel of the cell at transmittance `eta` and `n0` photons.
    pub fn channel(&self, eta: f64, n0: f64) -> Result<NoiseChannel> {
        NoiseChannel::new(eta, n0, self.noise_stats)
    }

    pub fn len(&self) -> usize {
        self.eta_axis.len() * self.n0_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_axis(
    name: &'static str,
    axis: &[f64],
    ok: impl Fn(f64) -> bool,
    range: &str,
) -> Result<()> {
    if let Some(x) = axis.iter().find(|&&x| !ok(x)) {
        return Err(Error::invalid(name, format!("{x} outside {range}")));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(name, "must be strictly increasing"));
    }
    Ok(())
}

/// Closed-form values of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub eta: f64,
    pub n0: f64,
    pub working_point: f64,
    pub distillation: f64,
    pub ratio: f64,
}

impl SweepCell {
    /// Working point at or below the shot-noise reference `1/n0`.
    pub fn beats_shot_noise(&self) -> bool {
        self.working_point <= 1.0 / self.n0
    }
}

/// Evaluates one `(η, n0)` cell for a balanced interferometer.
pub fn sweep_cell(
    grid: &SweepGrid,
    kind: InterferometerKind,
    plan: &ScanPlan,
    eta: f64,
    n0: f64,
) -> Result<SweepCell> {
    let model = derive_fringe(&kind.balanced(n0), &grid.channel(eta, n0)?)?;
    let working_point = wp_uncertainty_closed(&model, plan)?.variance;
    let distillation = distillation_uncertainty(&model, plan)?;
    Ok(SweepCell {
        eta,
        n0,
        working_point,
        distillation,
        ratio: working_point / distillation,
    })
}

/// Ratio `Δφ_WP²/Δφ_N²` over the grid, η-major and in grid order.
///
/// Cells are evaluated in parallel on the current rayon pool; the result
/// does not depend on the number of workers.
pub fn ratio_map(
    grid: &SweepGrid,
    kind: InterferometerKind,
    plan: &ScanPlan,
) -> Result<Vec<SweepCell>> {
    grid.validate()?;
    plan.require_distillation()?;
    let n_cols = grid.n0_axis.len();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            sweep_cell(
                grid,
                kind,
                plan,
                grid.eta_axis[i / n_cols],
                grid.n0_axis[i % n_cols],
            )
        })
        .collect()
}

/// Outcome of the shot-noise boundary search at one `n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundaryCrossing {
    /// `Δφ_WP²(η)·n0 − 1` vanishes at `eta`, up to `residual`.
    Crossing { eta: f64, residual: f64 },
    /// No sign change in `η ∈ (0, 1]`.
    NoCrossing,
}

impl BoundaryCrossing {
    pub fn eta(&self) -> Option<f64> {
        match *self {
            BoundaryCrossing::Crossing { eta, .. } => Some(eta),
            BoundaryCrossing::NoCrossing => None,
        }
    }
}

/// Transmittance `η*` at which the working point of a balanced NLI with noise
/// `n_n = (1 − η)n0` reaches the shot-noise reference `1/n0`.
pub fn shot_noise_boundary(
    n0: f64,
    plan: &ScanPlan,
    noise_stats: PhotonStatistics,
) -> Result<BoundaryCrossing> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::invalid(
            "n0",
            format!("{n0} must be positive and finite"),
        ));
    }
    let spec = InterferometerSpec::balanced_nli(n0);
    let excess = |eta: f64| -> Result<f64> {
        let model = derive_fringe(&spec, &NoiseChannel::new(eta, n0, noise_stats)?)?;
        Ok(wp_uncertainty_closed(&model, plan)?.variance * n0 - 1.0)
    };
    let (lo, hi) = (PHASE_MARGIN, 1.0);
    let (g_lo, g_hi) = (excess(lo)?, excess(hi)?);
    if g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0 {
        return Ok(BoundaryCrossing::NoCrossing);
    }
    let root = brent_root(|eta| excess(eta).unwrap_or(f64::NAN), lo, hi, 1e-15, 200)?;
    Ok(BoundaryCrossing::Crossing {
        eta: root.x,
        residual: root.value,
    })
}
