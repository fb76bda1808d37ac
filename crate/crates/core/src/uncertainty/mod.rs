//! Phase-distillation estimator and closed-form phase uncertainties.
//!
//! Two routes are provided wherever a closed form relies on trigonometric
//! sums: the closed form itself and the explicit per-setting sum it came from.

mod tables;

pub use tables::{table_formula, Regime, TableValues};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, Error, Result};
use crate::fringe::{detected_variance, FringeModel};
use crate::working_point::minimize_phase_uncertainty;

/// Tunable-phase jitter of a piezo-driven mirror (1 nm at 730 nm).
pub const PIEZO_JITTER: f64 = 0.010;
/// Tunable-phase jitter of a spatial light modulator (4π over 256 levels).
pub const SLM_JITTER: f64 = 0.050;

/// Fewest settings for which the trigonometric estimator is defined.
pub const MIN_DISTILLATION_STEPS: usize = 3;

/// Tolerance below which a negative `φ₁` is treated as roundoff.
const PHI1_CLAMP: f64 = 1e-12;

/// Number of measurements and tunable-phase jitter.
///
/// For distillation the `steps` settings sit at `θ_j = 2πj/M`, `j = 1..=M`.
/// At the working point `steps` counts repeated measurements at one setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPlan {
    steps: usize,
    #[serde(default)]
    theta_jitter: f64,
}

impl ScanPlan {
    pub fn new(steps: usize, theta_jitter: f64) -> Result<Self> {
        let plan = ScanPlan {
            steps,
            theta_jitter,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan with the piezo jitter preset.
    pub fn piezo(steps: usize) -> Result<Self> {
        Self::new(steps, PIEZO_JITTER)
    }

    /// Plan with the SLM jitter preset.
    pub fn slm(steps: usize) -> Result<Self> {
        Self::new(steps, SLM_JITTER)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("steps", "need at least one measurement"));
        }
        nonnegative("theta_jitter", self.theta_jitter)?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn theta_jitter(&self) -> f64 {
        self.theta_jitter
    }

    /// Equally spaced tunable phases `2πj/M`, `j = 1..=M`.
    pub fn thetas(&self) -> Vec<f64> {
        let m = self.steps as f64;
        (1..=self.steps).map(|j| 2.0 * PI * j as f64 / m).collect()
    }

    /// Errors unless the plan has enough settings for distillation.
    pub fn require_distillation(&self) -> Result<()> {
        if self.steps < MIN_DISTILLATION_STEPS {
            return Err(Error::invalid(
                "steps",
                format!(
                    "distillation needs M >= {MIN_DISTILLATION_STEPS}, got {}",
                    self.steps
                ),
            ));
        }
        Ok(())
    }

    /// Whether the closed forms built on trigonometric sums are exact.
    ///
    /// The sums over `sin²cos` and `sin⁴` keep 3rd and 4th harmonics that only
    /// cancel for `M >= 5`.
    pub fn closed_form_exact(&self) -> bool {
        self.steps >= 5
    }
}

/// All closed-form variances for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    /// `Δφ_0²`
    pub intrinsic: f64,
    /// `Δφ_N²`; absent for `M < 3`.
    pub distillation: Option<f64>,
    /// `Δφ_θ²`; absent for `M < 3`.
    pub scanning: Option<f64>,
    /// `Δφ_WP²`
    pub working_point: f64,
    /// Located working point `θ_WP ∈ [0, π]`.
    pub wp_phase: f64,
    /// Whether the working point is an infimum approached at `φ → 0`.
    pub wp_at_boundary: bool,
    /// `φ₁`
    pub phi1: f64,
}

/// Estimates the phase from counts at the plan's settings.
///
/// Returns `atan2(S, −D)` with `S = Σ N_j sin θ_j` and `D = Σ N_j cos θ_j`,
/// in `(−π, π]`.
pub fn distill_phase(counts: &[f64], plan: &ScanPlan) -> Result<f64> {
    plan.require_distillation()?;
    if counts.len() != plan.steps() {
        return Err(Error::invalid(
            "counts",
            format!("expected {} values, got {}", plan.steps(), counts.len()),
        ));
    }
    let (mut s, mut d) = (0.0, 0.0);
    for (&n, theta) in counts.iter().zip(plan.thetas()) {
        s += n * theta.sin();
        d += n * theta.cos();
    }
    // Sums at the level of cancellation noise mean the counts are flat.
    let scale: f64 = counts.iter().map(|n| n.abs()).sum::<f64>();
    let floor = 64.0 * f64::EPSILON * scale;
    if s.abs() <= floor && d.abs() <= floor {
        return Err(Error::NoFringeInformation);
    }
    Ok(wrap_phase(s.atan2(-d)))
}

/// Maps a phase into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Intrinsic phase uncertainty `Δφ_0² = ½[(1 + ξ)/𝒜 + 2ξ + ξ²λ_n]`.
pub fn intrinsic_uncertainty(model: &FringeModel) -> Result<f64> {
    model.validate()?;
    let a = model.amplitude;
    let xi = model.xi();
    Ok(0.5 * ((1.0 + xi) / a + 2.0 * xi + xi * xi * model.lambda_n()))
}

/// Distillation uncertainty
/// `Δφ_N² = 4Δφ_0²/(M𝒞²) + 2λ_φ(1 + 𝒞²/4)/(M𝒞²)`.
pub fn distillation_uncertainty(model: &FringeModel, plan: &ScanPlan) -> Result<f64> {
    model.validate_for_phase()?;
    plan.require_distillation()?;
    let m = plan.steps() as f64;
    let c2 = model.contrast * model.contrast;
    let d0 = intrinsic_uncertainty(model)?;
    Ok(4.0 * d0 / (m * c2) + (1.0 + c2 / 4.0) * 2.0 * model.lambda_phi() / (m * c2))
}

/// `Δφ_N²` evaluated as explicit sums over the settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitSum {
    /// Gaussian error propagation: `Σ (∂φ/∂N_j)² ΔN²(φ_j)`.
    pub propagated: f64,
    /// Average over settings: `(4/M²) Σ sin⁴φ_j Δφ_j²`.
    pub averaged: f64,
}

/// Explicit-sum `Δφ_N²` at true phase `phase`, without the jitter term.
///
/// The two routes must agree to `1e-12` relative; a larger gap is reported as
/// an internal-consistency error.
pub fn distillation_uncertainty_sum(
    model: &FringeModel,
    plan: &ScanPlan,
    phase: f64,
) -> Result<ExplicitSum> {
    model.validate_for_phase()?;
    plan.require_distillation()?;
    let m = plan.steps() as f64;
    let ac = model.amplitude * model.contrast;
    let mut propagated = 0.0;
    let mut averaged = 0.0;
    for theta in plan.thetas() {
        let phi = phase + theta;
        let s = phi.sin();
        let var = detected_variance(model, phi);
        let gradient = 2.0 * s / (m * ac);
        propagated += gradient * gradient * var;
        // sin⁴φ·Δφ_j² with Δφ_j² = ΔN²/(𝒜𝒞 sin φ)²; the limit at sin φ = 0
        // is finite.
        let weighted = match single_point_variance(model, phi) {
            Some(dphi2) => s.powi(4) * dphi2,
            None => s * s * var / (ac * ac),
        };
        averaged += weighted;
    }
    averaged *= 4.0 / (m * m);
    let scale = propagated.abs().max(averaged.abs());
    if (propagated - averaged).abs() > 1e-12 * scale {
        return Err(Error::Consistency(format!(
            "explicit sums disagree: {propagated} vs {averaged}"
        )));
    }
    Ok(ExplicitSum {
        propagated,
        averaged,
    })
}

/// Explicit sum minus closed form of `Δφ_N²` at `phase`.
///
/// Zero up to roundoff for `M >= 5`; for `M ∈ {3, 4}` this is the surviving
/// harmonic, and the explicit sum is the authoritative value.
pub fn distillation_residual(model: &FringeModel, plan: &ScanPlan, phase: f64) -> Result<f64> {
    let sum = distillation_uncertainty_sum(model, plan, phase)?;
    Ok(sum.propagated - distillation_uncertainty(model, plan)?)
}

/// Scanning uncertainty
/// `Δφ_θ² = 2(1 + 3𝒞²/4 + 2ξ + ξ²)Δθ²/(M𝒞²)`.
pub fn scan_uncertainty(model: &FringeModel, plan: &ScanPlan) -> Result<f64> {
    model.validate_for_phase()?;
    plan.require_distillation()?;
    let m = plan.steps() as f64;
    let c2 = model.contrast * model.contrast;
    let xi = model.xi();
    let dtheta = plan.theta_jitter();
    Ok(2.0 / (m * c2) * (1.0 + 0.75 * c2 + 2.0 * xi + xi * xi) * dtheta * dtheta)
}

/// Scanning uncertainty as the explicit sum `Σ (∂φ/∂θ_j)² Δθ²` at `phase`.
pub fn scan_uncertainty_sum(model: &FringeModel, plan: &ScanPlan, phase: f64) -> Result<f64> {
    model.validate_for_phase()?;
    plan.require_distillation()?;
    let m = plan.steps() as f64;
    let ac = model.amplitude * model.contrast;
    let dtheta2 = plan.theta_jitter() * plan.theta_jitter();
    Ok(plan
        .thetas()
        .into_iter()
        .map(|theta| {
            let phi = phase + theta;
            let g = 2.0 * crate::fringe::fringe_mean(model, phi) * phi.cos() / (m * ac);
            g * g * dtheta2
        })
        .sum())
}

/// `|sin φ|` below which a phase counts as a stationary point of the fringe.
const STATIONARY_GUARD: f64 = 1e-12;

fn single_point_variance(model: &FringeModel, phi: f64) -> Option<f64> {
    let slope = model.slope(phi);
    if phi.sin().abs() <= STATIONARY_GUARD || slope == 0.0 {
        None
    } else {
        Some(detected_variance(model, phi) / (slope * slope))
    }
}

/// Single-setting uncertainty `Δφ² = ΔN²(φ)/(𝒜𝒞 sin φ)²`, jitter excluded.
pub fn single_point_uncertainty(model: &FringeModel, phi: f64) -> Result<f64> {
    model.validate_for_phase()?;
    single_point_variance(model, phi).ok_or(Error::StationaryPoint(phi))
}

/// Closed-form working-point variance and its auxiliary `φ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPointClosed {
    pub variance: f64,
    pub phi1: f64,
}

/// Minimal single-setting variance for `M` repeated measurements,
/// `Δφ_WP² = Δφ_0²/(M𝒞²) + (1 − 𝒞²)λ_φ/(2M𝒞²) + √φ₁/(2M𝒞²)`.
pub fn wp_uncertainty_closed(model: &FringeModel, plan: &ScanPlan) -> Result<WorkingPointClosed> {
    model.validate_for_phase()?;
    let m = plan.steps() as f64;
    let a = model.amplitude;
    let c2 = model.contrast * model.contrast;
    let xi = model.xi();
    let lp = model.lambda_phi();
    let d0 = intrinsic_uncertainty(model)?;
    let noise_term = xi * (1.0 / a + xi * model.lambda_n());
    let contrast_term = 1.0 / a + 2.0 * xi + 2.0 * lp;
    let raw = noise_term * (4.0 * d0 + 4.0 * lp - noise_term)
        + (1.0 - c2) * (contrast_term * contrast_term - lp * (4.0 * d0 + c2 + 3.0));
    let phi1 = if raw >= 0.0 {
        raw
    } else if raw >= -PHI1_CLAMP {
        0.0
    } else {
        return Err(Error::Consistency(format!("phi1 = {raw} is negative")));
    };
    let variance = d0 / (m * c2) + (1.0 - c2) * lp / (2.0 * m * c2) + phi1.sqrt() / (2.0 * m * c2);
    Ok(WorkingPointClosed { variance, phi1 })
}

/// Noiseless NLI working point limited by the smaller gain,
/// `1/(4M n_min(n_min + 1))`.
pub fn balanced_wp(n_min: f64, plan: &ScanPlan) -> Result<f64> {
    nonnegative("n_min", n_min)?;
    if n_min == 0.0 {
        return Err(Error::invalid("n_min", "must be > 0"));
    }
    Ok(1.0 / (4.0 * plan.steps() as f64 * n_min * (n_min + 1.0)))
}

/// Evaluates every closed form and locates the working point numerically.
pub fn uncertainty_report(model: &FringeModel, plan: &ScanPlan) -> Result<UncertaintyReport> {
    model.validate_for_phase()?;
    let closed = wp_uncertainty_closed(model, plan)?;
    let located = minimize_phase_uncertainty(model, plan)?;
    let (distillation, scanning) = if plan.steps() >= MIN_DISTILLATION_STEPS {
        (
            Some(distillation_uncertainty(model, plan)?),
            Some(scan_uncertainty(model, plan)?),
        )
    } else {
        (None, None)
    };
    Ok(UncertaintyReport {
        intrinsic: intrinsic_uncertainty(model)?,
        distillation,
        scanning,
        working_point: closed.variance,
        wp_phase: located.phase,
        wp_at_boundary: located.at_boundary,
        phi1: closed.phi1,
    })
}
