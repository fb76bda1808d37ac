//! `analytic` and `wp`: closed forms and the numerical working point.

use std::f64::consts::PI;

use serde::Serialize;

use qimd_core::uncertainty::wp_uncertainty_closed;
use qimd_core::uncertainty::{distillation_residual, uncertainty_report};
use qimd_core::working_point::{boundary_limits, minimize_phase_uncertainty};
use qimd_core::{derive_fringe, FringeModel, UncertaintyReport};

use super::{finite, key_value, Outcome};
use crate::config::RunConfig;
use crate::error::CliError;

/// Phase samples used to bound the harmonic left over for `M ∈ {3, 4}`.
const RESIDUAL_SAMPLES: usize = 720;

#[derive(Debug, Serialize)]
struct AnalyticOutput {
    amplitude: f64,
    contrast: f64,
    xi: f64,
    noise_mean: f64,
    lambda_phi: f64,
    lambda_n: f64,
    shot_noise_reference: f64,
    steps: usize,
    theta_jitter: f64,
    #[serde(flatten)]
    report: UncertaintyReport,
    /// Distillation plus scanning uncertainty.
    distillation_total: Option<f64>,
    /// Largest gap between the explicit sum and the closed form over phase;
    /// only reported where the closed form is not exact.
    distillation_residual_max: Option<f64>,
}

fn model(cfg: &RunConfig) -> Result<FringeModel, CliError> {
    Ok(derive_fringe(cfg.spec()?, &cfg.noise)?)
}

pub fn run_analytic(cfg: &RunConfig, hash: &str) -> Result<Outcome, CliError> {
    let model = model(cfg)?;
    let plan = cfg.plan()?;
    let report = uncertainty_report(&model, plan)?;
    let residual = match (report.distillation, plan.closed_form_exact()) {
        (Some(_), false) => {
            let mut worst: f64 = 0.0;
            for i in 0..RESIDUAL_SAMPLES {
                let phase = 2.0 * PI * i as f64 / RESIDUAL_SAMPLES as f64;
                worst = worst.max(distillation_residual(&model, plan, phase)?.abs());
            }
            Some(worst)
        }
        _ => None,
    };
    let out = AnalyticOutput {
        amplitude: model.amplitude,
        contrast: model.contrast,
        xi: model.xi(),
        noise_mean: model.noise_mean,
        lambda_phi: model.lambda_phi(),
        lambda_n: model.lambda_n(),
        shot_noise_reference: cfg.spec()?.shot_noise_reference(),
        steps: plan.steps(),
        theta_jitter: plan.theta_jitter(),
        distillation_total: report.distillation.zip(report.scanning).map(|(d, s)| d + s),
        report,
        distillation_residual_max: residual,
    };
    Ok(Outcome::ok(key_value(cfg, hash, &out)?))
}

#[derive(Debug, Serialize)]
struct WpOutput {
    phase: f64,
    variance: f64,
    at_boundary: bool,
    iterations: usize,
    closed_variance: f64,
    relative_difference: f64,
    phi1: f64,
    limit_at_zero: Option<f64>,
    limit_at_pi: Option<f64>,
    shot_noise_reference: f64,
    beats_shot_noise: bool,
}

pub fn run_wp(cfg: &RunConfig, hash: &str) -> Result<Outcome, CliError> {
    let model = model(cfg)?;
    let plan = cfg.plan()?;
    let located = minimize_phase_uncertainty(&model, plan)?;
    let closed = wp_uncertainty_closed(&model, plan)?;
    let limits = boundary_limits(&model, plan)?;
    let reference = cfg.spec()?.shot_noise_reference();
    let out = WpOutput {
        phase: located.phase,
        variance: located.variance,
        at_boundary: located.at_boundary,
        iterations: located.iterations,
        closed_variance: closed.variance,
        relative_difference: (located.variance - closed.variance).abs() / closed.variance,
        phi1: closed.phi1,
        limit_at_zero: finite(limits.at_zero),
        limit_at_pi: finite(limits.at_pi),
        shot_noise_reference: reference,
        beats_shot_noise: closed.variance <= reference,
    };
    Ok(Outcome::ok(key_value(cfg, hash, &out)?))
}
