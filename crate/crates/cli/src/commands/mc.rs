//! `mc`: Monte-Carlo checks of the closed forms.

use serde::Serialize;

use qimd_core::oracle::{
    mc_distillation, mc_working_point, simulate_detected_counts, EmpiricalEstimate, McReport,
    MeasurementRecord,
};
use qimd_core::working_point::minimize_phase_uncertainty;
use qimd_core::{derive_fringe, detected_variance, fringe_mean, Error, FringeModel};

use super::Outcome;
use crate::config::{Experiment, Format, McConfig, RunConfig};
use crate::error::{exit, CliError};
use crate::output::{num, opt_num, to_json, Artifacts, Table};

/// Largest |z| that still passes.
pub const Z_PASS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub quantity: &'static str,
    /// Phase of the setting for per-setting checks.
    pub phase: Option<f64>,
    pub predicted: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z: f64,
    pub relative_error: f64,
}

impl Check {
    fn new(
        quantity: &'static str,
        phase: Option<f64>,
        predicted: f64,
        empirical: f64,
        stderr: f64,
    ) -> Self {
        Check {
            quantity,
            phase,
            predicted,
            empirical,
            stderr,
            z: (empirical - predicted) / stderr,
            relative_error: empirical / predicted - 1.0,
        }
    }

    fn passes(&self) -> bool {
        self.z.abs() <= Z_PASS
    }
}

#[derive(Debug, Serialize)]
struct McOutput {
    experiment: Experiment,
    status: Status,
    seed: u64,
    shots: usize,
    trials: Option<usize>,
    phase: Option<f64>,
    checks: Vec<Check>,
    estimator: Option<McReport>,
    reason: Option<String>,
}

pub fn run_mc(cfg: &RunConfig, hash: &str) -> Result<Outcome, CliError> {
    let mc = cfg.mc()?;
    let seed = mc
        .seed
        .ok_or_else(|| CliError::Config("mc requires a seed".into()))?;
    let model = derive_fringe(cfg.spec()?, &cfg.noise)?;
    let mut out = McOutput {
        experiment: mc.experiment,
        status: Status::Pass,
        seed,
        shots: mc.shots,
        trials: None,
        phase: None,
        checks: Vec::new(),
        estimator: None,
        reason: None,
    };
    let mut record = None;
    let result = match mc.experiment {
        Experiment::Distillation => {
            out.phase = Some(mc.true_phase);
            out.trials = Some(mc.trials);
            mc_distillation(
                &model,
                cfg.plan()?,
                mc.true_phase,
                mc.shots,
                mc.trials,
                seed,
            )
            .map(|r| estimator(&mut out, r, "distillation_variance"))
        }
        Experiment::WorkingPoint => {
            let phi = match mc.probe_phase {
                Some(p) => p,
                None => minimize_phase_uncertainty(&model, cfg.plan()?)?.phase,
            };
            out.phase = Some(phi);
            out.trials = Some(mc.trials);
            mc_working_point(&model, phi, mc.shots, mc.trials, seed)
                .map(|r| estimator(&mut out, r, "working_point_variance"))
        }
        Experiment::Counts => counts(&model, cfg, mc, seed).map(|(checks, rec)| {
            out.checks = checks;
            record = Some(rec);
        }),
    };
    match result {
        Ok(()) => {}
        Err(Error::RegimeViolation(reason)) => {
            log::warn!("inconclusive: {reason}");
            out.status = Status::Inconclusive;
            out.reason = Some(reason);
        }
        Err(e) => return Err(e.into()),
    }
    if out.status == Status::Pass && !out.checks.iter().all(Check::passes) {
        out.status = Status::Fail;
    }
    let exit_code = match out.status {
        Status::Pass => exit::OK,
        Status::Fail => exit::NUMERIC,
        Status::Inconclusive => exit::INCONCLUSIVE,
    };

    let main = match cfg.format_or(Format::Json) {
        Format::Json => to_json(hash, &out)?,
        Format::Csv => checks_table(&out.checks).to_csv(hash)?,
    };
    let mut sidecars = Vec::new();
    if let Some(rec) = record {
        sidecars.push(("record.csv", record_table(&rec).to_csv(hash)?));
    }
    Ok(Outcome {
        artifacts: Artifacts { main, sidecars },
        exit_code,
    })
}

fn estimator(out: &mut McOutput, report: McReport, quantity: &'static str) {
    out.checks.push(Check::new(
        quantity,
        None,
        report.predicted,
        report.estimate.variance,
        report.estimate.stderr_variance,
    ));
    out.estimator = Some(report);
}

fn counts(
    model: &FringeModel,
    cfg: &RunConfig,
    mc: &McConfig,
    seed: u64,
) -> qimd_core::Result<(Vec<Check>, MeasurementRecord)> {
    let settings = match &mc.settings {
        Some(s) => s.clone(),
        None => cfg
            .plan
            .as_ref()
            .map(|p| p.thetas().iter().map(|t| mc.true_phase + t).collect())
            .unwrap_or_else(|| vec![mc.true_phase]),
    };
    let record = simulate_detected_counts(model, &settings, mc.shots, seed)?;
    let mut checks = Vec::with_capacity(2 * settings.len());
    for (&phi, counts) in settings.iter().zip(&record.counts) {
        let e = EmpiricalEstimate::from_counts(counts)?;
        checks.push(Check::new(
            "mean",
            Some(phi),
            fringe_mean(model, phi),
            e.mean,
            e.stderr_mean,
        ));
        checks.push(Check::new(
            "variance",
            Some(phi),
            detected_variance(model, phi),
            e.variance,
            e.stderr_variance,
        ));
    }
    Ok((checks, record))
}

fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&[
        "quantity",
        "phase",
        "predicted",
        "empirical",
        "stderr",
        "z",
        "relative_error",
        "pass",
    ]);
    for c in checks {
        t.push(vec![
            c.quantity.to_string(),
            opt_num(c.phase),
            num(c.predicted),
            num(c.empirical),
            num(c.stderr),
            num(c.z),
            num(c.relative_error),
            c.passes().to_string(),
        ]);
    }
    t
}

fn record_table(rec: &MeasurementRecord) -> Table {
    let mut t = Table::new(&["setting_index", "phase", "shot_index", "count"]);
    for (j, (phi, counts)) in rec.settings.iter().zip(&rec.counts).enumerate() {
        for (k, c) in counts.iter().enumerate() {
            t.push(vec![j.to_string(), num(*phi), k.to_string(), c.to_string()]);
        }
    }
    t
}
