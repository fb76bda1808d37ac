//! `tables`: specialised table expressions against the general closed forms.

use serde::Serialize;

use qimd_core::uncertainty::{
    distillation_uncertainty, intrinsic_uncertainty, wp_uncertainty_closed,
};
use qimd_core::uncertainty::{table_formula, Regime};
use qimd_core::{derive_fringe, InterferometerSpec, NoiseChannel, PhotonStatistics, ScanPlan};

use super::Outcome;
use crate::config::{Format, RunConfig};
use crate::error::{exit, CliError};
use crate::output::{num, opt_num, to_json, Artifacts, Table};

/// Tolerance for the exact specialisations.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Spontaneous-regime forms are leading order: tolerance `factor · n0`.
pub const ASYMPTOTIC_FACTOR: f64 = 10.0;

const STEPS: [usize; 4] = [1, 3, 5, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Intrinsic,
    Distillation,
    WorkingPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub regime: Regime,
    pub kind: &'static str,
    pub quantity: Quantity,
    pub n0: f64,
    pub n0p: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub eta: f64,
    pub noise_mean: f64,
    pub lambda_n: f64,
    pub steps: usize,
    pub table_value: f64,
    pub general_value: f64,
    pub ratio: f64,
    pub relative_difference: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

struct Case {
    regime: Regime,
    spec: InterferometerSpec,
    noise: NoiseChannel,
    plan: ScanPlan,
}

fn cases() -> qimd_core::Result<Vec<Case>> {
    let mut out = Vec::new();
    let mut push = |regime, spec, noise, m: usize| -> qimd_core::Result<()> {
        out.push(Case {
            regime,
            spec,
            noise,
            plan: ScanPlan::new(m, 0.0)?,
        });
        Ok(())
    };

    let noiseless = NoiseChannel::noiseless();
    for &m in &STEPS {
        for n0 in [1.0, 10.0, 100.0, 1e3, 1e4] {
            for (t1, t2) in [(0.5, 0.5), (0.3, 0.7), (0.2, 0.6), (0.9, 0.4)] {
                push(
                    Regime::NoNoise,
                    InterferometerSpec::Mzi { n0, t1, t2 },
                    noiseless,
                    m,
                )?;
            }
        }
        for n0 in [1.0, 2.0, 5.0, 10.0] {
            for n0p in [1.0, 2.0, 5.0, 10.0] {
                push(
                    Regime::NoNoise,
                    InterferometerSpec::Nli { n0, n0p },
                    noiseless,
                    m,
                )?;
            }
        }
    }

    let mut channels = Vec::new();
    for eta in [0.3, 0.7, 0.95, 1.0] {
        channels.push(NoiseChannel::new(eta, 0.0, PhotonStatistics::Thermal)?);
        for mean in [2.0, 50.0] {
            for stats in [PhotonStatistics::Poissonian, PhotonStatistics::Thermal] {
                channels.push(NoiseChannel::new(eta, mean, stats)?);
            }
        }
    }
    for &m in &[1, 5] {
        for n0 in [1.0, 10.0, 100.0, 1e3] {
            for spec in [
                InterferometerSpec::balanced_mzi(n0),
                InterferometerSpec::balanced_nli(n0),
            ] {
                for &noise in &channels {
                    push(Regime::PerfectContrast, spec, noise, m)?;
                }
            }
        }
    }

    for &m in &[1, 5] {
        for n0 in [1e-2, 1e-3, 1e-4] {
            for eta in [0.3, 0.7, 0.95] {
                let noise = NoiseChannel::new(eta, n0, PhotonStatistics::Thermal)?;
                for spec in [
                    InterferometerSpec::balanced_mzi(n0),
                    InterferometerSpec::balanced_nli(n0),
                ] {
                    push(Regime::Spontaneous, spec, noise, m)?;
                }
            }
        }
    }
    Ok(out)
}

fn rows_for(case: &Case) -> qimd_core::Result<Vec<TableRow>> {
    let table = table_formula(&case.spec, case.regime, &case.plan, &case.noise)?;
    let model = derive_fringe(&case.spec, &case.noise)?;
    let tolerance = match case.regime {
        Regime::Spontaneous => ASYMPTOTIC_FACTOR * case.spec.n0(),
        _ => EXACT_TOLERANCE,
    };
    let (kind, n0p, t1, t2) = match case.spec {
        InterferometerSpec::Mzi { t1, t2, .. } => ("mzi", None, Some(t1), Some(t2)),
        InterferometerSpec::Nli { n0p, .. } => ("nli", Some(n0p), None, None),
    };
    let mut pairs = Vec::new();
    if let Some(v) = table.intrinsic {
        pairs.push((Quantity::Intrinsic, v, intrinsic_uncertainty(&model)?));
    }
    if let Some(v) = table.distillation {
        pairs.push((
            Quantity::Distillation,
            v,
            distillation_uncertainty(&model, &case.plan)?,
        ));
    }
    pairs.push((
        Quantity::WorkingPoint,
        table.working_point,
        wp_uncertainty_closed(&model, &case.plan)?.variance,
    ));
    Ok(pairs
        .into_iter()
        .map(|(quantity, table_value, general_value)| {
            let relative_difference = (table_value - general_value).abs() / general_value.abs();
            TableRow {
                regime: case.regime,
                kind,
                quantity,
                n0: case.spec.n0(),
                n0p,
                t1,
                t2,
                eta: case.noise.eta,
                noise_mean: case.noise.mean_noise,
                lambda_n: model.lambda_n(),
                steps: case.plan.steps(),
                table_value,
                general_value,
                ratio: table_value / general_value,
                relative_difference,
                tolerance,
                within_tolerance: relative_difference <= tolerance,
            }
        })
        .collect())
}

/// All rows of the built-in comparison matrix.
pub fn table_rows() -> qimd_core::Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for case in cases()? {
        rows.extend(rows_for(&case)?);
    }
    Ok(rows)
}

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::NoNoise => "no_noise",
        Regime::PerfectContrast => "perfect_contrast",
        Regime::Spontaneous => "spontaneous",
    }
}

#[derive(Serialize)]
struct TablesOutput<'a> {
    rows: &'a [TableRow],
}

pub fn run_tables(cfg: &RunConfig, hash: &str) -> Result<Outcome, CliError> {
    let rows = table_rows()?;
    let main = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(hash, &TablesOutput { rows: &rows })?,
        Format::Csv => {
            let mut t = Table::new(&[
                "regime",
                "kind",
                "quantity",
                "n0",
                "n0p",
                "t1",
                "t2",
                "eta",
                "noise_mean",
                "lambda_n",
                "steps",
                "table_value",
                "general_value",
                "ratio",
                "relative_difference",
                "tolerance",
                "within_tolerance",
            ]);
            for r in &rows {
                let quantity = match r.quantity {
                    Quantity::Intrinsic => "intrinsic",
                    Quantity::Distillation => "distillation",
                    Quantity::WorkingPoint => "working_point",
                };
                t.push(vec![
                    regime_name(r.regime).to_string(),
                    r.kind.to_string(),
                    quantity.to_string(),
                    num(r.n0),
                    opt_num(r.n0p),
                    opt_num(r.t1),
                    opt_num(r.t2),
                    num(r.eta),
                    num(r.noise_mean),
                    num(r.lambda_n),
                    r.steps.to_string(),
                    num(r.table_value),
                    num(r.general_value),
                    num(r.ratio),
                    num(r.relative_difference),
                    num(r.tolerance),
                    r.within_tolerance.to_string(),
                ]);
            }
            t.to_csv(hash)?
        }
    };
    let failing = rows.iter().filter(|r| !r.within_tolerance).count();
    if failing > 0 {
        log::error!("{failing} table rows outside tolerance");
    }
    Ok(Outcome {
        artifacts: Artifacts {
            main,
            sidecars: Vec::new(),
        },
        exit_code: if failing > 0 { exit::NUMERIC } else { exit::OK },
    })
}
