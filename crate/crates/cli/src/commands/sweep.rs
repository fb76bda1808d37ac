//! `sweep`: ratio map over `(η, n0)` and the NLI shot-noise boundary.

use rayon::prelude::*;
use serde::Serialize;

use qimd_core::working_point::{
    ratio_map, shot_noise_boundary, BoundaryCrossing, InterferometerKind, SweepCell,
};
use qimd_core::ScanPlan;

use super::Outcome;
use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{num, opt_num, to_json, Artifacts, Table};

#[derive(Debug, Clone, Copy, Serialize)]
struct Cell {
    eta: f64,
    n0: f64,
    dphi_wp2: f64,
    #[serde(rename = "dphi_N2")]
    dphi_n2: f64,
    ratio: f64,
    shot_noise_flag: bool,
}

impl From<SweepCell> for Cell {
    fn from(c: SweepCell) -> Self {
        Cell {
            eta: c.eta,
            n0: c.n0,
            dphi_wp2: c.working_point,
            dphi_n2: c.distillation,
            ratio: c.ratio,
            shot_noise_flag: c.beats_shot_noise(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
struct BoundaryRow {
    n0: f64,
    eta_star: Option<f64>,
    residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    kind: InterferometerKind,
    steps: usize,
    cells: Vec<Cell>,
    /// NLI only.
    boundary: Option<Vec<BoundaryRow>>,
}

pub fn run_sweep(cfg: &RunConfig, hash: &str) -> Result<Outcome, CliError> {
    let sweep = cfg.grid()?;
    let grid = sweep.grid()?;
    let plan = cfg.plan()?;
    let cells: Vec<Cell> = ratio_map(&grid, sweep.kind, plan)?
        .into_iter()
        .map(Cell::from)
        .collect();

    let boundary = match sweep.kind {
        InterferometerKind::Nli => {
            let steps = sweep.boundary_steps.unwrap_or(plan.steps());
            let bplan = ScanPlan::new(steps, 0.0)?;
            let rows = grid
                .n0_axis
                .par_iter()
                .map(|&n0| {
                    let crossing = shot_noise_boundary(n0, &bplan, grid.noise_stats)?;
                    Ok(match crossing {
                        BoundaryCrossing::Crossing { eta, residual } => BoundaryRow {
                            n0,
                            eta_star: Some(eta),
                            residual: Some(residual),
                        },
                        BoundaryCrossing::NoCrossing => BoundaryRow {
                            n0,
                            eta_star: None,
                            residual: None,
                        },
                    })
                })
                .collect::<qimd_core::Result<Vec<_>>>()?;
            Some(rows)
        }
        InterferometerKind::Mzi => None,
    };

    let out = SweepOutput {
        kind: sweep.kind,
        steps: plan.steps(),
        cells,
        boundary,
    };
    let artifacts = match cfg.format_or(Format::Csv) {
        Format::Json => Artifacts {
            main: to_json(hash, &out)?,
            sidecars: Vec::new(),
        },
        Format::Csv => {
            let mut t = Table::new(&[
                "eta",
                "n0",
                "dphi_wp2",
                "dphi_N2",
                "ratio",
                "shot_noise_flag",
            ]);
            for c in &out.cells {
                t.push(vec![
                    num(c.eta),
                    num(c.n0),
                    num(c.dphi_wp2),
                    num(c.dphi_n2),
                    num(c.ratio),
                    c.shot_noise_flag.to_string(),
                ]);
            }
            let mut sidecars = Vec::new();
            if let Some(rows) = &out.boundary {
                let mut b = Table::new(&["n0", "eta_star", "residual"]);
                for r in rows {
                    b.push(vec![num(r.n0), opt_num(r.eta_star), opt_num(r.residual)]);
                }
                sidecars.push(("boundary.csv", b.to_csv(hash)?));
            }
            Artifacts {
                main: t.to_csv(hash)?,
                sidecars,
            }
        }
    };
    Ok(Outcome {
        artifacts,
        exit_code: crate::error::exit::OK,
    })
}
