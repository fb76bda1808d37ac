//! Shot-level simulation and Monte-Carlo estimator experiments.
//!
//! Every trial (or setting) draws from its own ChaCha stream derived from the
//! master seed, so results do not depend on how rayon schedules the work.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::bs_output_distribution;
use super::sampling::PhotonSampler;
use super::EmpiricalEstimate;
use crate::error::{Error, Result};
use crate::fringe::FringeModel;
use crate::uncertainty::{
    distill_phase, distillation_uncertainty_sum, single_point_uncertainty, wrap_phase, ScanPlan,
};

/// Largest predicted phase standard deviation (rad) for which linear error
/// propagation is trusted.
pub const LINEARITY_GATE: f64 = 0.1;
/// Relative tolerance between empirical and predicted variance.
pub const MC_TOLERANCE: f64 = 0.05;
/// Largest tolerated fraction of trials where distillation fails.
pub const MAX_FAILURE_RATE: f64 = 1e-3;
/// Largest tolerated fraction of working-point inversions needing a clamp.
pub const MAX_CLAMP_RATE: f64 = 0.01;

/// Upper bound on cached CDF entries per thread; rarer inputs beyond it are
/// recomputed on demand.
const CACHE_LIMIT: usize = 1 << 24;

/// Generator for stream `index` under master seed `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Memo of beam-splitter output CDFs at fixed `η`, indexed `[m][n]`.
#[derive(Debug, Clone)]
pub struct FockCache {
    eta: f64,
    rows: Vec<Vec<Option<Box<[f64]>>>>,
    stored: usize,
}

impl FockCache {
    pub fn new(eta: f64) -> Self {
        FockCache {
            eta,
            rows: Vec::new(),
            stored: 0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Draws the transmitted photon number for inputs `(m, n)`.
    pub fn sample<R: Rng + ?Sized>(&mut self, m: u64, n: u64, rng: &mut R) -> Result<u64> {
        if self.eta == 1.0 || (n == 0 && m == 0) {
            return Ok(m);
        }
        let (mi, ni) = (m as usize, n as usize);
        let cached = self
            .rows
            .get(mi)
            .and_then(|row| row.get(ni))
            .and_then(Option::as_deref);
        let u: f64;
        let k = match cached {
            Some(cdf) => {
                u = rng.random();
                draw(cdf, u)
            }
            None => {
                let cdf = bs_output_distribution(m, n, self.eta)?
                    .cdf()
                    .into_boxed_slice();
                u = rng.random();
                let k = draw(&cdf, u);
                if self.stored + cdf.len() <= CACHE_LIMIT {
                    self.stored += cdf.len();
                    if self.rows.len() <= mi {
                        self.rows.resize_with(mi + 1, Vec::new);
                    }
                    let row = &mut self.rows[mi];
                    if row.len() <= ni {
                        row.resize_with(ni + 1, || None);
                    }
                    row[ni] = Some(cdf);
                }
                k
            }
        };
        Ok(k)
    }
}

fn draw(cdf: &[f64], u: f64) -> u64 {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u64
}

thread_local! {
    static CACHE: RefCell<FockCache> = RefCell::new(FockCache::new(f64::NAN));
}

/// Runs `f` with this thread's cache for transmittance `eta`.
///
/// The cache only memoises deterministic distributions, so reusing it across
/// calls and trials cannot change any draw.
fn with_cache<T>(eta: f64, f: impl FnOnce(&mut FockCache) -> T) -> T {
    CACHE.with(|cell| {
        let mut cache = cell.borrow_mut();
        if cache.eta.to_bits() != eta.to_bits() {
            *cache = FockCache::new(eta);
        }
        f(&mut cache)
    })
}

/// Samples detected counts of one fringe model at one phase.
#[derive(Debug, Clone, Copy)]
pub struct ShotSampler {
    signal: PhotonSampler,
    noise: PhotonSampler,
}

impl ShotSampler {
    /// Interferometer output with mean `n_φ/η` and the model's statistics,
    /// noise mode with mean `n_n/(1 − η)`, mixed on the noise beam splitter.
    pub fn new(model: &FringeModel, phi: f64) -> Result<Self> {
        model.validate()?;
        let moments = model.detector_moments(phi).ok_or_else(|| {
            Error::invalid(
                "noise_mean",
                "eta = 1 admits no noise photons at the detector",
            )
        })?;
        Ok(ShotSampler {
            signal: PhotonSampler::new(model.signal_stats, moments.signal_mean)?,
            noise: PhotonSampler::new(model.noise_stats, moments.noise_mean)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, cache: &mut FockCache) -> Result<u64> {
        let m = self.signal.sample(rng);
        let n = self.noise.sample(rng);
        cache.sample(m, n, rng)
    }

    /// Mean of `shots` draws.
    pub fn average<R: Rng + ?Sized>(
        &self,
        shots: usize,
        rng: &mut R,
        cache: &mut FockCache,
    ) -> Result<f64> {
        let mut total = 0u64;
        for _ in 0..shots {
            total += self.sample(rng, cache)?;
        }
        Ok(total as f64 / shots as f64)
    }
}

/// Raw counts of a simulated measurement, `counts[setting][shot]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub seed: u64,
    pub settings: Vec<f64>,
    pub shots_per_setting: usize,
    pub counts: Vec<Vec<u64>>,
}

impl MeasurementRecord {
    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.settings.len()
            || self
                .counts
                .iter()
                .any(|row| row.len() != self.shots_per_setting)
        {
            return Err(Error::Consistency(
                "record dimensions do not match settings x shots".into(),
            ));
        }
        Ok(())
    }

    /// Mean count per setting.
    pub fn setting_means(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|row| row.iter().sum::<u64>() as f64 / row.len().max(1) as f64)
            .collect()
    }
}

/// Simulates `shots` detections at each phase in `settings`.
///
/// Setting `j` uses stream `j` of `seed`.
pub fn simulate_detected_counts(
    model: &FringeModel,
    settings: &[f64],
    shots: usize,
    seed: u64,
) -> Result<MeasurementRecord> {
    let samplers = settings
        .iter()
        .map(|&phi| ShotSampler::new(model, phi))
        .collect::<Result<Vec<_>>>()?;
    let counts = samplers
        .par_iter()
        .enumerate()
        .map(|(j, sampler)| {
            let mut rng = trial_rng(seed, j as u64);
            with_cache(model.eta, |cache| {
                (0..shots)
                    .map(|_| sampler.sample(&mut rng, cache))
                    .collect::<Result<Vec<_>>>()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementRecord {
        seed,
        settings: settings.to_vec(),
        shots_per_setting: shots,
        counts,
    })
}

/// Outcome of a Monte-Carlo estimator experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Statistics of the wrapped estimation error `φ̂ − φ`.
    pub estimate: EmpiricalEstimate,
    /// Linear-propagation prediction for the estimator variance.
    pub predicted: f64,
    /// `variance/predicted − 1`.
    pub relative_error: f64,
    pub trials: usize,
    /// Trials where the estimator was undefined.
    pub failures: usize,
    /// Trials whose fringe inversion needed clamping.
    pub clamped: usize,
}

impl McReport {
    fn new(
        errors: Vec<f64>,
        predicted: f64,
        trials: usize,
        failures: usize,
        clamped: usize,
    ) -> Result<Self> {
        let estimate = EmpiricalEstimate::from_samples(&errors)?;
        Ok(McReport {
            estimate,
            predicted,
            relative_error: estimate.variance / predicted - 1.0,
            trials,
            failures,
            clamped,
        })
    }

    pub fn within_tolerance(&self) -> bool {
        self.relative_error.abs() <= MC_TOLERANCE
    }
}

fn check_run(shots: usize, trials: usize, predicted: f64) -> Result<()> {
    if shots == 0 {
        return Err(Error::invalid(
            "shots",
            "need at least one shot per setting",
        ));
    }
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least two trials"));
    }
    if predicted.is_nan() || predicted.sqrt() > LINEARITY_GATE {
        return Err(Error::RegimeViolation(format!(
            "predicted phase deviation {:.4} rad exceeds the {LINEARITY_GATE} rad linearity gate; raise the shots per setting",
            predicted.sqrt()
        )));
    }
    Ok(())
}

/// Repeats the distillation measurement `trials` times at phase `true_phase`.
///
/// Each trial averages `shots` detections per setting. The prediction is the
/// per-setting propagated sum divided by `shots`; it equals the closed form
/// for `M >= 5`. Tunable-phase jitter is not simulated.
pub fn mc_distillation(
    model: &FringeModel,
    plan: &ScanPlan,
    true_phase: f64,
    shots: usize,
    trials: usize,
    seed: u64,
) -> Result<McReport> {
    let predicted =
        distillation_uncertainty_sum(model, plan, true_phase)?.propagated / shots as f64;
    check_run(shots, trials, predicted)?;
    let samplers = plan
        .thetas()
        .into_iter()
        .map(|theta| ShotSampler::new(model, true_phase + theta))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; samplers.len()],
            |counts, t| -> Result<Option<f64>> {
                let mut rng = trial_rng(seed, t as u64);
                with_cache(model.eta, |cache| {
                    for (c, s) in counts.iter_mut().zip(&samplers) {
                        *c = s.average(shots, &mut rng, cache)?;
                    }
                    Ok::<_, Error>(())
                })?;
                match distill_phase(counts, plan) {
                    Ok(est) => Ok(Some(wrap_phase(est - true_phase))),
                    Err(Error::NoFringeInformation) => Ok(None),
                    Err(e) => Err(e),
                }
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = trials - errors.len();
    if failures as f64 > MAX_FAILURE_RATE * trials as f64 {
        return Err(Error::RegimeViolation(format!(
            "distillation undefined in {failures} of {trials} trials"
        )));
    }
    McReport::new(errors, predicted, trials, failures, 0)
}

/// Repeats the single-setting measurement at probe phase `phi`, inverting
/// the fringe with the known `𝒜`, `𝒞` and `n_n`.
pub fn mc_working_point(
    model: &FringeModel,
    phi: f64,
    shots: usize,
    trials: usize,
    seed: u64,
) -> Result<McReport> {
    let predicted = single_point_uncertainty(model, phi)? / shots as f64;
    check_run(shots, trials, predicted)?;
    let sampler = ShotSampler::new(model, phi)?;
    let target = wrap_phase(phi);
    let branch = target.signum();
    let ac = model.amplitude * model.contrast;
    let offset = model.noise_mean + model.amplitude;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, bool)> {
            let mut rng = trial_rng(seed, t as u64);
            let mean = with_cache(model.eta, |cache| sampler.average(shots, &mut rng, cache))?;
            let arg = (offset - mean) / ac;
            let clamped = arg.abs() > 1.0;
            let est = branch * arg.clamp(-1.0, 1.0).acos();
            Ok((wrap_phase(est - target), clamped))
        })
        .collect::<Result<Vec<_>>>()?;
    let clamped = outcomes.iter().filter(|o| o.1).count();
    if clamped as f64 > MAX_CLAMP_RATE * trials as f64 {
        return Err(Error::RegimeViolation(format!(
            "fringe inversion clamped in {clamped} of {trials} trials"
        )));
    }
    let errors: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    McReport::new(errors, predicted, trials, 0, clamped)
}
