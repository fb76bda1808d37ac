//! Photon-counting simulation used to validate the closed forms.
//!
//! Inputs are number-diagonal (phase-averaged) states, mixed on the noise
//! beam splitter through exact Fock-space output distributions.

pub mod fock;
mod monte_carlo;
pub mod sampling;

pub use fock::{bs_output_distribution, FockDistribution, DEFAULT_PHOTON_CAP};
pub use monte_carlo::{
    mc_distillation, mc_working_point, simulate_detected_counts, trial_rng, FockCache, McReport,
    MeasurementRecord, ShotSampler, LINEARITY_GATE, MAX_CLAMP_RATE, MAX_FAILURE_RATE, MC_TOLERANCE,
};
pub use sampling::{sample_photon_number, PhotonSampler};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sample mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub stderr_mean: f64,
    /// From the sample fourth central moment.
    pub stderr_variance: f64,
    pub samples: usize,
}

impl EmpiricalEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::invalid(
                "samples",
                format!("need at least 2, got {n}"),
            ));
        }
        let nf = n as f64;
        let mean = xs.iter().copied().collect::<NeumaierSum>().value() / nf;
        let m2 = xs
            .iter()
            .map(|x| (x - mean).powi(2))
            .collect::<NeumaierSum>()
            .value();
        let m4 = xs
            .iter()
            .map(|x| (x - mean).powi(4))
            .collect::<NeumaierSum>()
            .value();
        let variance = m2 / (nf - 1.0);
        let mu4 = m4 / nf;
        let var_of_var = (mu4 - (nf - 3.0) / (nf - 1.0) * variance * variance) / nf;
        Ok(EmpiricalEstimate {
            mean,
            variance,
            stderr_mean: (variance / nf).sqrt(),
            stderr_variance: var_of_var.max(0.0).sqrt(),
            samples: n,
        })
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let xs: Vec<f64> = counts.iter().map(|&k| k as f64).collect();
        Self::from_samples(&xs)
    }
}

/// Detected-count variance from the moments of two independent
/// number-diagonal beam-splitter inputs.
///
/// Expands `⟨b†b b†b⟩ − ⟨b†b⟩²` for `b = √η a_I + √(1−η) a_n` directly,
/// without the regrouping used by [`crate::detected_variance`].
pub fn appendix_variance(mean_i: f64, var_i: f64, mean_n: f64, var_n: f64, eta: f64) -> f64 {
    let second_i = var_i + mean_i * mean_i;
    let second_n = var_n + mean_n * mean_n;
    let t = 1.0 - eta;
    let mean = eta * mean_i + t * mean_n;
    eta * eta * second_i
        + t * t * second_n
        + 2.0 * eta * t * mean_i * mean_n
        + eta * t * (mean_i * (mean_n + 1.0) + mean_n * (mean_i + 1.0))
        - mean * mean
}
