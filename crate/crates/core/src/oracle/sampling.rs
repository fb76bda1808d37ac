//! Photon-number samplers for Poissonian and thermal light.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{nonnegative, Error, Result};
use crate::fringe::PhotonStatistics;

/// Sampler for one photon-number distribution, built once and reused.
#[derive(Debug, Clone, Copy)]
pub enum PhotonSampler {
    /// Mean zero: always 0.
    Vacuum,
    Poisson(Poisson<f64>),
    /// Geometric law `P(n) = n̄ⁿ/(1+n̄)^{n+1}`, stored as `1/ln q` with
    /// `q = n̄/(1 + n̄)`.
    Thermal {
        inv_ln_q: f64,
    },
}

impl PhotonSampler {
    pub fn new(stats: PhotonStatistics, mean: f64) -> Result<Self> {
        nonnegative("mean", mean)?;
        if mean == 0.0 {
            return Ok(PhotonSampler::Vacuum);
        }
        Ok(match stats {
            PhotonStatistics::Poissonian => PhotonSampler::Poisson(
                Poisson::new(mean).map_err(|e| Error::invalid("mean", e.to_string()))?,
            ),
            PhotonStatistics::Thermal => PhotonSampler::Thermal {
                // ln q = −ln(1 + 1/n̄), accurate for large n̄.
                inv_ln_q: -1.0 / (1.0 / mean).ln_1p(),
            },
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            PhotonSampler::Vacuum => 0,
            PhotonSampler::Poisson(p) => p.sample(rng) as u64,
            PhotonSampler::Thermal { inv_ln_q } => {
                // Inverse CDF: P(K ≥ k) = q^k, with u uniform on (0, 1].
                let u: f64 = rng.random();
                let ln_u = (-u).ln_1p();
                (ln_u * inv_ln_q).floor() as u64
            }
        }
    }
}

/// Draws one photon number with the given statistics and mean.
pub fn sample_photon_number<R: Rng + ?Sized>(
    stats: PhotonStatistics,
    mean: f64,
    rng: &mut R,
) -> Result<u64> {
    Ok(PhotonSampler::new(stats, mean)?.sample(rng))
}
