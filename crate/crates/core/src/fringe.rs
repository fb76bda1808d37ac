//! Interferometer configurations and the noisy-fringe model.
//!
//! Both interferometer types reduce to a detected signal
//! `N(φ) = n_n + n_φ` with `n_φ = 𝒜(1 − 𝒞 cos φ)`, where the amplitude `𝒜`
//! already includes the transmittance `η` of the beam splitter that mixes the
//! interferometer output with an incoherent noise mode.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, unit_interval, Error, Result};

/// Covariance between detected signal and detected noise.
///
/// Signal and noise come from independent sources, so this stays zero. It is
/// kept in [`variance_from_moments`] so a correlated-noise model only has to
/// change this value.
pub const SIGNAL_NOISE_COVARIANCE: f64 = 0.0;

/// Photon-number statistics of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonStatistics {
    /// Coherent light, `Δn² = n`.
    Poissonian,
    /// Squeezed vacuum / chaotic light, `Δn² = n(n + 1)`.
    Thermal,
}

impl PhotonStatistics {
    /// 0 for Poissonian, 1 for thermal.
    pub fn lambda(self) -> f64 {
        match self {
            PhotonStatistics::Poissonian => 0.0,
            PhotonStatistics::Thermal => 1.0,
        }
    }

    /// Variance `n(1 + λn)` of a mode with mean photon number `mean`.
    pub fn variance(self, mean: f64) -> f64 {
        mean * (1.0 + self.lambda() * mean)
    }
}

/// Variance of a mode with the given statistics and mean photon number.
pub fn statistics_variance(stats: PhotonStatistics, mean: f64) -> f64 {
    stats.variance(mean)
}

/// Physical interferometer configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InterferometerSpec {
    /// Mach-Zehnder interferometer probed by a laser of `n0` photons, with beam
    /// splitter transmittances `t1` and `t2`.
    Mzi { n0: f64, t1: f64, t2: f64 },
    /// Unseeded SU(1,1) interferometer with squeezer gains `n0` and `n0p`.
    Nli { n0: f64, n0p: f64 },
}

impl InterferometerSpec {
    /// MZI with two balanced beam splitters.
    pub fn balanced_mzi(n0: f64) -> Self {
        InterferometerSpec::Mzi {
            n0,
            t1: 0.5,
            t2: 0.5,
        }
    }

    /// NLI with equal gains in both squeezers.
    pub fn balanced_nli(n0: f64) -> Self {
        InterferometerSpec::Nli { n0, n0p: n0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InterferometerSpec::Mzi { n0, t1, t2 } => {
                nonnegative("n0", n0)?;
                unit_interval("t1", t1)?;
                unit_interval("t2", t2)?;
            }
            InterferometerSpec::Nli { n0, n0p } => {
                nonnegative("n0", n0)?;
                nonnegative("n0p", n0p)?;
            }
        }
        Ok(())
    }

    /// Photon statistics at the interferometer output.
    pub fn output_statistics(&self) -> PhotonStatistics {
        match self {
            InterferometerSpec::Mzi { .. } => PhotonStatistics::Poissonian,
            InterferometerSpec::Nli { .. } => PhotonStatistics::Thermal,
        }
    }

    /// Per-arm photon number `n0`.
    pub fn n0(&self) -> f64 {
        match *self {
            InterferometerSpec::Mzi { n0, .. } | InterferometerSpec::Nli { n0, .. } => n0,
        }
    }

    /// Shot-noise reference `Δφ² = 1/n0`.
    pub fn shot_noise_reference(&self) -> f64 {
        1.0 / self.n0()
    }

    /// Balanced beam splitters (`T1 = T2 = 1/2`) or equal gains.
    pub fn is_balanced(&self) -> bool {
        match *self {
            InterferometerSpec::Mzi { t1, t2, .. } => t1 == 0.5 && t2 == 0.5,
            InterferometerSpec::Nli { n0, n0p } => n0 == n0p,
        }
    }
}

/// Beam splitter that incoherently mixes the interferometer output with noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseChannel {
    /// Transmittance for the interferometer output.
    pub eta: f64,
    /// Mean photon number `⟨n̂⟩` of the noise mode before the beam splitter.
    pub mean_noise: f64,
    pub stats: PhotonStatistics,
}

impl NoiseChannel {
    pub fn new(eta: f64, mean_noise: f64, stats: PhotonStatistics) -> Result<Self> {
        let channel = NoiseChannel {
            eta,
            mean_noise,
            stats,
        };
        channel.validate()?;
        Ok(channel)
    }

    /// Identity channel: everything transmitted, no noise.
    pub fn noiseless() -> Self {
        NoiseChannel {
            eta: 1.0,
            mean_noise: 0.0,
            stats: PhotonStatistics::Thermal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        unit_interval("eta", self.eta)?;
        nonnegative("mean_noise", self.mean_noise)?;
        Ok(())
    }

    /// Detected noise `n_n = (1 − η)⟨n̂⟩`.
    pub fn detected_noise(&self) -> f64 {
        (1.0 - self.eta) * self.mean_noise
    }
}

impl Default for NoiseChannel {
    fn default() -> Self {
        NoiseChannel::noiseless()
    }
}

/// Reduced description of a noisy fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeModel {
    /// Amplitude `𝒜` (includes `η`).
    pub amplitude: f64,
    /// Contrast `𝒞 ∈ [0, 1]`.
    pub contrast: f64,
    /// Detected noise `n_n`.
    pub noise_mean: f64,
    /// Transmittance of the noise beam splitter.
    pub eta: f64,
    /// Statistics of the interferometer output (`λ_φ`).
    pub signal_stats: PhotonStatistics,
    /// Statistics of the noise mode (`λ_n`).
    pub noise_stats: PhotonStatistics,
}

impl FringeModel {
    pub fn new(
        amplitude: f64,
        contrast: f64,
        noise_mean: f64,
        eta: f64,
        signal_stats: PhotonStatistics,
        noise_stats: PhotonStatistics,
    ) -> Result<Self> {
        let model = FringeModel {
            amplitude,
            contrast,
            noise_mean,
            eta,
            signal_stats,
            noise_stats,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("amplitude", self.amplitude)?;
        if self.amplitude == 0.0 {
            return Err(Error::Degenerate("zero fringe amplitude".into()));
        }
        unit_interval("contrast", self.contrast)?;
        nonnegative("noise_mean", self.noise_mean)?;
        unit_interval("eta", self.eta)?;
        Ok(())
    }

    /// Like [`validate`](Self::validate), and additionally rejects `𝒞 = 0`.
    pub fn validate_for_phase(&self) -> Result<()> {
        self.validate()?;
        if self.contrast == 0.0 {
            return Err(Error::ZeroContrast);
        }
        Ok(())
    }

    pub fn lambda_phi(&self) -> f64 {
        self.signal_stats.lambda()
    }

    pub fn lambda_n(&self) -> f64 {
        self.noise_stats.lambda()
    }

    /// Noise-to-signal ratio `ξ = n_n / 𝒜`.
    pub fn xi(&self) -> f64 {
        self.noise_mean / self.amplitude
    }

    /// Detected interferometer fraction `n_φ = 𝒜(1 − 𝒞 cos φ)`.
    ///
    /// Evaluated as `𝒜[(1 − 𝒞) + 2𝒞 sin²(φ/2)]`, which keeps full relative
    /// precision near the dark fringe.
    pub fn signal_mean(&self, phi: f64) -> f64 {
        let half = (0.5 * phi).sin();
        self.amplitude * ((1.0 - self.contrast) + 2.0 * self.contrast * half * half)
    }

    /// Slope `∂N/∂φ = 𝒜𝒞 sin φ`.
    pub fn slope(&self, phi: f64) -> f64 {
        self.amplitude * self.contrast * phi.sin()
    }

    /// Beam-splitter input moments reproducing this model at phase `phi`.
    ///
    /// Returns `None` when `η = 1` but `n_n > 0`, which no physical noise mode
    /// can produce.
    pub fn detector_moments(&self, phi: f64) -> Option<DetectorMoments> {
        let n_phi = self.signal_mean(phi);
        let signal_mean = n_phi / self.eta;
        let noise_mean = if self.eta < 1.0 {
            self.noise_mean / (1.0 - self.eta)
        } else if self.noise_mean == 0.0 {
            0.0
        } else {
            return None;
        };
        Some(DetectorMoments {
            eta: self.eta,
            signal_mean,
            signal_second_moment: self.signal_stats.variance(signal_mean)
                + signal_mean * signal_mean,
            noise_mean,
            noise_second_moment: self.noise_stats.variance(noise_mean) + noise_mean * noise_mean,
            covariance: SIGNAL_NOISE_COVARIANCE,
        })
    }
}

/// Moments of the two modes entering the noise beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorMoments {
    pub eta: f64,
    /// `⟨n̂_I⟩`
    pub signal_mean: f64,
    /// `⟨n̂_I²⟩`
    pub signal_second_moment: f64,
    /// `⟨n̂⟩`
    pub noise_mean: f64,
    /// `⟨n̂²⟩`
    pub noise_second_moment: f64,
    /// `cov(n_φ, n_n)`
    pub covariance: f64,
}

/// Detected variance from the input moments, term by term:
/// `Δn_φ² + Δn_n² + 2n_φn_n + (1 − η)n_φ + ηn_n + 4 cov`.
pub fn variance_from_moments(m: &DetectorMoments) -> f64 {
    let eta = m.eta;
    let n_phi = eta * m.signal_mean;
    let n_n = (1.0 - eta) * m.noise_mean;
    let var_phi = eta * eta * m.signal_second_moment - n_phi * n_phi;
    let var_n = (1.0 - eta) * (1.0 - eta) * m.noise_second_moment - n_n * n_n;
    var_phi + var_n + 2.0 * n_phi * n_n + (1.0 - eta) * n_phi + eta * n_n + 4.0 * m.covariance
}

/// Reduces a physical configuration and noise channel to a [`FringeModel`].
///
/// A zero-contrast result (e.g. `T1 ∈ {0, 1}`) is returned with a warning;
/// the phase-uncertainty operations reject it.
pub fn derive_fringe(spec: &InterferometerSpec, noise: &NoiseChannel) -> Result<FringeModel> {
    spec.validate()?;
    noise.validate()?;
    let eta = noise.eta;
    let (amplitude, contrast) = match *spec {
        InterferometerSpec::Mzi { n0, t1, t2 } => {
            let gamma = t1 * t2 + (1.0 - t1) * (1.0 - t2);
            let amplitude = eta * gamma * n0;
            if amplitude == 0.0 {
                return Err(Error::Degenerate(format!(
                    "MZI amplitude vanishes (eta = {eta}, gamma = {gamma}, n0 = {n0})"
                )));
            }
            // Unit contrast whenever T1T2 = (1 − T1)(1 − T2), i.e. T1 + T2 = 1.
            let contrast = if t1 + t2 == 1.0 {
                1.0
            } else {
                (2.0 * (t1 * t2 * (1.0 - t1) * (1.0 - t2)).sqrt() / gamma).min(1.0)
            };
            (amplitude, contrast)
        }
        InterferometerSpec::Nli { n0, n0p } => {
            let amplitude = eta * (n0 + n0p + 2.0 * n0 * n0p);
            if amplitude == 0.0 {
                return Err(Error::Degenerate(format!(
                    "NLI amplitude vanishes (eta = {eta}, n0 = {n0}, n0p = {n0p})"
                )));
            }
            // Equal gains give unit contrast exactly; the general expression
            // can land one ulp below.
            let contrast = if spec.is_balanced() {
                1.0
            } else {
                let root = (n0 * n0p * (n0 + 1.0) * (n0p + 1.0)).sqrt();
                (2.0 * eta * root / amplitude).min(1.0)
            };
            (amplitude, contrast)
        }
    };
    if contrast == 0.0 {
        log::warn!("configuration has zero contrast; phase estimation is impossible");
    }
    Ok(FringeModel {
        amplitude,
        contrast,
        noise_mean: noise.detected_noise(),
        eta,
        signal_stats: spec.output_statistics(),
        noise_stats: noise.stats,
    })
}

/// Mean detected counts `N(φ) = n_n + 𝒜(1 − 𝒞 cos φ)`.
pub fn fringe_mean(model: &FringeModel, phi: f64) -> f64 {
    model.noise_mean + model.signal_mean(phi)
}

/// Variance of the detected counts,
/// `ΔN² = n_φ(1 + λ_φn_φ) + n_n(1 + λ_nn_n) + 2n_φn_n`.
pub fn detected_variance(model: &FringeModel, phi: f64) -> f64 {
    let n_phi = model.signal_mean(phi);
    let n_n = model.noise_mean;
    model.signal_stats.variance(n_phi) + model.noise_stats.variance(n_n) + 2.0 * n_phi * n_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use PhotonStatistics::{Poissonian, Thermal};

    fn model(amplitude: f64, contrast: f64, noise: f64, sig: PhotonStatistics) -> FringeModel {
        FringeModel::new(amplitude, contrast, noise, 0.5, sig, Poissonian).unwrap()
    }

    #[test]
    fn balanced_mzi_has_unit_contrast() {
        let m = derive_fringe(
            &InterferometerSpec::balanced_mzi(4.0),
            &NoiseChannel::noiseless(),
        )
        .unwrap();
        assert_eq!(m.amplitude, 2.0);
        assert_eq!(m.contrast, 1.0);
        assert_eq!(m.noise_mean, 0.0);
        assert_eq!(m.signal_stats, Poissonian);
    }

    #[test]
    fn equal_gain_nli() {
        let noise = NoiseChannel::new(0.5, 0.0, Thermal).unwrap();
        let m = derive_fringe(&InterferometerSpec::balanced_nli(1.0), &noise).unwrap();
        assert_eq!(m.amplitude, 2.0);
        assert_eq!(m.contrast, 1.0);
        assert_eq!(m.signal_stats, Thermal);
    }

    #[test]
    fn unequal_gain_nli_contrast() {
        // 𝒞² = 4·12/49 exactly.
        for eta in [0.1, 0.5, 1.0] {
            let noise = NoiseChannel::new(eta, 0.0, Thermal).unwrap();
            let m = derive_fringe(&InterferometerSpec::Nli { n0: 1.0, n0p: 2.0 }, &noise).unwrap();
            assert!((m.contrast - 4.0 * 3f64.sqrt() / 7.0).abs() < 1e-15);
            assert!((m.contrast * m.contrast - 48.0 / 49.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_amplitude_is_degenerate() {
        let noise = NoiseChannel::noiseless();
        assert!(matches!(
            derive_fringe(&InterferometerSpec::balanced_mzi(0.0), &noise),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            derive_fringe(
                &InterferometerSpec::Mzi {
                    n0: 3.0,
                    t1: 1.0,
                    t2: 0.0
                },
                &noise
            ),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            derive_fringe(&InterferometerSpec::Nli { n0: 0.0, n0p: 0.0 }, &noise),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn zero_contrast_is_accepted_but_rejected_for_phase_work() {
        let m = derive_fringe(
            &InterferometerSpec::Mzi {
                n0: 3.0,
                t1: 1.0,
                t2: 0.3,
            },
            &NoiseChannel::noiseless(),
        )
        .unwrap();
        assert_eq!(m.contrast, 0.0);
        assert_eq!(m.validate_for_phase(), Err(Error::ZeroContrast));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let noise = NoiseChannel::noiseless();
        for spec in [
            InterferometerSpec::Mzi {
                n0: 1.0,
                t1: 1.5,
                t2: 0.5,
            },
            InterferometerSpec::Mzi {
                n0: -1.0,
                t1: 0.5,
                t2: 0.5,
            },
            InterferometerSpec::Nli {
                n0: f64::NAN,
                n0p: 1.0,
            },
        ] {
            assert!(matches!(
                derive_fringe(&spec, &noise),
                Err(Error::InvalidParameter { .. })
            ));
        }
        assert!(NoiseChannel::new(1.1, 0.0, Thermal).is_err());
        assert!(NoiseChannel::new(0.5, -1.0, Thermal).is_err());
    }

    #[test]
    fn fringe_mean_examples() {
        let dark = model(1.0, 1.0, 0.0, Poissonian);
        assert_eq!(fringe_mean(&dark, 0.0), 0.0);
        assert!((fringe_mean(&dark, PI) - 2.0).abs() < 1e-15);
        let m = model(2.0, 0.5, 1.0, Poissonian);
        assert!((fringe_mean(&m, PI / 2.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn statistics_variance_examples() {
        assert_eq!(statistics_variance(Poissonian, 3.0), 3.0);
        assert_eq!(statistics_variance(Thermal, 3.0), 12.0);
        assert_eq!(statistics_variance(Poissonian, 0.0), 0.0);
        assert_eq!(statistics_variance(Thermal, 0.0), 0.0);
    }

    /// Model with n_φ = 2 at φ = π/2 and n_n = 1, built from η = 0.5,
    /// ⟨n_I⟩ = 4, ⟨n̂⟩ = 2.
    fn seven_twelve(stats: PhotonStatistics) -> FringeModel {
        FringeModel::new(2.0, 1.0, 1.0, 0.5, stats, stats).unwrap()
    }

    #[test]
    fn detected_variance_examples() {
        let phi = PI / 2.0;
        for (stats, expected) in [(Poissonian, 7.0), (Thermal, 12.0)] {
            let m = seven_twelve(stats);
            assert!((m.signal_mean(phi) - 2.0).abs() < 1e-15);
            assert!((detected_variance(&m, phi) - expected).abs() < 1e-13);
            let moments = m.detector_moments(phi).unwrap();
            assert!((moments.signal_mean - 4.0).abs() < 1e-14);
            assert!((moments.noise_mean - 2.0).abs() < 1e-14);
            assert!((variance_from_moments(&moments) - expected).abs() < 1e-13);
        }
        let shot = model(3.7, 0.8, 0.0, Poissonian);
        assert!((detected_variance(&shot, 1.1) - shot.signal_mean(1.1)).abs() < 1e-15);
    }

    #[test]
    fn detector_moments_need_a_physical_noise_mode() {
        let m = FringeModel::new(2.0, 1.0, 1.0, 1.0, Poissonian, Poissonian).unwrap();
        assert!(m.detector_moments(0.3).is_none());
    }

    fn stats_strategy() -> impl Strategy<Value = PhotonStatistics> {
        prop_oneof![Just(Poissonian), Just(Thermal)]
    }

    proptest! {
        #[test]
        fn term_by_term_variance_matches_reduced_form(
            amplitude in 1e-3f64..1e4,
            contrast in 0.0f64..=1.0,
            noise in 0.0f64..1e3,
            eta in 0.01f64..0.99,
            phi in -10.0f64..10.0,
            sig in stats_strategy(),
            nst in stats_strategy(),
        ) {
            let m = FringeModel::new(amplitude, contrast, noise, eta, sig, nst).unwrap();
            let reduced = detected_variance(&m, phi);
            let full = variance_from_moments(&m.detector_moments(phi).unwrap());
            prop_assert!((full - reduced).abs() <= 1e-12 * reduced.abs().max(1e-300) + 1e-300,
                "reduced {reduced} vs term-by-term {full}");
        }

        #[test]
        fn fringe_symmetry(
            amplitude in 1e-3f64..1e4,
            contrast in 0.0f64..=1.0,
            noise in 0.0f64..1e3,
            phi in -10.0f64..10.0,
        ) {
            let m = model(amplitude, contrast, noise, Poissonian);
            let sum = fringe_mean(&m, phi) + fringe_mean(&m, phi + PI);
            let expected = 2.0 * (noise + amplitude);
            prop_assert!((sum - expected).abs() <= 1e-12 * expected);
        }

        #[test]
        fn excess_variance_identity(
            amplitude in 1e-3f64..1e3,
            contrast in 0.0f64..=1.0,
            noise in 0.0f64..1e3,
            phi in -10.0f64..10.0,
            sig in stats_strategy(),
            nst in stats_strategy(),
        ) {
            let m = FringeModel::new(amplitude, contrast, noise, 0.5, sig, nst).unwrap();
            let n_phi = m.signal_mean(phi);
            let excess = detected_variance(&m, phi) - fringe_mean(&m, phi);
            let expected = sig.lambda() * n_phi * n_phi + nst.lambda() * noise * noise
                + 2.0 * n_phi * noise;
            prop_assert!(excess >= -1e-12 * detected_variance(&m, phi));
            prop_assert!((excess - expected).abs() <= 1e-10 * detected_variance(&m, phi).max(1.0));
        }

        #[test]
        fn contrast_bounded_and_nli_contrast_eta_free(
            n0 in 1e-4f64..1e4,
            n0p in 1e-4f64..1e4,
            t1 in 0.0f64..=1.0,
            t2 in 0.0f64..=1.0,
            eta in 0.01f64..=1.0,
        ) {
            let noise = NoiseChannel::new(eta, 0.0, Thermal).unwrap();
            let unit = NoiseChannel::noiseless();
            let nli = InterferometerSpec::Nli { n0, n0p };
            let c = derive_fringe(&nli, &noise).unwrap().contrast;
            let c1 = derive_fringe(&nli, &unit).unwrap().contrast;
            prop_assert!(c <= 1.0);
            prop_assert!((c - c1).abs() <= 1e-14);
            if let Ok(m) = derive_fringe(&InterferometerSpec::Mzi { n0, t1, t2 }, &noise) {
                prop_assert!(m.contrast <= 1.0 && m.contrast >= 0.0);
            }
        }
    }

    #[test]
    fn unit_contrast_only_when_balanced() {
        let noise = NoiseChannel::noiseless();
        for (t1, t2) in [
            (0.5, 0.5),
            (0.4, 0.5),
            (0.5, 0.6),
            (0.3, 0.3),
            (0.3, 0.7),
            (0.25, 0.75),
        ] {
            let c = derive_fringe(&InterferometerSpec::Mzi { n0: 10.0, t1, t2 }, &noise)
                .unwrap()
                .contrast;
            assert_eq!(c == 1.0, t1 + t2 == 1.0, "t1={t1} t2={t2} c={c}");
            let general = 2.0 * (t1 * t2 * (1.0 - t1) * (1.0 - t2)).sqrt()
                / (t1 * t2 + (1.0 - t1) * (1.0 - t2));
            assert!((c - general).abs() < 1e-15);
        }
        for (a, b) in [(1.0, 1.0), (1.0, 1.001), (3.0, 7.0), (0.01, 0.01)] {
            let c = derive_fringe(&InterferometerSpec::Nli { n0: a, n0p: b }, &noise)
                .unwrap()
                .contrast;
            assert_eq!(c == 1.0, a == b, "n0={a} n0p={b} c={c}");
        }
    }
}
