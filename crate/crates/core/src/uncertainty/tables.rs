//! Closed forms specialised to no noise, perfect contrast and the
//! spontaneous regime, written out as they appear in the literature for
//! cross-checking the general expressions.

use serde::{Deserialize, Serialize};

use super::{ScanPlan, MIN_DISTILLATION_STEPS};
use crate::error::{Error, Result};
use crate::fringe::{InterferometerSpec, NoiseChannel};

/// Largest `n0` accepted in the spontaneous regime without a warning.
pub const SPONTANEOUS_N0_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No noise photons and full transmission.
    NoNoise,
    /// Balanced setups (`𝒞 = 1`) with arbitrary noise.
    PerfectContrast,
    /// Balanced setups at `n0 ≪ 1` with noise `n_n = (1 − η)n0`.
    Spontaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableValues {
    /// `Δφ_0²`, only tabulated for perfect contrast.
    pub intrinsic: Option<f64>,
    /// `Δφ_N²`; absent for `M < 3`.
    pub distillation: Option<f64>,
    /// `Δφ_WP²`
    pub working_point: f64,
}

fn mismatch(regime: Regime, what: &str) -> Error {
    Error::RegimeMismatch(format!("{regime:?} regime requires {what}"))
}

/// Evaluates the specialised expressions for `regime`.
pub fn table_formula(
    spec: &InterferometerSpec,
    regime: Regime,
    plan: &ScanPlan,
    noise: &NoiseChannel,
) -> Result<TableValues> {
    spec.validate()?;
    plan.validate()?;
    noise.validate()?;
    let m = plan.steps() as f64;
    let distill = plan.steps() >= MIN_DISTILLATION_STEPS;
    let eta = noise.eta;
    let n_n = noise.detected_noise();

    match regime {
        Regime::NoNoise => {
            if eta != 1.0 || noise.mean_noise != 0.0 {
                return Err(mismatch(regime, "eta = 1 and no noise photons"));
            }
            match *spec {
                InterferometerSpec::Mzi { n0, t1, t2 } => {
                    let gamma = t1 * t2 + (1.0 - t1) * (1.0 - t2);
                    let c2 = if t1 + t2 == 1.0 {
                        1.0
                    } else {
                        4.0 * t1 * t2 * (1.0 - t1) * (1.0 - t2) / (gamma * gamma)
                    };
                    check_nonzero(gamma * n0, c2)?;
                    Ok(TableValues {
                        intrinsic: None,
                        distillation: distill.then(|| 2.0 / (m * c2 * gamma * n0)),
                        working_point: 1.0
                            / (2.0 * m * gamma * n0 * (1.0 - (1.0 - c2).max(0.0).sqrt())),
                    })
                }
                InterferometerSpec::Nli { n0, n0p } => {
                    let a = n0 + n0p + 2.0 * n0 * n0p;
                    let c2 = if n0 == n0p {
                        1.0
                    } else {
                        4.0 * n0 * n0p * (n0 + 1.0) * (n0p + 1.0) / (a * a)
                    };
                    check_nonzero(a, c2)?;
                    let inner = ((1.0 + a) / a).powi(2) - c2;
                    Ok(TableValues {
                        intrinsic: None,
                        distillation: distill
                            .then(|| 2.0 / (m * c2 * a) + (2.0 + c2 / 2.0) / (m * c2)),
                        working_point: 1.0 / (2.0 * m * c2)
                            * (1.0 / a + (1.0 - c2) + ((1.0 - c2) * inner).max(0.0).sqrt()),
                    })
                }
            }
        }
        Regime::PerfectContrast => {
            if !spec.is_balanced() {
                return Err(mismatch(regime, "T1 = T2 = 1/2 or n0 = n0'"));
            }
            let lambda_n = noise.stats.lambda();
            let s = n_n * (1.0 + lambda_n * n_n);
            match *spec {
                InterferometerSpec::Mzi { n0, .. } => {
                    let en = eta * n0;
                    check_nonzero(en, 1.0)?;
                    let d0 = (1.0 / en) * (1.0 + 2.0 * n_n + 2.0 * s / en);
                    Ok(TableValues {
                        intrinsic: Some(d0),
                        distillation: distill.then(|| 4.0 * d0 / m),
                        working_point: d0 / m
                            + 2.0 * s.sqrt() / (m * en * en) * (s + en * (1.0 + 2.0 * n_n)).sqrt(),
                    })
                }
                InterferometerSpec::Nli { n0, .. } => {
                    let b = eta * n0 * (1.0 + n0);
                    check_nonzero(b, 1.0)?;
                    let d0 = (1.0 / (4.0 * b)) * (1.0 + 2.0 * n_n + s / (2.0 * b));
                    Ok(TableValues {
                        intrinsic: Some(d0),
                        distillation: distill.then(|| 4.0 * d0 / m + 5.0 / (2.0 * m)),
                        working_point: d0 / m
                            + s.sqrt() / (8.0 * m * b * b)
                                * (s + 4.0 * b * (1.0 + 2.0 * n_n + 4.0 * b)).sqrt(),
                    })
                }
            }
        }
        Regime::Spontaneous => {
            if !spec.is_balanced() {
                return Err(mismatch(regime, "T1 = T2 = 1/2 or n0 = n0'"));
            }
            let n0 = spec.n0();
            if noise.mean_noise != n0 {
                return Err(mismatch(regime, "noise photons equal to n0"));
            }
            if n0 > SPONTANEOUS_N0_LIMIT {
                log::warn!(
                    "n0 = {n0} exceeds {SPONTANEOUS_N0_LIMIT}; spontaneous-regime forms are leading order only"
                );
            }
            check_nonzero(eta * n0, 1.0)?;
            let scale = m * eta * eta * n0;
            match spec {
                InterferometerSpec::Mzi { .. } => Ok(TableValues {
                    intrinsic: None,
                    distillation: distill.then(|| 4.0 * (2.0 - eta) / scale),
                    working_point: (2.0 + 2.0 * (1.0 - eta).sqrt() - eta) / scale,
                }),
                InterferometerSpec::Nli { .. } => Ok(TableValues {
                    intrinsic: None,
                    distillation: distill.then(|| (1.0 + eta) / (2.0 * scale)),
                    working_point: (1.0 + eta + ((1.0 - eta) * (1.0 + 3.0 * eta)).sqrt())
                        / (8.0 * scale),
                }),
            }
        }
    }
}

fn check_nonzero(amplitude: f64, c2: f64) -> Result<()> {
    if amplitude == 0.0 {
        return Err(Error::Degenerate("zero fringe amplitude".into()));
    }
    if c2 == 0.0 {
        return Err(Error::ZeroContrast);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fringe::{derive_fringe, PhotonStatistics};
    use crate::uncertainty::{
        distillation_uncertainty, intrinsic_uncertainty, wp_uncertainty_closed,
    };

    fn plan(m: usize) -> ScanPlan {
        ScanPlan::new(m, 0.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn general(spec: &InterferometerSpec, noise: &NoiseChannel, p: &ScanPlan) -> (f64, f64, f64) {
        let model = derive_fringe(spec, noise).unwrap();
        (
            intrinsic_uncertainty(&model).unwrap(),
            distillation_uncertainty(&model, p).unwrap(),
            wp_uncertainty_closed(&model, p).unwrap().variance,
        )
    }

    #[test]
    fn no_noise_tables_match_general_forms() {
        let p = plan(5);
        let noise = NoiseChannel::noiseless();
        for spec in [
            InterferometerSpec::balanced_mzi(100.0),
            InterferometerSpec::Mzi {
                n0: 37.0,
                t1: 0.3,
                t2: 0.6,
            },
            InterferometerSpec::Mzi {
                n0: 5.0,
                t1: 0.3,
                t2: 0.7,
            },
            InterferometerSpec::Nli { n0: 1.0, n0p: 2.0 },
            InterferometerSpec::Nli {
                n0: 0.02,
                n0p: 40.0,
            },
            InterferometerSpec::balanced_nli(3.0),
        ] {
            let t = table_formula(&spec, Regime::NoNoise, &p, &noise).unwrap();
            let (_, n, wp) = general(&spec, &noise, &p);
            assert!(rel(t.distillation.unwrap(), n) < 1e-12, "{spec:?}");
            assert!(rel(t.working_point, wp) < 1e-9, "{spec:?}");
        }
    }

    #[test]
    fn balanced_mzi_distillation_is_four_over_m_n0() {
        let t = table_formula(
            &InterferometerSpec::balanced_mzi(100.0),
            Regime::NoNoise,
            &plan(5),
            &NoiseChannel::noiseless(),
        )
        .unwrap();
        assert!(rel(t.distillation.unwrap(), 2.0 / (5.0 * 50.0)) < 1e-15);
    }

    #[test]
    fn perfect_contrast_tables_match_general_forms() {
        let p = plan(7);
        for stats in [PhotonStatistics::Poissonian, PhotonStatistics::Thermal] {
            for spec in [
                InterferometerSpec::balanced_mzi(12.0),
                InterferometerSpec::balanced_nli(0.4),
            ] {
                let noise = NoiseChannel::new(0.6, 3.0, stats).unwrap();
                let t = table_formula(&spec, Regime::PerfectContrast, &p, &noise).unwrap();
                let (d0, n, wp) = general(&spec, &noise, &p);
                assert!(rel(t.intrinsic.unwrap(), d0) < 1e-12);
                assert!(rel(t.distillation.unwrap(), n) < 1e-12);
                assert!(rel(t.working_point, wp) < 1e-9);
            }
        }
    }

    #[test]
    fn perfect_contrast_mzi_distillation_is_four_intrinsic_over_m() {
        let noise = NoiseChannel::new(0.8, 1.0, PhotonStatistics::Thermal).unwrap();
        let t = table_formula(
            &InterferometerSpec::balanced_mzi(5.0),
            Regime::PerfectContrast,
            &plan(6),
            &noise,
        )
        .unwrap();
        assert_eq!(t.distillation.unwrap(), 4.0 * t.intrinsic.unwrap() / 6.0);
    }

    #[test]
    fn spontaneous_limits_at_full_transmission() {
        let noise = NoiseChannel::new(1.0, 1e-3, PhotonStatistics::Thermal).unwrap();
        let p = plan(4);
        let mzi = table_formula(
            &InterferometerSpec::balanced_mzi(1e-3),
            Regime::Spontaneous,
            &p,
            &noise,
        )
        .unwrap();
        assert!(rel(mzi.working_point, 1.0 / (4.0 * 1e-3)) < 1e-15);
        let nli = table_formula(
            &InterferometerSpec::balanced_nli(1e-3),
            Regime::Spontaneous,
            &p,
            &noise,
        )
        .unwrap();
        assert!(rel(nli.distillation.unwrap(), 1.0 / (4.0 * 1e-3)) < 1e-15);
    }

    #[test]
    fn spontaneous_tables_converge_linearly_in_n0() {
        let p = plan(5);
        for eta in [0.3, 0.7, 0.95] {
            for stats in [PhotonStatistics::Poissonian, PhotonStatistics::Thermal] {
                for n0 in [1e-2, 1e-3, 1e-4] {
                    let noise = NoiseChannel::new(eta, n0, stats).unwrap();
                    for spec in [
                        InterferometerSpec::balanced_mzi(n0),
                        InterferometerSpec::balanced_nli(n0),
                    ] {
                        let t = table_formula(&spec, Regime::Spontaneous, &p, &noise).unwrap();
                        let (_, n, wp) = general(&spec, &noise, &p);
                        assert!((t.distillation.unwrap() / n - 1.0).abs() <= 10.0 * n0);
                        assert!((t.working_point / wp - 1.0).abs() <= 10.0 * n0);
                    }
                }
            }
        }
    }

    #[test]
    fn regime_mismatches_are_rejected() {
        let p = plan(5);
        let unbalanced = InterferometerSpec::Mzi {
            n0: 1e-3,
            t1: 0.4,
            t2: 0.5,
        };
        let noise = NoiseChannel::new(0.5, 1e-3, PhotonStatistics::Thermal).unwrap();
        for regime in [Regime::PerfectContrast, Regime::Spontaneous] {
            assert!(matches!(
                table_formula(&unbalanced, regime, &p, &noise),
                Err(Error::RegimeMismatch(_))
            ));
        }
        assert!(matches!(
            table_formula(
                &InterferometerSpec::balanced_mzi(1.0),
                Regime::NoNoise,
                &p,
                &noise
            ),
            Err(Error::RegimeMismatch(_))
        ));
        let wrong_noise = NoiseChannel::new(0.5, 2e-3, PhotonStatistics::Thermal).unwrap();
        assert!(matches!(
            table_formula(
                &InterferometerSpec::balanced_nli(1e-3),
                Regime::Spontaneous,
                &p,
                &wrong_noise
            ),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn short_plans_omit_distillation() {
        let t = table_formula(
            &InterferometerSpec::Nli { n0: 1.0, n0p: 2.0 },
            Regime::NoNoise,
            &plan(1),
            &NoiseChannel::noiseless(),
        )
        .unwrap();
        assert!(t.distillation.is_none());
        assert!(rel(t.working_point, 0.125) < 1e-12);
    }
}
