use qimd_core::oracle::{
    appendix_variance, mc_distillation, mc_working_point, simulate_detected_counts,
    EmpiricalEstimate,
};
use qimd_core::uncertainty::distillation_uncertainty;
use qimd_core::{
    derive_fringe, detected_variance, fringe_mean, FringeModel, InterferometerSpec, NoiseChannel,
    PhotonStatistics, ScanPlan,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nli_distillation_with_thermal_noise() {
    let n0 = 5.0;
    let eta = 0.8;
    let spec = InterferometerSpec::balanced_nli(n0);
    let noise = NoiseChannel::new(eta, n0, PhotonStatistics::Thermal).unwrap();
    let model = derive_fringe(&spec, &noise).unwrap();
    assert!((model.noise_mean - (1.0 - eta) * n0).abs() < 1e-12);
    let plan = ScanPlan::new(8, 0.0).unwrap();
    let report = mc_distillation(&model, &plan, -1.3, 1000, 10_000, 4242).unwrap();
    let closed = distillation_uncertainty(&model, &plan).unwrap() / 1000.0;
    assert!((report.predicted - closed).abs() < 1e-12 * closed);
    assert!(report.within_tolerance(), "{report:?}");
}

#[test]
fn detected_moments_over_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let stats = [PhotonStatistics::Poissonian, PhotonStatistics::Thermal];
    for case in 0..24u64 {
        let eta = rng.random_range(0.2..0.95);
        let model = FringeModel::new(
            rng.random_range(0.5..20.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..5.0),
            eta,
            stats[rng.random_range(0..2)],
            stats[rng.random_range(0..2)],
        )
        .unwrap();
        let phi = rng.random_range(-3.0..3.0);
        let record = simulate_detected_counts(&model, &[phi], 40_000, case).unwrap();
        let e = EmpiricalEstimate::from_counts(&record.counts[0]).unwrap();
        let mean = fringe_mean(&model, phi);
        let var = detected_variance(&model, phi);
        // Four standard errors over 48 comparisons keeps false alarms rare.
        assert!(
            (e.mean - mean).abs() < 4.0 * e.stderr_mean,
            "case {case}: {e:?} vs {mean}"
        );
        assert!(
            (e.variance - var).abs() < 4.0 * e.stderr_variance,
            "case {case}: {e:?} vs {var}"
        );

        let mean_i = model.signal_mean(phi) / eta;
        let noise_in = model.noise_mean / (1.0 - eta);
        let appendix = appendix_variance(
            mean_i,
            model.signal_stats.variance(mean_i),
            noise_in,
            model.noise_stats.variance(noise_in),
            eta,
        );
        assert!((appendix - var).abs() <= 1e-12 * var.max(1e-300));
    }
}

#[test]
fn noiseless_means_give_exact_phase() {
    let model = FringeModel::new(
        30.0,
        0.8,
        2.0,
        0.5,
        PhotonStatistics::Thermal,
        PhotonStatistics::Thermal,
    )
    .unwrap();
    let plan = ScanPlan::new(6, 0.0).unwrap();
    let phi = 2.9;
    let means: Vec<f64> = plan
        .thetas()
        .iter()
        .map(|t| fringe_mean(&model, phi + t))
        .collect();
    let est = qimd_core::uncertainty::distill_phase(&means, &plan).unwrap();
    assert!((est - phi).abs() < 1e-13);
    // Inverting the exact mean returns the probe phase.
    let arg = (model.noise_mean + model.amplitude - fringe_mean(&model, 1.2))
        / (model.amplitude * model.contrast);
    assert!((arg.acos() - 1.2).abs() < 1e-13);
}

#[test]
fn working_point_runs_are_reproducible() {
    let model = FringeModel::new(
        40.0,
        1.0,
        0.5,
        0.5,
        PhotonStatistics::Poissonian,
        PhotonStatistics::Thermal,
    )
    .unwrap();
    let a = mc_working_point(&model, 1.0, 50, 500, 9).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let b = pool
        .install(|| mc_working_point(&model, 1.0, 50, 500, 9))
        .unwrap();
    assert_eq!(a, b);
}
