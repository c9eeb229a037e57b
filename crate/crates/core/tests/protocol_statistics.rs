use std::collections::BTreeMap;

use dpsqkd_core::entropy::{shannon_entropy, ProbDist};
use dpsqkd_core::keyrate::click_rate;
use dpsqkd_core::protocol::{
    derive_l, estimate_statistics, exact_count_distribution, simulate_run,
};
use dpsqkd_core::{KeyRateReport, OverlapConvention};

/// Exact enumeration for N = 3 with uniform x: for every announcement z the
/// sifted difference bits are uniform, so H(L_z | Z = z) = w(z).
#[test]
fn sifted_entropy_equals_weight_by_enumeration() {
    let n = 3;
    let r = 0.37;
    for z_bits in 0..1u32 << (n - 1) {
        let positions: Vec<usize> = (0..n - 1).filter(|k| z_bits >> k & 1 == 1).collect();
        let mut lz_dist: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
        for x_bits in 0..1u32 << n {
            let x: Vec<bool> = (0..n).map(|i| x_bits >> i & 1 == 1).collect();
            let l = derive_l(&x).unwrap();
            // P(z | x) does not depend on x on the honest channel
            let p_z: f64 = (0..n - 1)
                .map(|k| if z_bits >> k & 1 == 1 { r } else { 1.0 - r })
                .product();
            let lz: Vec<bool> = positions.iter().map(|&k| l[k]).collect();
            *lz_dist.entry(lz).or_default() += p_z / (1u32 << n) as f64;
        }
        let total: f64 = lz_dist.values().sum();
        let cond = ProbDist::new(lz_dist.values().map(|p| p / total).collect()).unwrap();
        assert!((shannon_entropy(&cond) - positions.len() as f64).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_run_matches_binomial_model() {
    let (n, blocks) = (50, 100_000);
    let alpha = 0.05f64.sqrt();
    let run = simulate_run(n, blocks, alpha, 1.0, 2024).unwrap();
    let stats = estimate_statistics(&run, 0.1, 2024).unwrap();
    let exact = exact_count_distribution(n, click_rate(alpha, 1.0)).unwrap();

    assert_eq!(stats.ber, 0.0);
    assert_eq!(stats.published_errors, 0);
    let tv = stats
        .count_histogram
        .probabilities()
        .total_variation(exact.probabilities());
    assert!(tv <= 0.01, "total variation {tv}");
    assert!((stats.i_ab / exact.mean() - 1.0).abs() <= 0.01);
    assert!((stats.i_ab / stats.mean_w - 1.0).abs() <= 0.01);

    let empirical = KeyRateReport::empirical(&stats, alpha, 1.0, OverlapConvention::Paper).unwrap();
    let reference = KeyRateReport::exact(n, alpha, 1.0, OverlapConvention::Paper).unwrap();
    assert_eq!(empirical.w0, reference.w0);
    assert!((empirical.g_block / reference.g_block - 1.0).abs() <= 0.03);
}

#[test]
fn statistics_do_not_depend_on_thread_count() {
    let run = || {
        let blocks = simulate_run(20, 5_000, 0.4, 0.6, 42).unwrap();
        estimate_statistics(&blocks, 0.2, 42).unwrap()
    };
    let parallel = run();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(parallel, single);
    assert_eq!(parallel, many);
}
