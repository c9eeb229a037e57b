//! Differential-phase-shift quantum key distribution in the noiseless,
//! lossy-channel setting.
//!
//! The crate is organized bottom-up:
//!
//! * [`entropy`]: Shannon and von Neumann entropies, partial traces,
//!   conditional entropies and the source entropy of the binary
//!   phase-modulated coherent state.
//! * [`optics`]: coherent pulse blocks, the delay-line Mach-Zehnder
//!   interferometer and ideal threshold detection.
//! * [`protocol`]: the classical bit pipeline (phase bits, difference bits,
//!   click announcements, sifting), Monte Carlo runs and channel estimation.
//! * [`keyrate`]: the block key-rate lower bound, its binomial large-block
//!   limit and the per-pulse optimum over the pulse amplitude.
//! * [`subadd`]: randomized checks of the conditional-entropy
//!   super-subadditivity inequality used by the security argument.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{a} vs {b} (tolerance {tol})");
    }};
}

pub mod entropy;
pub mod error;
pub mod keyrate;
pub mod optics;
pub mod protocol;
pub mod subadd;

pub use entropy::{
    binary_entropy, conditional_entropy, partial_trace, shannon_entropy, source_entropy,
    von_neumann_entropy, DensityMatrix, OverlapConvention, ProbDist,
};
pub use error::{Error, Result};
pub use keyrate::{
    asymptotic_rate, compute_delta, compute_k, gaussian_limit, key_rate_lower, optimize_alpha,
    solve_w0, AlphaOptimum, CountDistribution, DistributionSource, GaussianLimit, KeyRateBound,
    KeyRateReport,
};
pub use optics::{
    click_probability, coefficient_matrix, mz_transform, wrong_detector_amplitude, CoherentBlock,
    DetectorAmplitudes,
};
pub use protocol::{
    derive_l, estimate_statistics, exact_count_distribution, sift, simulate_block, simulate_run,
    weight_invariance_check, BlockRecord, RunStatistics,
};
pub use subadd::{
    coefficient_identity, random_joint_state, theorem_lhs, verify_theorem, SubaddTrial,
    SubaddVerification,
};
