//! Lower bound on the secret-key rate.
//!
//! Eve's total information about a block is capped by the Holevo quantity
//! `N S(A)` of the source. Spreading that allowance over the click-count
//! classes in the least favourable way gives the constraint `K`, the
//! threshold `w0` up to which counts still yield key, and the block bound
//! `G >= sum_{w=1}^{w0} P(w) w - Delta`.

use serde::Serialize;

use crate::entropy::{source_entropy, OverlapConvention, ProbDist};
use crate::error::{check_range, Error, Result};
use crate::protocol::{exact_count_distribution, RunStatistics};

/// Relative slack when comparing a cumulative sum against `K`, so that a sum
/// equal to `K` up to rounding still counts as satisfying the constraint.
pub const W0_TIE_TOLERANCE: f64 = 1e-12;

/// `Delta` below `-DELTA_ERROR_THRESHOLD` means the estimated mutual
/// information exceeds what the click counts allow.
pub const DELTA_ERROR_THRESHOLD: f64 = 1e-6;

pub const ALPHA_SEARCH_MIN: f64 = 0.01;
pub const ALPHA_SEARCH_MAX: f64 = 1.5;
pub const ALPHA_GRID_STEP: f64 = 1e-3;
pub const ALPHA_TOLERANCE: f64 = 1e-5;

/// Distribution `P(w)` of Bob's click count per block, `w = 0..N-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CountDistribution {
    p: ProbDist,
}

impl CountDistribution {
    /// The distribution's length fixes the block length `N`.
    pub fn new(p: ProbDist) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::BlockTooShort(p.len()));
        }
        Ok(CountDistribution { p })
    }

    pub fn block_length(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self, w: usize) -> f64 {
        self.p.get(w)
    }

    pub fn probabilities(&self) -> &ProbDist {
        &self.p
    }

    /// `sum_w P(w) w`.
    pub fn mean(&self) -> f64 {
        self.p.mean()
    }
}

/// Where the count distribution of a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionSource {
    Exact,
    Empirical,
}

/// `K = (N-1)(1 - P(0)) - N S(A)`. Negative values are allowed.
pub fn compute_k(dist: &CountDistribution, s_a: f64) -> Result<f64> {
    check_range("s_a", s_a, 0.0, 1.0)?;
    let n = dist.block_length() as f64;
    Ok((n - 1.0) * (1.0 - dist.p(0)) - n * s_a)
}

/// Largest `w0` with `sum_{w=1}^{w0} P(w)(N-1) <= K`; zero when `K <= 0`.
pub fn solve_w0(dist: &CountDistribution, k: f64) -> usize {
    if k <= 0.0 {
        return 0;
    }
    let scale = (dist.block_length() - 1) as f64;
    let limit = k + W0_TIE_TOLERANCE * k.abs().max(1.0);
    let mut cumulative = 0.0;
    let mut w0 = 0;
    for w in 1..dist.block_length() {
        cumulative += dist.p(w) * scale;
        if cumulative > limit {
            break;
        }
        w0 = w;
    }
    w0
}

/// Raw block bound and its clamp at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateBound {
    pub raw: f64,
    pub clamped: f64,
}

/// `G >= sum_{w=1}^{w0} P(w) w - delta`.
pub fn key_rate_lower(dist: &CountDistribution, w0: usize, delta: f64) -> KeyRateBound {
    let upper = w0.min(dist.block_length() - 1);
    let credited: f64 = (1..=upper).map(|w| dist.p(w) * w as f64).sum();
    let raw = credited - delta;
    KeyRateBound {
        raw,
        clamped: raw.max(0.0),
    }
}

/// `Delta = sum_w P(w) w - I(U_A : U_B | Z)`, floored at zero.
pub fn compute_delta(i_ab: f64, dist: &CountDistribution) -> Result<f64> {
    check_range("i_ab", i_ab, 0.0, f64::INFINITY)?;
    let delta = dist.mean() - i_ab;
    if delta < -DELTA_ERROR_THRESHOLD {
        return Err(Error::InconsistentStatistics(format!(
            "mutual information {i_ab} exceeds the mean click count {}",
            dist.mean()
        )));
    }
    Ok(delta.max(0.0))
}

/// Per-pulse rate before the `eta` factor: `alpha^2 [1 - S(A)]`.
fn rate_shape(alpha: f64, convention: OverlapConvention) -> f64 {
    alpha * alpha * (1.0 - source_entropy(alpha, convention))
}

/// Large-block per-pulse rate `eta alpha^2 [1 - S(A)]`.
pub fn asymptotic_rate(alpha: f64, eta: f64, convention: OverlapConvention) -> Result<f64> {
    check_range("alpha", alpha, 0.0, f64::INFINITY)?;
    check_range("eta", eta, 0.0, 1.0)?;
    Ok(eta * rate_shape(alpha, convention))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaOptimum {
    pub alpha: f64,
    pub rate: f64,
    /// Best grid point before refinement.
    pub grid_alpha: f64,
}

/// Maximizes [`asymptotic_rate`] over `alpha`: a `1e-3` grid on
/// `[0.01, 1.5]` followed by golden-section refinement around the best
/// grid point.
pub fn optimize_alpha(eta: f64, convention: OverlapConvention) -> Result<AlphaOptimum> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange {
            what: "eta",
            value: eta,
            min: 0.0,
            max: 1.0,
        });
    }
    let f = |a: f64| rate_shape(a, convention);
    let steps = ((ALPHA_SEARCH_MAX - ALPHA_SEARCH_MIN) / ALPHA_GRID_STEP).round() as usize;
    let grid_alpha = (0..=steps)
        .map(|i| ALPHA_SEARCH_MIN + i as f64 * ALPHA_GRID_STEP)
        .map(|a| (a, f(a)))
        .fold((ALPHA_SEARCH_MIN, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
        .0;
    let lo = (grid_alpha - ALPHA_GRID_STEP).max(ALPHA_SEARCH_MIN);
    let hi = (grid_alpha + ALPHA_GRID_STEP).min(ALPHA_SEARCH_MAX);
    let alpha = golden_section_max(f, lo, hi, ALPHA_TOLERANCE);
    Ok(AlphaOptimum {
        alpha,
        rate: eta * f(alpha),
        grid_alpha,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Exact finite-block bound against its binomial large-block limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianLimit {
    pub n_pulses: usize,
    /// Per-slot click probability `1 - exp(-eta alpha^2)`.
    pub r: f64,
    pub s_a: f64,
    pub k_constraint: f64,
    pub w0: usize,
    /// Exact bound with `Delta = 0`, bits per block.
    pub finite_rate: f64,
    /// `(N-1) r [1 - S(A)]`, bits per block.
    pub limit_rate: f64,
    /// `|finite / limit - 1|`; `None` when the limit is zero.
    pub relative_gap: Option<f64>,
}

pub fn gaussian_limit(
    alpha: f64,
    eta: f64,
    n: usize,
    convention: OverlapConvention,
) -> Result<GaussianLimit> {
    check_range("alpha", alpha, 0.0, f64::INFINITY)?;
    check_range("eta", eta, 0.0, 1.0)?;
    let r = click_rate(alpha, eta);
    let dist = exact_count_distribution(n, r)?;
    let s_a = source_entropy(alpha, convention);
    let k = compute_k(&dist, s_a)?;
    let w0 = solve_w0(&dist, k);
    let finite_rate = key_rate_lower(&dist, w0, 0.0).raw;
    let limit_rate = (n - 1) as f64 * r * (1.0 - s_a);
    let relative_gap = (limit_rate > 0.0).then(|| (finite_rate / limit_rate - 1.0).abs());
    Ok(GaussianLimit {
        n_pulses: n,
        r,
        s_a,
        k_constraint: k,
        w0,
        finite_rate,
        limit_rate,
        relative_gap,
    })
}

/// Click probability of the correct detector in one slot.
pub fn click_rate(alpha: f64, eta: f64) -> f64 {
    -(-eta * alpha * alpha).exp_m1()
}

/// Inputs and outputs of one key-rate evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub n_pulses: usize,
    pub alpha: f64,
    pub eta: f64,
    pub overlap_convention: OverlapConvention,
    pub s_a: f64,
    pub k_constraint: f64,
    pub w0: usize,
    pub delta: f64,
    pub g_block_raw: f64,
    pub g_block: f64,
    pub g_pulse: f64,
    pub distribution_source: DistributionSource,
}

impl KeyRateReport {
    /// Runs the bound on a given count distribution.
    pub fn evaluate(
        dist: &CountDistribution,
        alpha: f64,
        eta: f64,
        convention: OverlapConvention,
        delta: f64,
        source: DistributionSource,
    ) -> Result<Self> {
        check_range("alpha", alpha, 0.0, f64::INFINITY)?;
        check_range("eta", eta, 0.0, 1.0)?;
        let n = dist.block_length();
        let s_a = source_entropy(alpha, convention);
        let k = compute_k(dist, s_a)?;
        let w0 = solve_w0(dist, k);
        let bound = key_rate_lower(dist, w0, delta);
        Ok(KeyRateReport {
            n_pulses: n,
            alpha,
            eta,
            overlap_convention: convention,
            s_a,
            k_constraint: k,
            w0,
            delta,
            g_block_raw: bound.raw,
            g_block: bound.clamped,
            g_pulse: bound.clamped / (n - 1) as f64,
            distribution_source: source,
        })
    }

    /// Bound for the exact binomial count distribution with `Delta = 0`.
    pub fn exact(n: usize, alpha: f64, eta: f64, convention: OverlapConvention) -> Result<Self> {
        check_range("alpha", alpha, 0.0, f64::INFINITY)?;
        check_range("eta", eta, 0.0, 1.0)?;
        let dist = exact_count_distribution(n, click_rate(alpha, eta))?;
        Self::evaluate(
            &dist,
            alpha,
            eta,
            convention,
            0.0,
            DistributionSource::Exact,
        )
    }

    /// Bound from estimated channel statistics, with `Delta` from the
    /// estimated mutual information.
    pub fn empirical(
        stats: &RunStatistics,
        alpha: f64,
        eta: f64,
        convention: OverlapConvention,
    ) -> Result<Self> {
        let delta = compute_delta(stats.i_ab, &stats.count_histogram)?;
        Self::evaluate(
            &stats.count_histogram,
            alpha,
            eta,
            convention,
            delta,
            DistributionSource::Empirical,
        )
    }
}
