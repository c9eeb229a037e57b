//! The classical side of the protocol: phase bits, difference bits, click
//! announcements, sifting and channel estimation.
//!
//! Bit vectors are `Vec<bool>`. Pulse `i` of the block (1-based in the
//! usual notation) lives at index `i - 1`. Difference bits exist for slots
//! `2..=N` only, so `l[k]` is `l_{k+2}`. Click positions are stored as
//! 0-based pulse indices and are therefore always `>= 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::entropy::{binary_entropy, ProbDist};
use crate::error::{check_range, Error, Result};
use crate::keyrate::CountDistribution;
use crate::optics::{click_probability, mz_transform, CoherentBlock};

/// Largest block length accepted by [`weight_invariance_check`].
pub const MAX_ENUMERATION_LENGTH: usize = 16;

/// Default fraction of sifted pairs published for the error-rate test.
pub const DEFAULT_PUBLISH_FRACTION: f64 = 0.1;

const PUBLISH_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// `l_i = x_i XOR x_{i-1}` for `i = 2..=N`.
pub fn derive_l(x: &[bool]) -> Result<Vec<bool>> {
    if x.len() < 2 {
        return Err(Error::BlockTooShort(x.len()));
    }
    Ok(x.windows(2).map(|w| w[0] ^ w[1]).collect())
}

/// Classical record of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    /// Alice's phase bits.
    pub x: Vec<bool>,
    /// Difference bits for slots `2..=N` (length `N - 1`).
    pub l: Vec<bool>,
    /// Bob's click announcement; `z[0]` is always false.
    pub z: Vec<bool>,
    /// Bob's detector outcomes, false wherever `z` is false.
    pub y: Vec<bool>,
    pub u_a: Vec<bool>,
    pub u_b: Vec<bool>,
    /// Indices where `z` is set, ascending.
    pub positions: Vec<usize>,
}

impl BlockRecord {
    /// Assembles a record from phase bits and Bob's outcomes, enforcing the
    /// record invariants.
    pub fn from_outcomes(x: Vec<bool>, mut z: Vec<bool>, mut y: Vec<bool>) -> Result<Self> {
        let l = derive_l(&x)?;
        let n = x.len();
        for v in [&z, &y] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        z[0] = false;
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi &= *zi;
        }
        let u_a = (0..n).map(|i| i > 0 && z[i] && l[i - 1]).collect();
        let u_b = y.clone();
        let positions = (0..n).filter(|&i| z[i]).collect();
        Ok(BlockRecord {
            x,
            l,
            z,
            y,
            u_a,
            u_b,
            positions,
        })
    }

    pub fn block_length(&self) -> usize {
        self.x.len()
    }

    /// Number of clicks `w(z)`.
    pub fn weight(&self) -> usize {
        self.positions.len()
    }
}

/// Sends `x` through the honest channel and Bob's interferometer.
///
/// Each detector of each slot fires independently with its threshold-click
/// probability; both uniforms are always drawn so the stream layout does not
/// depend on the outcomes. A double click yields a uniformly random `y`.
pub fn simulate_block<R: Rng + ?Sized>(
    x: &[bool],
    alpha: f64,
    eta: f64,
    rng: &mut R,
) -> Result<BlockRecord> {
    let block = CoherentBlock::honest(x, alpha, eta)?;
    let detectors = mz_transform(&block);
    let n = x.len();
    let mut z = vec![false; n];
    let mut y = vec![false; n];
    for (k, slot) in detectors.slots.iter().enumerate() {
        let click0 = rng.gen::<f64>() < click_probability(slot.delta0);
        let click1 = rng.gen::<f64>() < click_probability(slot.delta1);
        let i = k + 1;
        z[i] = click0 || click1;
        y[i] = match (click0, click1) {
            (true, true) => rng.gen(),
            (_, c1) => c1,
        };
    }
    BlockRecord::from_outcomes(x.to_vec(), z, y)
}

/// Random stream for block `index` under `seed`. Streams are independent of
/// the order in which blocks are processed.
pub fn block_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates `n_blocks` blocks with uniformly random phase bits, in parallel.
pub fn simulate_run(
    n_pulses: usize,
    n_blocks: usize,
    alpha: f64,
    eta: f64,
    seed: u64,
) -> Result<Vec<BlockRecord>> {
    if n_pulses < 2 {
        return Err(Error::BlockTooShort(n_pulses));
    }
    if n_blocks == 0 {
        return Err(Error::Empty("no blocks requested"));
    }
    check_range("alpha", alpha, 0.0, f64::INFINITY)?;
    check_range("eta", eta, 0.0, 1.0)?;
    (0..n_blocks as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let x: Vec<bool> = (0..n_pulses).map(|_| rng.gen()).collect();
            simulate_block(&x, alpha, eta, &mut rng)
        })
        .collect()
}

/// Sifted vectors `(l_z, y_z)`: the difference bits and Bob's outcomes at the
/// click positions.
pub fn sift(record: &BlockRecord) -> (Vec<bool>, Vec<bool>) {
    record
        .positions
        .iter()
        .map(|&i| (record.l[i - 1], record.y[i]))
        .unzip()
}

/// Channel statistics estimated from a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatistics {
    pub n_pulses: usize,
    pub n_blocks: usize,
    pub count_histogram: CountDistribution,
    pub published_pairs: u64,
    pub published_errors: u64,
    /// Error fraction on the published pairs (0 when nothing was published).
    pub ber: f64,
    /// Sifted pairs left for the key after publication.
    pub key_pairs: u64,
    /// Estimated `I(U_A : U_B | Z)` per block, in bits.
    pub i_ab: f64,
    pub mean_w: f64,
}

#[derive(Default)]
struct Tally {
    weights: Vec<u64>,
    ones: Vec<u64>,
    sifted: Vec<u64>,
    published: u64,
    errors: u64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            weights: vec![0; n],
            ones: vec![0; n],
            sifted: vec![0; n],
            published: 0,
            errors: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in [
            (&mut self.weights, &other.weights),
            (&mut self.ones, &other.ones),
            (&mut self.sifted, &other.sifted),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.published += other.published;
        self.errors += other.errors;
        self
    }
}

/// Estimates the channel statistics of a run.
///
/// Each sifted pair is published independently with probability
/// `publish_fraction`, drawn from a per-block stream of `seed`; the error
/// rate is measured on those. The mutual information is the plug-in estimate
/// of `sum_z P(z) [H(L_z | Z = z) - H(L_z | Y_z, Z = z)]`, taking the sifted
/// bits as independent with per-slot empirical marginals and the
/// conditional term as a binary symmetric channel at the measured error rate.
pub fn estimate_statistics(
    blocks: &[BlockRecord],
    publish_fraction: f64,
    seed: u64,
) -> Result<RunStatistics> {
    let first = blocks
        .first()
        .ok_or(Error::Empty("no blocks to estimate from"))?;
    let n = first.block_length();
    if !(publish_fraction > 0.0 && publish_fraction <= 1.0) {
        return Err(Error::OutOfRange {
            what: "publish_fraction",
            value: publish_fraction,
            min: 0.0,
            max: 1.0,
        });
    }
    if let Some(bad) = blocks.iter().find(|b| b.block_length() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.block_length(),
        });
    }

    let tally = blocks
        .par_iter()
        .enumerate()
        .fold(
            || Tally::new(n),
            |mut t, (b, record)| {
                t.weights[record.weight()] += 1;
                let mut rng = block_rng(seed ^ PUBLISH_SALT, b as u64);
                for &i in &record.positions {
                    let (l, y) = (record.l[i - 1], record.y[i]);
                    t.sifted[i] += 1;
                    t.ones[i] += u64::from(l);
                    if rng.gen::<f64>() < publish_fraction {
                        t.published += 1;
                        t.errors += u64::from(l != y);
                    }
                }
                t
            },
        )
        .reduce(|| Tally::new(n), Tally::merge);

    let n_blocks = blocks.len();
    let ber = if tally.published == 0 {
        0.0
    } else {
        tally.errors as f64 / tally.published as f64
    };
    let leak = binary_entropy(ber)?;
    let bits: f64 = tally
        .sifted
        .iter()
        .zip(&tally.ones)
        .filter(|(&s, _)| s > 0)
        .map(|(&s, &ones)| {
            let marginal = binary_entropy(ones as f64 / s as f64).unwrap_or(0.0);
            s as f64 * (marginal - leak).max(0.0)
        })
        .sum();
    let total_sifted: u64 = tally.sifted.iter().sum();
    let histogram = CountDistribution::new(ProbDist::from_counts(&tally.weights)?)?;
    Ok(RunStatistics {
        n_pulses: n,
        n_blocks,
        mean_w: total_sifted as f64 / n_blocks as f64,
        count_histogram: histogram,
        published_pairs: tally.published,
        published_errors: tally.errors,
        ber,
        key_pairs: total_sifted - tally.published,
        i_ab: bits / n_blocks as f64,
    })
}

/// Binomial count distribution `P(w) = C(N-1, w) r^w (1-r)^(N-1-w)`,
/// evaluated in log space and renormalized.
pub fn exact_count_distribution(n: usize, r: f64) -> Result<CountDistribution> {
    if n < 2 {
        return Err(Error::BlockTooShort(n));
    }
    check_range("r", r, 0.0, 1.0)?;
    let trials = (n - 1) as u64;
    let p = if r == 0.0 {
        ProbDist::point_mass(n, 0)?
    } else if r == 1.0 {
        ProbDist::point_mass(n, n - 1)?
    } else {
        let (ln_r, ln_q) = (r.ln(), (-r).ln_1p());
        let logs: Vec<f64> = (0..=trials)
            .map(|w| ln_binomial(trials, w) + w as f64 * ln_r + (trials - w) as f64 * ln_q)
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let unnormalized: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = unnormalized.iter().sum();
        ProbDist::new(unnormalized.into_iter().map(|v| v / total).collect())?
    };
    CountDistribution::new(p)
}

/// Exhaustively evaluates `P(z | x)` on the honest channel with per-slot
/// click probability `r` and returns the largest spread of `P(z | x)` over
/// announcements `z` (and phase patterns `x`) sharing the same weight.
///
/// All `2^N` phase patterns are used up to `N = 8`; longer blocks use a
/// fixed set of representative patterns.
pub fn weight_invariance_check(n: usize, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::BlockTooShort(n));
    }
    if n > MAX_ENUMERATION_LENGTH {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_LENGTH,
        });
    }
    check_range("r", r, 0.0, 1.0)?;
    // click probability 1 - exp(-alpha^2) = r at eta = 1
    let alpha = if r >= 1.0 {
        40.0
    } else {
        (-(-r).ln_1p()).sqrt()
    };

    let patterns: Vec<Vec<bool>> = if n <= 8 {
        (0..1u32 << n)
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
            .collect()
    } else {
        vec![
            vec![false; n],
            vec![true; n],
            (0..n).map(|i| i % 2 == 1).collect(),
            (0..n).map(|i| i % 4 >= 2).collect(),
            (0..n).map(|i| (i * i + 1) % 3 == 0).collect(),
        ]
    };

    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for x in &patterns {
        let block = CoherentBlock::honest(x, alpha, 1.0)?;
        let no_click: Vec<f64> = mz_transform(&block)
            .slots
            .iter()
            .map(|s| (1.0 - click_probability(s.delta0)) * (1.0 - click_probability(s.delta1)))
            .collect();
        for z in 0..1u32 << (n - 1) {
            let prob: f64 = no_click
                .iter()
                .enumerate()
                .map(|(k, &q)| if z >> k & 1 == 1 { 1.0 - q } else { q })
                .product();
            let w = z.count_ones() as usize;
            lo[w] = lo[w].min(prob);
            hi[w] = hi[w].max(prob);
        }
    }
    Ok(lo
        .iter()
        .zip(&hi)
        .filter(|(l, _)| l.is_finite())
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max))
}
