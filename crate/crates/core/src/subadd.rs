//! Randomized verification of super-subadditivity of conditional entropy:
//!
//! ```text
//! sum over m-subsets {i_1..i_m} of S(A_i1 .. A_im | E)  >=  C(n-1, m-1) S(A_1 .. A_n | E)
//! ```
//!
//! States are drawn by tracing an ancilla out of a random pure state. A
//! one-dimensional ancilla gives pure, typically entangled states on which
//! conditional entropies go negative.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{conditional_entropy, DensityMatrix};
use crate::error::{Error, Result};
use crate::protocol::block_rng;

/// Largest joint dimension (system, environment and ancilla) of a random state.
pub const DIMENSION_BUDGET: usize = 4096;

/// A trial passes when `lhs - rhs` is at least `-SLACK_TOLERANCE`.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// Ancilla dimensions cycled through by [`verify_theorem`].
pub const ANCILLA_CYCLE: [usize; 4] = [1, 2, 4, 16];

/// Draws a mixed state on `dims ⊗ e_dim` as the marginal of a random pure
/// state on `dims ⊗ e_dim ⊗ ancilla_dim`.
pub fn random_joint_state<R: Rng + ?Sized>(
    dims: &[usize],
    e_dim: usize,
    ancilla_dim: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let system: usize = dims.iter().product::<usize>() * e_dim;
    let total = system.saturating_mul(ancilla_dim);
    if total > DIMENSION_BUDGET {
        return Err(Error::DimensionBudget {
            dim: total,
            budget: DIMENSION_BUDGET,
        });
    }
    if total == 0 {
        return Err(Error::InvalidState("zero-dimensional subsystem".into()));
    }
    let psi: Vec<Complex64> = (0..total)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm_sqr: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let matrix = nalgebra::DMatrix::from_fn(system, system, |i, j| {
        (0..ancilla_dim)
            .map(|a| psi[i * ancilla_dim + a] * psi[j * ancilla_dim + a].conj())
            .sum::<Complex64>()
            / norm_sqr
    });
    let mut all = dims.to_vec();
    all.push(e_dim);
    DensityMatrix::new(matrix, all)
}

/// All `m`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            extend(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= n {
        extend(0, n, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

fn check_layout(rho: &DensityMatrix, n: usize, m: usize) -> Result<()> {
    if rho.num_subsystems() != n + 1 {
        return Err(Error::InvalidSelection(format!(
            "expected {} subsystems (n = {n} plus E), found {}",
            n + 1,
            rho.num_subsystems()
        )));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidSelection(format!(
            "selection size m = {m} must satisfy 1 <= m <= n = {n}"
        )));
    }
    Ok(())
}

/// Left side: sum of `S(A_subset | E)` over all `m`-subsets. `E` is the last
/// subsystem of `rho`.
pub fn theorem_lhs(rho: &DensityMatrix, n: usize, m: usize) -> Result<f64> {
    check_layout(rho, n, m)?;
    subsets(n, m)
        .into_iter()
        .map(|mut subset| {
            subset.push(n);
            let reduced = rho.partial_trace(&subset)?;
            conditional_entropy(&reduced, &[m])
        })
        .sum()
}

/// Right side: `C(n-1, m-1) S(A_1 .. A_n | E)`.
pub fn theorem_rhs(rho: &DensityMatrix, n: usize, m: usize) -> Result<f64> {
    check_layout(rho, n, m)?;
    Ok(binomial(n as u64 - 1, m as u64 - 1) as f64 * conditional_entropy(rho, &[n])?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubaddTrial {
    pub n: usize,
    pub m: usize,
    pub dims: Vec<usize>,
    pub e_dim: usize,
    pub ancilla_dim: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubaddVerification {
    pub n: usize,
    pub m: usize,
    pub min_slack: f64,
    pub passed: bool,
    pub trials: Vec<SubaddTrial>,
}

/// Checks the inequality on `trials` random states. Trial `t` uses stream `t`
/// of `seed` and ancilla dimension `ANCILLA_CYCLE[t % 4]`.
pub fn verify_theorem(
    n: usize,
    m: usize,
    trials: usize,
    dims: &[usize],
    e_dim: usize,
    seed: u64,
) -> Result<SubaddVerification> {
    if trials == 0 {
        return Err(Error::Empty("trial count is zero"));
    }
    if dims.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: dims.len(),
        });
    }
    if m == 0 || m > n {
        return Err(Error::InvalidSelection(format!(
            "selection size m = {m} must satisfy 1 <= m <= n = {n}"
        )));
    }
    let largest = dims.iter().product::<usize>() * e_dim * ANCILLA_CYCLE[ANCILLA_CYCLE.len() - 1];
    if largest > DIMENSION_BUDGET {
        return Err(Error::DimensionBudget {
            dim: largest,
            budget: DIMENSION_BUDGET,
        });
    }

    let log = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = block_rng(seed, t as u64);
            let ancilla_dim = ANCILLA_CYCLE[t % ANCILLA_CYCLE.len()];
            let rho = random_joint_state(dims, e_dim, ancilla_dim, &mut rng)?;
            let lhs = theorem_lhs(&rho, n, m)?;
            let rhs = theorem_rhs(&rho, n, m)?;
            Ok(SubaddTrial {
                n,
                m,
                dims: dims.to_vec(),
                e_dim,
                ancilla_dim,
                lhs,
                rhs,
                slack: lhs - rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_slack = log.iter().map(|t| t.slack).fold(f64::INFINITY, f64::min);
    Ok(SubaddVerification {
        n,
        m,
        min_slack,
        passed: min_slack >= -SLACK_TOLERANCE,
        trials: log,
    })
}

/// Binomial coefficient by the multiplicative formula; exact for `n <= 120`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (1..=k as u128).fold(1u128, |acc, i| acc * (n as u128 - k as u128 + i) / i)
}

/// `C(n-1, m-1) = m C(n, m) / n`, checked exactly in integers.
pub fn coefficient_identity(n: u64, m: u64) -> bool {
    if m == 0 || m > n {
        return false;
    }
    let scaled = m as u128 * binomial(n, m);
    scaled.is_multiple_of(n as u128) && scaled / n as u128 == binomial(n - 1, m - 1)
}
