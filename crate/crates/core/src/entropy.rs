//! Classical and quantum entropy primitives.
//!
//! All entropies are in bits. Density matrices carry an ordered list of
//! subsystem dimensions; subsystem 0 is the most significant factor of the
//! tensor-product basis index.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Eigenvalues (and probabilities) below this are treated as exactly zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = 1e-9;
const PROB_SUM_TOL: f64 = 1e-9;
const DOMAIN_SLACK: f64 = 1e-12;

/// Exponent used for the coherent-state overlap `|<-a|a>| = exp(-c a^2)`.
///
/// `Paper` uses `c = 4`, which reproduces the published optimum
/// (`alpha = 0.338`, `0.0357 eta`). `Standard` uses the textbook `c = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapConvention {
    #[default]
    Paper,
    Standard,
}

impl OverlapConvention {
    pub fn exponent(self) -> f64 {
        match self {
            OverlapConvention::Paper => 4.0,
            OverlapConvention::Standard => 2.0,
        }
    }

    /// Magnitude of the overlap between `|alpha>` and `|-alpha>`.
    pub fn overlap(self, alpha: f64) -> f64 {
        (-self.exponent() * alpha * alpha).exp()
    }
}

impl fmt::Display for OverlapConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverlapConvention::Paper => f.write_str("paper"),
            OverlapConvention::Standard => f.write_str("standard"),
        }
    }
}

impl FromStr for OverlapConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(OverlapConvention::Paper),
            "standard" => Ok(OverlapConvention::Standard),
            other => Err(format!(
                "unknown overlap convention '{other}' (expected 'paper' or 'standard')"
            )),
        }
    }
}

/// A finite probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {w}, expected a finite non-negative value"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(ProbDist { weights })
    }

    /// Normalizes non-negative weights (e.g. histogram counts) to a distribution.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Empty("histogram has no counts"));
        }
        let total = total as f64;
        ProbDist::new(counts.iter().map(|&c| c as f64 / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(ProbDist {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::InvalidDistribution(format!(
                "point mass at {at} outside {n} outcomes"
            )));
        }
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Ok(ProbDist { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights.get(i).copied().unwrap_or(0.0)
    }

    /// Expectation of the outcome index.
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }

    /// Total-variation distance; the shorter distribution is zero-padded.
    pub fn total_variation(&self, other: &ProbDist) -> f64 {
        let n = self.len().max(other.len());
        0.5 * (0..n)
            .map(|i| (self.get(i) - other.get(i)).abs())
            .sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for ProbDist {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        ProbDist::new(weights)
    }
}

impl From<ProbDist> for Vec<f64> {
    fn from(p: ProbDist) -> Self {
        p.weights
    }
}

fn plogp(p: f64) -> f64 {
    if p <= EIGEN_FLOOR {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Binary Shannon entropy `h(x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_range("x", x, -DOMAIN_SLACK, 1.0 + DOMAIN_SLACK)?;
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

pub fn shannon_entropy(p: &ProbDist) -> f64 {
    p.weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum()
}

/// Entropy of a spectrum, flooring tiny or slightly negative eigenvalues to zero.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&l| plogp(l)).sum()
}

/// Entropy of the equal mixture of `|alpha>` and `|-alpha>`.
pub fn source_entropy(alpha: f64, convention: OverlapConvention) -> f64 {
    let x = 0.5 * (1.0 - convention.overlap(alpha));
    // x stays inside [0, 1/2] for any real alpha
    binary_entropy(x).unwrap_or(0.0)
}

/// A density operator on a tensor product of finite-dimensional subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::with_dims(matrix, dims)?;
        let dev = rho.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max deviation {dev:e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = rho.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    fn with_dims(matrix: DMatrix<Complex64>, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!(
                "subsystem dimensions {dims:?} must be non-empty and positive"
            )));
        }
        let total: usize = dims.iter().product();
        if total != matrix.nrows() {
            return Err(Error::InvalidState(format!(
                "dimensions {dims:?} multiply to {total}, matrix side is {}",
                matrix.nrows()
            )));
        }
        Ok(DensityMatrix { matrix, dims })
    }

    /// Projector onto a (normalized on entry) pure state vector.
    pub fn from_pure_state(amplitudes: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let n = amplitudes.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / (norm * norm)
        });
        Self::with_dims(matrix, dims)
    }

    /// Diagonal (classical) state with the given populations.
    pub fn from_diagonal(probabilities: &ProbDist, dims: Vec<usize>) -> Result<Self> {
        let n = probabilities.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(probabilities.get(i), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::with_dims(matrix, dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::from_diagonal(&ProbDist::uniform(n)?, dims)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `self ⊗ other`, with `other`'s subsystems appended after this one's.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            matrix: self.matrix.kronecker(&other.matrix),
            dims,
        }
    }

    /// Eigenvalues of the Hermitian part `(rho + rho†)/2`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym
            .try_symmetric_eigen(f64::EPSILON, 100_000)
            .ok_or_else(|| {
                Error::Numerical(format!(
                    "Hermitian eigendecomposition of a {0}x{0} matrix did not converge",
                    self.dim()
                ))
            })?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("eigendecomposition produced NaN".into()));
        }
        Ok(values)
    }

    /// Reduced state on `keep`, in the subsystems' original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let count = self.num_subsystems();
        if keep.is_empty() {
            return Err(Error::InvalidSelection(
                "at least one subsystem must be kept".into(),
            ));
        }
        if let Some(&index) = keep.iter().find(|&&k| k >= count) {
            return Err(Error::SubsystemIndex { index, count });
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() == count {
            return Ok(self.clone());
        }

        // Linear index = sum of digit * stride with subsystem 0 most significant.
        let mut strides = vec![1usize; count];
        for k in (0..count - 1).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        let traced: Vec<usize> = (0..count).filter(|k| !kept.contains(k)).collect();
        let kept_offsets = digit_offsets(&kept, &self.dims, &strides);
        let traced_offsets = digit_offsets(&traced, &self.dims, &strides);

        let n = kept_offsets.len();
        let reduced = DMatrix::from_fn(n, n, |r, c| {
            let (ro, co) = (kept_offsets[r], kept_offsets[c]);
            traced_offsets
                .iter()
                .map(|&t| self.matrix[(ro + t, co + t)])
                .sum()
        });
        let dims = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix {
            matrix: reduced,
            dims,
        })
    }
}

/// Offsets into the full index for every joint value of the given subsystems,
/// enumerated in their own row-major order.
fn digit_offsets(subsystems: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &k in subsystems {
        offsets = offsets
            .iter()
            .flat_map(|&base| (0..dims[k]).map(move |d| base + d * strides[k]))
            .collect();
    }
    offsets
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(spectrum_entropy(&rho.eigenvalues()?))
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// `S(rest | conditioning) = S(all) - S(conditioning)`. May be negative.
pub fn conditional_entropy(rho: &DensityMatrix, conditioning: &[usize]) -> Result<f64> {
    let count = rho.num_subsystems();
    if let Some(&index) = conditioning.iter().find(|&&k| k >= count) {
        return Err(Error::SubsystemIndex { index, count });
    }
    let mut set = conditioning.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() == count {
        return Err(Error::InvalidSelection(
            "conditioning set must be a proper subset of the subsystems".into(),
        ));
    }
    let joint = von_neumann_entropy(rho)?;
    if set.is_empty() {
        return Ok(joint);
    }
    Ok(joint - von_neumann_entropy(&rho.partial_trace(&set)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure_state(
            &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
            vec![2, 2],
        )
        .unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // mpmath, 30 digits: h(0.18335) = 0.687351012796409649...
        assert_close!(
            binary_entropy(0.18335).unwrap(),
            0.687_351_012_796_41,
            1e-12
        );
        // values within the slack are clamped
        assert_eq!(binary_entropy(-1e-13).unwrap(), 0.0);
        assert!(matches!(binary_entropy(1.1), Err(Error::OutOfRange { .. })));
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn shannon_entropy_values() {
        assert_close!(shannon_entropy(&ProbDist::uniform(4).unwrap()), 2.0, 1e-15);
        assert_eq!(shannon_entropy(&ProbDist::point_mass(3, 1).unwrap()), 0.0);
        assert_close!(
            shannon_entropy(&ProbDist::new(vec![0.5, 0.25, 0.25]).unwrap()),
            1.5,
            1e-15
        );
    }

    #[test]
    fn prob_dist_rejects_bad_weights() {
        assert!(ProbDist::new(vec![0.5, 0.6]).is_err());
        assert!(ProbDist::new(vec![1.5, -0.5]).is_err());
        assert!(ProbDist::new(vec![]).is_err());
        assert!(ProbDist::from_counts(&[0, 0]).is_err());
        assert_eq!(
            ProbDist::from_counts(&[1, 3]).unwrap().weights(),
            &[0.25, 0.75]
        );
    }

    #[test]
    fn von_neumann_basic_states() {
        assert_close!(von_neumann_entropy(&bell()).unwrap(), 0.0, 1e-12);
        let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert_close!(von_neumann_entropy(&mixed).unwrap(), 1.0, 1e-12);
        let diag =
            DensityMatrix::from_diagonal(&ProbDist::new(vec![0.6, 0.4]).unwrap(), vec![2]).unwrap();
        // mpmath: h(0.4) = 0.970950594454668...
        assert_close!(
            von_neumann_entropy(&diag).unwrap(),
            0.970_950_594_454_67,
            1e-12
        );
    }

    #[test]
    fn density_matrix_validation() {
        let not_hermitian =
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(not_hermitian, vec![2]).is_err());
        let bad_trace =
            DMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)]);
        assert!(DensityMatrix::new(bad_trace, vec![2]).is_err());
        let negative =
            DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityMatrix::new(negative, vec![2]).is_err());
        let ok =
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.2), c(0.0, -0.2), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(ok.clone(), vec![2]).is_ok());
        assert!(DensityMatrix::new(ok, vec![3]).is_err());
    }

    #[test]
    fn bell_state_marginals_and_conditional() {
        let rho = bell();
        for keep in [0, 1] {
            let red = rho.partial_trace(&[keep]).unwrap();
            let expected = DensityMatrix::maximally_mixed(vec![2]).unwrap();
            assert!((red.matrix() - expected.matrix()).norm() < 1e-15);
        }
        assert_close!(conditional_entropy(&rho, &[1]).unwrap(), -1.0, 1e-12);
        assert_close!(conditional_entropy(&rho, &[0]).unwrap(), -1.0, 1e-12);
    }

    #[test]
    fn product_state_trace_and_conditional() {
        let r = DensityMatrix::new(
            DMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.1), c(0.1, -0.1), c(0.3, 0.0)]),
            vec![2],
        )
        .unwrap();
        let s = DensityMatrix::from_diagonal(&ProbDist::new(vec![0.2, 0.3, 0.5]).unwrap(), vec![3])
            .unwrap();
        let joint = r.tensor(&s);
        assert_eq!(joint.dims(), &[2, 3]);
        let back = joint.partial_trace(&[0]).unwrap();
        assert!((back.matrix() - r.matrix()).norm() < 1e-15);
        let cond = conditional_entropy(&joint, &[1]).unwrap();
        assert_close!(cond, von_neumann_entropy(&r).unwrap(), 1e-12);
    }

    #[test]
    fn selection_errors() {
        let rho = bell();
        assert_eq!(
            rho.partial_trace(&[2]).unwrap_err(),
            Error::SubsystemIndex { index: 2, count: 2 }
        );
        assert!(rho.partial_trace(&[]).is_err());
        assert!(conditional_entropy(&rho, &[0, 1]).is_err());
        assert!(conditional_entropy(&rho, &[5]).is_err());
        // keeping everything, in any order, is the identity
        assert_eq!(rho.partial_trace(&[1, 0]).unwrap(), rho);
    }

    #[test]
    fn source_entropy_limits() {
        assert_eq!(source_entropy(0.0, OverlapConvention::Paper), 0.0);
        assert_close!(source_entropy(10.0, OverlapConvention::Paper), 1.0, 1e-9);
        // mpmath: h((1 - exp(-4 * 0.338^2)) / 2) = 0.687463565140858...
        assert_close!(
            source_entropy(0.338, OverlapConvention::Paper),
            0.6875,
            5e-4
        );
        assert_close!(
            source_entropy(0.338, OverlapConvention::Paper),
            0.687_463_565_140_86,
            1e-12
        );
        assert!(
            source_entropy(0.338, OverlapConvention::Standard)
                < source_entropy(0.338, OverlapConvention::Paper)
        );
    }

    #[test]
    fn convention_parsing() {
        assert_eq!(
            "paper".parse::<OverlapConvention>().unwrap(),
            OverlapConvention::Paper
        );
        assert_eq!(
            "Standard".parse::<OverlapConvention>().unwrap(),
            OverlapConvention::Standard
        );
        assert!("other".parse::<OverlapConvention>().is_err());
        assert_eq!(OverlapConvention::default(), OverlapConvention::Paper);
    }
}
