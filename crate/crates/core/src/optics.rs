//! Coherent pulse blocks, the lossy channel and Bob's one-bit-delay
//! Mach-Zehnder interferometer with two ideal threshold detectors.
//!
//! Inputs are coherent states, so every output mode is again coherent and
//! click statistics follow directly from the output amplitudes. The vacuum
//! ports of the interferometer only enter through [`coefficient_matrix`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The `N` received coherent amplitudes of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentBlock {
    amplitudes: Vec<Complex64>,
    eta: f64,
}

impl CoherentBlock {
    /// Wraps already-attenuated amplitudes. `eta` is recorded, not applied.
    pub fn new(amplitudes: Vec<Complex64>, eta: f64) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::BlockTooShort(amplitudes.len()));
        }
        check_range("eta", eta, 0.0, 1.0)?;
        Ok(CoherentBlock { amplitudes, eta })
    }

    /// Alice's block `⊗|(-1)^(x_i+1) alpha>` after a pure-loss channel of
    /// transmission `eta`.
    pub fn honest(x: &[bool], alpha: f64, eta: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, f64::INFINITY)?;
        check_range("eta", eta, 0.0, 1.0)?;
        let magnitude = eta.sqrt() * alpha;
        let amplitudes = x
            .iter()
            .map(|&bit| Complex64::new(if bit { magnitude } else { -magnitude }, 0.0))
            .collect();
        Self::new(amplitudes, eta)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Amplitudes arriving at the two detectors for one interference slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotAmplitudes {
    /// Detector for phase difference 0 (`l_i = 0`).
    pub delta0: Complex64,
    /// Detector for phase difference pi (`l_i = 1`).
    pub delta1: Complex64,
}

impl SlotAmplitudes {
    pub fn for_bit(&self, bit: bool) -> Complex64 {
        if bit {
            self.delta1
        } else {
            self.delta0
        }
    }
}

/// Interferometer output for a block: one entry per slot `i = 2..=N`
/// (index 0 is slot 2) plus the two unpaired halves of the first and last
/// pulse, which never reach a detector inside the block.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorAmplitudes {
    pub slots: Vec<SlotAmplitudes>,
    pub undetected: [Complex64; 2],
}

impl DetectorAmplitudes {
    pub fn energy(&self) -> f64 {
        self.slots
            .iter()
            .map(|s| s.delta0.norm_sqr() + s.delta1.norm_sqr())
            .sum::<f64>()
            + self.undetected.iter().map(|u| u.norm_sqr()).sum::<f64>()
    }
}

pub fn mz_transform(block: &CoherentBlock) -> DetectorAmplitudes {
    let a = block.amplitudes();
    let slots = a
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0], w[1]);
            SlotAmplitudes {
                delta0: I * (cur + prev) * 0.5,
                delta1: (cur - prev) * 0.5,
            }
        })
        .collect();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    DetectorAmplitudes {
        slots,
        undetected: [a[0] * half, I * a[a.len() - 1] * half],
    }
}

/// Mode transformation of the interferometer for a block of `n` pulses.
///
/// Columns are the input modes `a_1..a_n` followed by the vacuum-port modes
/// `b_1..b_n`. Rows `2(i-2)` and `2(i-2)+1` are `d_i^0` and `d_i^1` for
/// `i = 2..=n`; the last two rows are the unpaired outputs of pulse 1 and
/// pulse `n`.
pub fn coefficient_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n < 2 {
        return Err(Error::BlockTooShort(n));
    }
    let half = Complex64::new(0.5, 0.0);
    let ihalf = I * 0.5;
    let a = |k: usize| k;
    let b = |k: usize| n + k;
    let mut m = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for k in 1..n {
        let (row0, row1) = (2 * (k - 1), 2 * (k - 1) + 1);
        // d^0 = i/2 (a_k + a_{k-1}) + 1/2 (b_{k-1} - b_k)
        m[(row0, a(k))] = ihalf;
        m[(row0, a(k - 1))] = ihalf;
        m[(row0, b(k - 1))] = half;
        m[(row0, b(k))] = -half;
        // d^1 = 1/2 (a_k - a_{k-1}) + i/2 (b_k + b_{k-1})
        m[(row1, a(k))] = half;
        m[(row1, a(k - 1))] = -half;
        m[(row1, b(k))] = ihalf;
        m[(row1, b(k - 1))] = ihalf;
    }
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let first = 2 * n - 2;
    m[(first, a(0))] = s;
    m[(first, b(0))] = I * s;
    let last = 2 * n - 1;
    m[(last, a(n - 1))] = I * s;
    m[(last, b(n - 1))] = s;
    Ok(m)
}

/// Probability that an ideal threshold detector fires on a coherent mode.
pub fn click_probability(delta: Complex64) -> f64 {
    -(-delta.norm_sqr()).exp_m1()
}

/// Amplitude at the detector opposite to `l_i` for each slot. `l` holds the
/// difference bits for slots `2..=N`.
pub fn wrong_detector_amplitude(block: &CoherentBlock, l: &[bool]) -> Result<Vec<Complex64>> {
    if l.len() + 1 != block.len() {
        return Err(Error::LengthMismatch {
            expected: block.len() - 1,
            found: l.len(),
        });
    }
    Ok(mz_transform(block)
        .slots
        .iter()
        .zip(l)
        .map(|(slot, &bit)| slot.for_bit(!bit))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::derive_l;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_phases_go_to_d0() {
        let a = c(0.3, 0.1);
        let out = mz_transform(&CoherentBlock::new(vec![a, a, a], 1.0).unwrap());
        for slot in &out.slots {
            assert_eq!(slot.delta1, ZERO);
            assert_close!(slot.delta0.norm(), a.norm(), 1e-15);
        }
    }

    #[test]
    fn opposite_phases_go_to_d1() {
        let a = c(0.7, 0.0);
        let out = mz_transform(&CoherentBlock::new(vec![a, -a], 1.0).unwrap());
        assert_close!(out.slots[0].delta1.norm(), a.norm(), 1e-15);
        assert_eq!(out.slots[0].delta0, ZERO);
    }

    #[test]
    fn energy_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let amps: Vec<_> = (0..4)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let block = CoherentBlock::new(amps, 1.0).unwrap();
            // direct summation oracle
            let input: f64 = block
                .amplitudes()
                .iter()
                .map(|a| a.re * a.re + a.im * a.im)
                .sum();
            assert_close!(mz_transform(&block).energy(), input, 1e-10);
        }
    }

    #[test]
    fn two_pulse_matrix_rows() {
        let m = coefficient_matrix(2).unwrap();
        // columns (a_1, a_2, b_1, b_2); the reference row is over (a_2, a_1, b_2, b_1)
        let d1 = [m[(1, 1)], m[(1, 0)], m[(1, 3)], m[(1, 2)]];
        assert_eq!(d1, [c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5), c(0.0, 0.5)]);
        let inner: Complex64 = (0..4).map(|k| m[(0, k)] * m[(1, k)].conj()).sum();
        assert_eq!(inner, ZERO);
    }

    #[test]
    fn matrix_is_unitary() {
        for n in [2, 3, 7, 16] {
            let m = coefficient_matrix(n).unwrap();
            let gram = &m * m.adjoint();
            let dev = (gram - DMatrix::<Complex64>::identity(2 * n, 2 * n)).camax();
            assert!(dev < 1e-12, "n = {n}: deviation {dev}");
        }
        assert_eq!(coefficient_matrix(1).unwrap_err(), Error::BlockTooShort(1));
    }

    #[test]
    fn transform_matches_matrix_on_vacuum_ports() {
        let amps = vec![c(0.2, 0.1), c(-0.4, 0.3), c(0.5, -0.2)];
        let block = CoherentBlock::new(amps.clone(), 1.0).unwrap();
        let m = coefficient_matrix(3).unwrap();
        let mut input = amps;
        input.extend([ZERO; 3]);
        let out = &m * nalgebra::DVector::from_vec(input);
        let t = mz_transform(&block);
        for (k, slot) in t.slots.iter().enumerate() {
            assert!((out[2 * k] - slot.delta0).norm() < 1e-15);
            assert!((out[2 * k + 1] - slot.delta1).norm() < 1e-15);
        }
        assert!((out[4] - t.undetected[0]).norm() < 1e-15);
        assert!((out[5] - t.undetected[1]).norm() < 1e-15);
    }

    #[test]
    fn click_probabilities() {
        assert_eq!(click_probability(ZERO), 0.0);
        assert_close!(click_probability(c(0.1f64.sqrt(), 0.0)), 0.09516, 1e-5);
        assert_eq!(click_probability(c(40.0, 0.0)), 1.0);
    }

    #[test]
    fn honest_blocks_never_hit_the_wrong_detector() {
        let x = [false, true, true];
        let block = CoherentBlock::honest(&x, 0.5, 0.3).unwrap();
        let l = derive_l(&x).unwrap();
        assert_eq!(
            wrong_detector_amplitude(&block, &l).unwrap(),
            vec![ZERO, ZERO]
        );

        let zeros = [false; 5];
        let block = CoherentBlock::honest(&zeros, 1.3, 1.0).unwrap();
        let l = derive_l(&zeros).unwrap();
        assert!(wrong_detector_amplitude(&block, &l)
            .unwrap()
            .iter()
            .all(|a| *a == ZERO));
    }

    #[test]
    fn unequal_intensity_leaks_into_wrong_detector() {
        let x = [false, true, true, false];
        let honest = CoherentBlock::honest(&x, 0.5, 1.0).unwrap();
        let mut amps = honest.amplitudes().to_vec();
        amps[2] *= 0.5;
        let tampered = CoherentBlock::new(amps, 1.0).unwrap();
        let wrong = wrong_detector_amplitude(&tampered, &derive_l(&x).unwrap()).unwrap();
        // pulse 3 feeds slots 3 and 4 (indices 1 and 2); |0.5 a - a| / 2 = a / 4
        assert_eq!(wrong[0], ZERO);
        assert_close!(wrong[1].norm(), 0.125, 1e-15);
        assert_close!(wrong[2].norm(), 0.125, 1e-15);
    }

    #[test]
    fn block_validation() {
        assert_eq!(
            CoherentBlock::new(vec![ZERO], 1.0).unwrap_err(),
            Error::BlockTooShort(1)
        );
        assert!(CoherentBlock::honest(&[true, false], -1.0, 1.0).is_err());
        assert!(CoherentBlock::honest(&[true, false], 1.0, 1.5).is_err());
        let block = CoherentBlock::honest(&[true, false, true], 1.0, 1.0).unwrap();
        assert!(matches!(
            wrong_detector_amplitude(&block, &[true]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
