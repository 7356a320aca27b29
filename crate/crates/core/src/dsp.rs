//! Block buffers, 2M-point transforms and the overlap-save primitives that
//! every frequency-domain filter in the crate is built from.
//!
//! Conventions:
//!
//! - [`Transform::forward`] is the unnormalized DFT, so
//!   `‖forward(x)‖² = 2M·‖x‖²`.
//! - [`Transform::inverse`] carries the `1/(2M)` factor and returns real
//!   samples. A spectrum whose inverse has a noticeable imaginary part is
//!   rejected with [`Error::NotHermitian`].
//! - Overlap-save filtering keeps the *last* M outputs of the circular
//!   convolution, correlation keeps the *first* M.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};

/// Largest imaginary residue (relative to `max(1, peak)`) that the inverse
/// transform silently discards.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// M consecutive samples of a stream, tagged with their block index k.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    samples: Vec<f64>,
    index: usize,
}

impl SampleBlock {
    pub fn new(samples: Vec<f64>, index: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("a block needs at least one sample".into()));
        }
        Ok(Self { samples, index })
    }

    pub fn zeros(len: usize, index: usize) -> Self {
        Self {
            samples: vec![0.0; len.max(1)],
            index,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// 2M complex bins.
#[derive(Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectrum")
            .field("len", &self.bins.len())
            .field("energy", &self.energy())
            .finish()
    }
}

impl Spectrum {
    pub fn zeros(len: usize) -> Self {
        Self {
            bins: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_bins(bins: Vec<Complex64>) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// `Σ |bin|²`.
    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest deviation from `bin[j] = conj(bin[len-j])`, including the
    /// imaginary parts of bin 0 and the Nyquist bin.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.bins.len();
        (0..n)
            .map(|j| (self.bins[j] - self.bins[(n - j) % n].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Element-wise product `self ∘ other`.
    pub fn hadamard(&self, other: &Spectrum) -> Result<Spectrum> {
        check_len("spectrum product", self.len(), other.len())?;
        Ok(Spectrum {
            bins: self
                .bins
                .iter()
                .zip(&other.bins)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Element-wise product `self ∘ conj(other)`.
    pub fn hadamard_conj(&self, other: &Spectrum) -> Result<Spectrum> {
        check_len("spectrum product", self.len(), other.len())?;
        Ok(Spectrum {
            bins: self
                .bins
                .iter()
                .zip(&other.bins)
                .map(|(a, b)| a * b.conj())
                .collect(),
        })
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &Spectrum, scale: f64) -> Result<()> {
        check_len("spectrum update", self.len(), other.len())?;
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b * scale;
        }
        Ok(())
    }
}

/// Finite impulse response taps `s_1..s_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirCoefficients {
    taps: Vec<f64>,
}

impl FirCoefficients {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Config("an FIR filter needs at least one tap".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("FIR taps must be finite".into()));
        }
        Ok(Self { taps })
    }

    pub fn impulse() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn negated(&self) -> Self {
        Self {
            taps: self.taps.iter().map(|t| -t).collect(),
        }
    }
}

/// Forward/inverse DFT pair of one fixed length (2M for block length M).
#[derive(Clone)]
pub struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    /// Plans transforms of length `2 * block_len`.
    pub fn for_block(block_len: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::Config("block length must be at least 1".into()));
        }
        Ok(Self::with_len(2 * block_len))
    }

    fn with_len(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// Transform length (2M).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Block length M.
    pub fn block_len(&self) -> usize {
        self.len / 2
    }

    /// Unnormalized DFT of a real 2M-sample vector.
    pub fn forward(&self, x: &[f64]) -> Result<Spectrum> {
        check_len("forward transform", self.len, x.len())?;
        let mut bins: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut bins);
        Ok(Spectrum { bins })
    }

    /// DFT of `[head; tail]`, each half M samples long.
    pub fn forward_pair(&self, head: &[f64], tail: &[f64]) -> Result<Spectrum> {
        let m = self.block_len();
        check_len("transform head", m, head.len())?;
        check_len("transform tail", m, tail.len())?;
        let mut bins: Vec<Complex64> = head
            .iter()
            .chain(tail)
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.forward.process(&mut bins);
        Ok(Spectrum { bins })
    }

    /// DFT of `[0_M; x]`.
    pub fn forward_zero_head(&self, x: &[f64]) -> Result<Spectrum> {
        let zeros = vec![0.0; self.block_len()];
        self.forward_pair(&zeros, x)
    }

    /// DFT of `[x; 0]`, where `x` holds at most 2M samples.
    pub fn forward_zero_tail(&self, x: &[f64]) -> Result<Spectrum> {
        if x.len() > self.len {
            return Err(Error::LengthMismatch {
                context: "zero-padded transform",
                expected: self.len,
                actual: x.len(),
            });
        }
        let mut bins = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, &v) in bins.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut bins);
        Ok(Spectrum { bins })
    }

    /// Inverse DFT including the `1/(2M)` factor.
    pub fn inverse(&self, spectrum: &Spectrum) -> Result<Vec<f64>> {
        check_len("inverse transform", self.len, spectrum.len())?;
        let mut bins = spectrum.bins.clone();
        self.inverse.process(&mut bins);
        let scale = 1.0 / self.len as f64;
        let mut peak = 0.0_f64;
        let mut residue = 0.0_f64;
        for b in &bins {
            peak = peak.max(b.re.abs());
            residue = residue.max(b.im.abs());
        }
        peak *= scale;
        residue *= scale;
        if residue > IMAG_RESIDUE_TOL * peak.max(1.0) || residue.is_nan() {
            return Err(Error::NotHermitian { residue });
        }
        Ok(bins.iter().map(|b| b.re * scale).collect())
    }
}

/// Last M samples of `IFFT(FFT([prev; cur]) ∘ coeff_spectrum)`.
///
/// When `coeff_spectrum` is the transform of at most M+1 taps padded with
/// zeros, this equals the linear convolution of the stream with the taps at
/// the positions of `cur`.
pub fn overlap_save_filter(
    transform: &Transform,
    prev: &[f64],
    cur: &[f64],
    coeff_spectrum: &Spectrum,
) -> Result<Vec<f64>> {
    let input = transform.forward_pair(prev, cur)?;
    filter_spectrum(transform, &input, coeff_spectrum)
}

/// Same as [`overlap_save_filter`] with the input already transformed.
pub fn filter_spectrum(
    transform: &Transform,
    input_spectrum: &Spectrum,
    coeff_spectrum: &Spectrum,
) -> Result<Vec<f64>> {
    let mut out = transform.inverse(&input_spectrum.hadamard(coeff_spectrum)?)?;
    Ok(out.split_off(transform.block_len()))
}

/// First M samples of `IFFT(error_spectrum ∘ conj(input_spectrum))`.
///
/// With `error_spectrum = FFT([0; e])` and `input_spectrum = FFT([x(k-1); x(k)])`
/// entry ℓ is `Σ_j e_j · x(kM + j - ℓ)`, the block gradient of one channel.
pub fn overlap_save_correlate(
    transform: &Transform,
    error_spectrum: &Spectrum,
    input_spectrum: &Spectrum,
) -> Result<Vec<f64>> {
    let mut out = transform.inverse(&error_spectrum.hadamard_conj(input_spectrum)?)?;
    out.truncate(transform.block_len());
    Ok(out)
}

/// Causal direct-form convolution, `y(n) = Σ_m taps[m] · x(n - m)` with zero
/// history. The output has the length of the input.
pub fn fir_filter_direct(signal: &[f64], taps: &FirCoefficients) -> Vec<f64> {
    let taps = taps.taps();
    (0..signal.len())
        .map(|n| {
            taps.iter()
                .take(n + 1)
                .enumerate()
                .map(|(m, t)| t * signal[n - m])
                .sum()
        })
        .collect()
}

/// Deterministic random source: identical seeds give bit-identical streams.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for trial `trial` (seed xor trial index).
    pub fn for_trial(seed: u64, trial: usize) -> Self {
        Self::new(seed ^ trial as u64)
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.inner.random::<f64>()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform_vec(&mut self, lo: f64, hi: f64, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.uniform(lo, hi)).collect()
    }

    pub fn gaussian_vec(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.gaussian()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, &v)| {
                        let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                        Complex64::new(v * ang.cos(), v * ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn forward_of_zeros_is_zero() {
        let t = Transform::for_block(4).unwrap();
        let s = t.forward(&[0.0; 8]).unwrap();
        assert!(s.bins().iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let t = Transform::for_block(4).unwrap();
        let mut x = [0.0; 8];
        x[0] = 1.0;
        let s = t.forward(&x).unwrap();
        for b in s.bins() {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_block_matches_direct_dft() {
        let t = Transform::for_block(2).unwrap();
        let x = [1.0, 1.0, 1.0, 1.0];
        let s = t.forward(&x).unwrap();
        let oracle = dft(&x);
        let expected = [4.0, 0.0, 0.0, 0.0];
        for ((b, o), e) in s.bins().iter().zip(&oracle).zip(expected) {
            assert!((b - o).norm() < 1e-12);
            assert!((b - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_constant_bin() {
        let t = Transform::for_block(2).unwrap();
        let s = Spectrum::from_bins(vec![
            Complex64::new(4.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        let x = t.inverse(&s).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert!(t
            .inverse(&Spectrum::zeros(4))
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_small_vector() {
        let t = Transform::for_block(2).unwrap();
        let x = [0.3, -0.7, 0.1, 0.9];
        let back = t.inverse(&t.forward(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        let t = Transform::for_block(4).unwrap();
        assert!(matches!(
            t.forward(&[0.0; 7]),
            Err(Error::LengthMismatch {
                expected: 8,
                actual: 7,
                ..
            })
        ));
        assert!(t.inverse(&Spectrum::zeros(6)).is_err());
        assert!(Transform::for_block(0).is_err());
    }

    #[test]
    fn non_hermitian_spectrum_is_rejected() {
        let t = Transform::for_block(2).unwrap();
        let mut bins = vec![Complex64::new(0.0, 0.0); 4];
        bins[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            t.inverse(&Spectrum::from_bins(bins)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn identity_filter_passes_current_block() {
        let t = Transform::for_block(4).unwrap();
        let coeff = t.forward_zero_tail(&[1.0]).unwrap();
        let prev = [9.0, 8.0, 7.0, 6.0];
        let cur = [1.0, -2.0, 3.0, -4.0];
        let y = overlap_save_filter(&t, &prev, &cur, &coeff).unwrap();
        for (a, b) in y.iter().zip(cur) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_delay_filter() {
        let t = Transform::for_block(2).unwrap();
        let coeff = t.forward_zero_tail(&[0.0, 1.0]).unwrap();
        let (a, b, c, d) = (0.4, -1.3, 2.2, 0.7);
        let y = overlap_save_filter(&t, &[a, b], &[c, d], &coeff).unwrap();
        assert!((y[0] - b).abs() < 1e-14 && (y[1] - c).abs() < 1e-14);
        let z = overlap_save_filter(&t, &[0.0; 2], &[0.0; 2], &coeff).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn correlation_picks_history() {
        let t = Transform::for_block(2).unwrap();
        let hist = [0.25, -1.5, 2.0, 0.75]; // g(-1), g(0), g(1), g(2)
        let gs = t.forward(&hist).unwrap();
        let es = t.forward_zero_head(&[1.0, 0.0]).unwrap();
        let grad = overlap_save_correlate(&t, &es, &gs).unwrap();
        assert!((grad[0] - 2.0).abs() < 1e-14);
        assert!((grad[1] + 1.5).abs() < 1e-14);

        let zero = t.forward_zero_head(&[0.0, 0.0]).unwrap();
        assert!(overlap_save_correlate(&t, &zero, &gs)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn correlation_lag_zero_is_energy() {
        let t = Transform::for_block(4).unwrap();
        let e = [0.5, 0.5, -0.5, 0.5];
        let gs = t.forward_pair(&[0.3, 0.1, -0.2, 0.9], &e).unwrap();
        let es = t.forward_zero_head(&e).unwrap();
        let grad = overlap_save_correlate(&t, &es, &gs).unwrap();
        assert!((grad[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn direct_fir_hand_cases() {
        let id = fir_filter_direct(&[3.0, 5.0, 7.0], &FirCoefficients::impulse());
        assert_eq!(id, vec![3.0, 5.0, 7.0]);
        let delay = FirCoefficients::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(
            fir_filter_direct(&[3.0, 5.0, 7.0], &delay),
            vec![0.0, 3.0, 5.0]
        );
        let sum = FirCoefficients::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            fir_filter_direct(&[1.0, 1.0, 1.0], &sum),
            vec![1.0, 2.0, 2.0]
        );
        assert!(FirCoefficients::new(vec![]).is_err());
    }

    #[test]
    fn seeded_rng_is_reproducible() {
        let mut a = SeededRng::new(7);
        let mut b = SeededRng::new(7);
        let xa = a.uniform_vec(-1.0, 1.0, 64);
        let xb = b.uniform_vec(-1.0, 1.0, 64);
        assert_eq!(xa, xb);
        assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
        assert_ne!(SeededRng::for_trial(7, 1).uniform(0.0, 1.0), xa[0]);
    }

    #[test]
    fn sample_block_requires_samples() {
        assert!(SampleBlock::new(vec![], 0).is_err());
        let b = SampleBlock::new(vec![1.0, 2.0], 3).unwrap();
        assert_eq!((b.len(), b.index()), (2, 3));
    }
}
