//! Seeded generators for sparse test signals, Gaussian inlier noise and
//! Cauchy-type impulsive outliers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::recovery::{reconstruct_signal, SparseSpectrum};
use crate::transform::ComplexSignal;

/// Per-purpose tags for deriving independent RNG streams from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Support = 1,
    Amplitude = 2,
    Gaussian = 3,
    OutlierPositions = 4,
    OutlierValues = 5,
    Ransac = 6,
    Run = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for `tag` (and an index within it, e.g. a run number).
pub fn derive_seed(seed: u64, tag: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(seed.wrapping_add(tag as u64)) ^ index)
}

pub fn stream_rng(seed: u64, tag: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, 0))
}

/// `count` distinct indices drawn uniformly from `0..n` by a partial
/// Fisher–Yates shuffle, returned sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = partial_shuffle(rng, &mut pool, count).to_vec();
    out.sort_unstable();
    out
}

/// Moves a uniform random `count`-subset of `pool` to its front. The
/// starting order of `pool` does not affect uniformity, so a buffer can be
/// reused across draws.
pub fn partial_shuffle<'a, R: Rng + ?Sized>(
    rng: &mut R,
    pool: &'a mut [usize],
    count: usize,
) -> &'a [usize] {
    let n = pool.len();
    let count = count.min(n);
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    &pool[..count]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub length: usize,
    pub sparsity: usize,
    /// Time-domain amplitude range of each component, `[low, high]`.
    pub amplitude_range: (f64, f64),
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(length: usize, sparsity: usize, seed: u64) -> Self {
        Self {
            length,
            sparsity,
            amplitude_range: (1.0, 1.0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(invalid("signal length must be positive"));
        }
        if self.sparsity > self.length {
            return Err(invalid("sparsity exceeds signal length"));
        }
        let (lo, hi) = self.amplitude_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 {
            return Err(invalid(format!("bad amplitude range [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation of each of the real and imaginary parts.
    pub gaussian_sigma: f64,
    pub outlier_count: usize,
    pub cauchy_scale: f64,
    pub outlier_offset: Complex64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            gaussian_sigma: 0.0,
            outlier_count: 0,
            cauchy_scale: 3.0,
            outlier_offset: Complex64::new(0.0, 0.0),
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(invalid("gaussian sigma must be finite and non-negative"));
        }
        if self.outlier_count > n {
            return Err(invalid(format!(
                "outlier count {} exceeds length {n}",
                self.outlier_count
            )));
        }
        if !(self.cauchy_scale > 0.0 && self.cauchy_scale.is_finite()) {
            return Err(invalid("cauchy scale must be positive"));
        }
        if !(self.outlier_offset.re.is_finite() && self.outlier_offset.im.is_finite()) {
            return Err(invalid("outlier offset must be finite"));
        }
        Ok(())
    }
}

/// A `K`-sparse signal with distinct random frequencies, uniform random
/// phases and amplitudes uniform in `amplitude_range`.
///
/// Returns the time signal and its ground-truth spectrum. Spectrum entries
/// are DFT coefficients, so a time amplitude `A` appears as `N·A`.
pub fn gen_sparse_signal(spec: &SignalSpec) -> Result<(ComplexSignal, SparseSpectrum)> {
    spec.validate()?;
    let n = spec.length;
    let support = random_subset(&mut stream_rng(spec.seed, Stream::Support), n, spec.sparsity);
    let mut amp_rng = stream_rng(spec.seed, Stream::Amplitude);
    let (lo, hi) = spec.amplitude_range;
    let entries = support
        .into_iter()
        .map(|k| {
            let amp = lo + (hi - lo) * amp_rng.random::<f64>();
            let phase = amp_rng.random_range(0.0..2.0 * PI);
            (k, Complex64::from_polar(amp * n as f64, phase))
        })
        .collect();
    let truth = SparseSpectrum::new(n, entries)?;
    Ok((reconstruct_signal(&truth), truth))
}

/// Independent zero-mean Gaussian noise, deviation `sigma` in each part.
pub fn gen_gaussian_noise<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<ComplexSignal> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma must be finite and non-negative"));
    }
    let samples = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    ComplexSignal::new(samples)
}

const RATIO_GUARD: f64 = 1e-300;

fn gaussian_ratio<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let num: f64 = rng.sample(StandardNormal);
        let den: f64 = rng.sample(StandardNormal);
        if den.abs() >= RATIO_GUARD {
            return num / den;
        }
    }
}

/// Impulsive noise at `outlier_count` distinct random positions:
/// `s·g₁/g₂ + j·s·g₃/g₄ + offset` with standard Gaussian `gᵢ` and scale `s`,
/// zero elsewhere. Positions come from `position_rng`, values from
/// `value_rng`. Returns the noise and the sorted outlier positions.
pub fn gen_impulsive_noise_split<R1, R2>(
    n: usize,
    spec: &NoiseSpec,
    position_rng: &mut R1,
    value_rng: &mut R2,
) -> Result<(ComplexSignal, Vec<usize>)>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    spec.validate(n)?;
    let positions = random_subset(position_rng, n, spec.outlier_count);
    place_outliers(n, spec, positions, value_rng)
}

fn place_outliers<R: Rng + ?Sized>(
    n: usize,
    spec: &NoiseSpec,
    positions: Vec<usize>,
    rng: &mut R,
) -> Result<(ComplexSignal, Vec<usize>)> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for &p in &positions {
        let re = spec.cauchy_scale * gaussian_ratio(rng);
        let im = spec.cauchy_scale * gaussian_ratio(rng);
        out[p] = Complex64::new(re, im) + spec.outlier_offset;
    }
    Ok((ComplexSignal::new(out)?, positions))
}

/// [`gen_impulsive_noise_split`] drawing positions and values from one RNG.
pub fn gen_impulsive_noise<R: Rng + ?Sized>(
    n: usize,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(ComplexSignal, Vec<usize>)> {
    spec.validate(n)?;
    let positions = random_subset(rng, n, spec.outlier_count);
    place_outliers(n, spec, positions, rng)
}
