//! Consensus search over random sample subsets.
//!
//! Each trial reconstructs the signal from `M` randomly chosen samples and
//! collects every sample lying within the inlier bound of that
//! reconstruction. The search stops at the first trial whose consensus set
//! reaches the threshold `T` (or after `N_max` trials), and the final
//! estimate is reconstructed from the largest consensus set found.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::noise::partial_shuffle;
use crate::recovery::{MatchingPursuit, MeasurementSet, SparseSpectrum};
use crate::transform::{check_len, ComplexSignal};

/// Ratio of the median absolute deviation to the standard deviation of a
/// Gaussian variable.
pub const MAD_TO_SIGMA: f64 = 0.6745;

/// Default multiplier applied to the inlier noise scale to get the bound.
pub const DEFAULT_BOUND_MULTIPLIER: f64 = 2.5;

pub const DEFAULT_MAX_TRIALS: usize = 100_000;

/// `⌈3N/4⌉`: tolerate up to a quarter of the samples being outliers.
pub fn default_consensus_threshold(n: usize) -> usize {
    n - n / 4
}

/// Inlier bound for complex Gaussian noise of per-part deviation `sigma`:
/// `multiplier·√2·sigma` when `modulus_correction` is set (the modulus of
/// the complex error has RMS `σ√2`), else `multiplier·sigma`.
pub fn inlier_bound(sigma: f64, multiplier: f64, modulus_correction: bool) -> f64 {
    let scale = if modulus_correction {
        std::f64::consts::SQRT_2
    } else {
        1.0
    };
    multiplier * scale * sigma
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    /// Samples per random subset, `M`.
    pub subset_size: usize,
    /// Inclusive distance bound `d` for counting a sample as an inlier.
    pub inlier_bound: f64,
    /// Consensus size `T` that ends the search.
    pub consensus_threshold: usize,
    /// Trial budget `N_max`.
    pub max_trials: usize,
    /// Target sparsity `K`.
    pub sparsity: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigWarning {
    /// `K > M/5`; subset reconstructions may fail often.
    SparsityAboveGuideline { sparsity: usize, subset_size: usize },
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SparsityAboveGuideline {
                sparsity,
                subset_size,
            } => write!(
                f,
                "sparsity {sparsity} exceeds subset size {subset_size} / 5; subset reconstructions may be unreliable"
            ),
        }
    }
}

impl RansacConfig {
    /// Config with `T = ⌈3N/4⌉` and the default trial budget.
    pub fn new(n: usize, sparsity: usize, subset_size: usize, inlier_bound: f64, rng_seed: u64) -> Self {
        Self {
            subset_size,
            inlier_bound,
            consensus_threshold: default_consensus_threshold(n),
            max_trials: DEFAULT_MAX_TRIALS,
            sparsity,
            rng_seed,
        }
    }

    /// Checks the config against a signal of length `n`. Hard violations
    /// are errors; soft ones come back as warnings.
    pub fn validate(&self, n: usize) -> Result<Vec<ConfigWarning>> {
        if self.sparsity == 0 {
            return Err(invalid("sparsity must be at least 1"));
        }
        if !(self.sparsity <= self.subset_size && self.subset_size <= n) {
            return Err(invalid(format!(
                "need K <= M <= N, got K={}, M={}, N={n}",
                self.sparsity, self.subset_size
            )));
        }
        if self.consensus_threshold == 0 || self.consensus_threshold > n {
            return Err(invalid(format!(
                "consensus threshold {} outside 1..={n}",
                self.consensus_threshold
            )));
        }
        if self.max_trials == 0 {
            return Err(invalid("max trials must be at least 1"));
        }
        if !(self.inlier_bound >= 0.0) || self.inlier_bound.is_nan() {
            return Err(invalid("inlier bound must be non-negative"));
        }
        let mut warnings = Vec::new();
        if self.sparsity.saturating_mul(5) > self.subset_size {
            warnings.push(ConfigWarning::SparsityAboveGuideline {
                sparsity: self.sparsity,
                subset_size: self.subset_size,
            });
        }
        Ok(warnings)
    }
}

/// Where the returned estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalSource {
    /// Reconstruction from the consensus set.
    Consensus,
    /// The consensus set was too small (or its reconstruction failed), so
    /// the best trial's subset reconstruction is returned.
    Subset,
    /// No trial produced a reconstruction; the noisy input is passed
    /// through unchanged.
    Passthrough,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub reconstructed: ComplexSignal,
    /// Sorted consensus set of the best trial.
    pub consensus: Vec<usize>,
    pub trials_used: usize,
    pub reached_consensus: bool,
    pub final_sparse: SparseSpectrum,
    pub source: FinalSource,
    /// Reconstruction from the best trial's `M`-subset, before the
    /// consensus stage.
    pub subset_estimate: Option<ComplexSignal>,
    /// The best trial's subset indices.
    pub subset: Vec<usize>,
    /// Residual norm of the final reconstruction.
    pub residual_norm: f64,
}

impl DenoiseOutcome {
    pub fn consensus_size(&self) -> usize {
        self.consensus.len()
    }

    /// 0/1 inlier mask over all samples.
    pub fn inlier_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.reconstructed.len()];
        for &i in &self.consensus {
            mask[i] = true;
        }
        mask
    }
}

/// Indices `n` with `|model(n) − noisy(n)| ≤ d`.
pub fn consensus_set(noisy: &ComplexSignal, model: &ComplexSignal, d: f64) -> Result<Vec<usize>> {
    check_len(noisy.len(), model.len())?;
    Ok(noisy
        .samples()
        .iter()
        .zip(model.samples())
        .enumerate()
        .filter(|(_, (a, b))| (*a - *b).norm() <= d)
        .map(|(i, _)| i)
        .collect())
}

fn median_in_place(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation from the median. Even-length medians average
/// the two middle order statistics.
pub fn mad(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("median of an empty sample"));
    }
    let mut v = values.to_vec();
    let med = median_in_place(&mut v);
    for x in v.iter_mut() {
        *x = (*x - med).abs();
    }
    Ok(median_in_place(&mut v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScaleEstimate {
    pub sigma_real: f64,
    pub sigma_imag: f64,
    /// Per-part RMS `√((σ_re² + σ_im²)/2)`; equals `sigma_real` for purely
    /// real input and `sigma_imag` for purely imaginary input.
    pub combined_sigma: f64,
}

/// MAD-based deviation estimates for the real and imaginary parts.
pub fn robust_sigma(noisy: &ComplexSignal) -> NoiseScaleEstimate {
    let re: Vec<f64> = noisy.samples().iter().map(|z| z.re).collect();
    let im: Vec<f64> = noisy.samples().iter().map(|z| z.im).collect();
    let sigma_real = mad(&re).expect("signals are non-empty") / MAD_TO_SIGMA;
    let sigma_imag = mad(&im).expect("signals are non-empty") / MAD_TO_SIGMA;
    let real_only = im.iter().all(|&v| v == 0.0);
    let imag_only = re.iter().all(|&v| v == 0.0);
    let combined_sigma = match (real_only, imag_only) {
        (true, _) => sigma_real,
        (_, true) => sigma_imag,
        _ => ((sigma_real * sigma_real + sigma_imag * sigma_imag) / 2.0).sqrt(),
    };
    NoiseScaleEstimate {
        sigma_real,
        sigma_imag,
        combined_sigma,
    }
}

struct Trial {
    subset: Vec<usize>,
    consensus: Vec<usize>,
    residual: f64,
    spectrum: SparseSpectrum,
    estimate: ComplexSignal,
}

impl Trial {
    /// Larger consensus wins; equal sizes go to the smaller residual.
    fn beats(&self, other: &Trial) -> bool {
        self.consensus.len() > other.consensus.len()
            || (self.consensus.len() == other.consensus.len() && self.residual < other.residual)
    }
}

pub fn ransac_denoise(noisy: &ComplexSignal, cfg: &RansacConfig) -> Result<DenoiseOutcome> {
    ransac_denoise_with(noisy, cfg, &MatchingPursuit::new(noisy.len()))
}

/// As [`ransac_denoise`], reusing a reconstructor built for `noisy.len()`.
pub fn ransac_denoise_with(
    noisy: &ComplexSignal,
    cfg: &RansacConfig,
    mp: &MatchingPursuit,
) -> Result<DenoiseOutcome> {
    let n = noisy.len();
    cfg.validate(n)?;
    check_len(n, mp.len())?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut best: Option<Trial> = None;
    let mut trials = 0usize;

    while trials < cfg.max_trials
        && best
            .as_ref()
            .is_none_or(|b| b.consensus.len() < cfg.consensus_threshold)
    {
        trials += 1;
        let mut subset = partial_shuffle(&mut rng, &mut pool, cfg.subset_size).to_vec();
        subset.sort_unstable();
        let values = noisy.select(&subset);
        let m = MeasurementSet::new(n, subset, values)?;
        let solution = match mp.reconstruct(&m, cfg.sparsity) {
            Ok(s) => s,
            // A failed reconstruction is a consumed trial with an empty
            // consensus set.
            Err(Error::ReconstructionFailed { .. }) => continue,
            Err(e) => return Err(e),
        };
        let estimate = mp.synthesize(&solution.spectrum)?;
        let consensus = consensus_set(noisy, &estimate, cfg.inlier_bound)?;
        let trial = Trial {
            subset: m.indices().to_vec(),
            consensus,
            residual: solution.residual_norm,
            spectrum: solution.spectrum,
            estimate,
        };
        if best.as_ref().is_none_or(|b| trial.beats(b)) {
            best = Some(trial);
        }
    }

    let Some(best) = best else {
        return Ok(DenoiseOutcome {
            reconstructed: noisy.clone(),
            consensus: Vec::new(),
            trials_used: trials,
            reached_consensus: false,
            final_sparse: SparseSpectrum::empty(n)?,
            source: FinalSource::Passthrough,
            subset_estimate: None,
            subset: Vec::new(),
            residual_norm: f64::NAN,
        });
    };

    let reached_consensus = best.consensus.len() >= cfg.consensus_threshold;
    let final_fit = if best.consensus.len() >= cfg.sparsity {
        let m = MeasurementSet::new(n, best.consensus.clone(), noisy.select(&best.consensus))?;
        match mp.reconstruct(&m, cfg.sparsity) {
            Ok(sol) => Some(sol),
            Err(Error::ReconstructionFailed { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let (final_sparse, source, residual_norm) = match final_fit {
        Some(sol) => (sol.spectrum, FinalSource::Consensus, sol.residual_norm),
        None => (best.spectrum.clone(), FinalSource::Subset, best.residual),
    };
    let reconstructed = mp.synthesize(&final_sparse)?;

    Ok(DenoiseOutcome {
        reconstructed,
        consensus: best.consensus,
        trials_used: trials,
        reached_consensus,
        final_sparse,
        source,
        subset_estimate: Some(best.estimate),
        subset: best.subset,
        residual_norm,
    })
}

/// Distance of each sample from a model; exposed for reporting.
pub fn distances(noisy: &ComplexSignal, model: &ComplexSignal) -> Result<Vec<f64>> {
    check_len(noisy.len(), model.len())?;
    Ok(noisy
        .samples()
        .iter()
        .zip(model.samples())
        .map(|(a, b): (&Complex64, &Complex64)| (a - b).norm())
        .collect())
}
