//! Monte-Carlo harness: seeded scenario realizations, one denoising run per
//! realization, and per-run / averaged SNR records.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::format::key_values;
use crate::metrics::{clean_subset_probability, snr_db};
use crate::noise::{
    derive_seed, gen_gaussian_noise, gen_impulsive_noise_split, gen_sparse_signal, stream_rng, NoiseSpec,
    SignalSpec, Stream,
};
use crate::ransac::{
    default_consensus_threshold, inlier_bound, ransac_denoise_with, robust_sigma, ConfigWarning, DenoiseOutcome,
    RansacConfig, DEFAULT_BOUND_MULTIPLIER, DEFAULT_MAX_TRIALS,
};
use crate::recovery::{MatchingPursuit, SparseSpectrum};
use crate::transform::ComplexSignal;

/// How the inlier bound `d` is chosen for each run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundRule {
    /// `2.5·√2·σ̂` with `σ̂` the MAD estimate of the noisy signal.
    Auto,
    /// `2.5·√2·σ_ε` with the scenario's own noise level.
    Sigma,
    Fixed(f64),
}

impl BoundRule {
    pub fn resolve(&self, noisy: &ComplexSignal, sigma: f64) -> f64 {
        match *self {
            BoundRule::Auto => inlier_bound(robust_sigma(noisy).combined_sigma, DEFAULT_BOUND_MULTIPLIER, true),
            BoundRule::Sigma => inlier_bound(sigma, DEFAULT_BOUND_MULTIPLIER, true),
            BoundRule::Fixed(d) => d,
        }
    }
}

impl FromStr for BoundRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(BoundRule::Auto),
            "sigma" => Ok(BoundRule::Sigma),
            other => {
                let d: f64 = other
                    .parse()
                    .map_err(|_| invalid(format!("bound must be auto, sigma or a number, got {other:?}")))?;
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(invalid(format!("bound must be finite and non-negative, got {d}")));
                }
                Ok(BoundRule::Fixed(d))
            }
        }
    }
}

impl fmt::Display for BoundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundRule::Auto => f.write_str("auto"),
            BoundRule::Sigma => f.write_str("sigma"),
            BoundRule::Fixed(d) => write!(f, "{d:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentScenario {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Number of impulsive outliers `I`.
    pub outliers: usize,
    /// Gaussian deviation per real/imaginary part.
    pub sigma: f64,
    pub outlier_offset: Complex64,
    pub cauchy_scale: f64,
    pub amplitude: (f64, f64),
    pub bound: BoundRule,
    /// `None` means `⌈3N/4⌉`.
    pub threshold: Option<usize>,
    pub max_trials: usize,
    pub runs: usize,
    pub master_seed: u64,
}

impl Default for ExperimentScenario {
    fn default() -> Self {
        Self {
            n: 128,
            k: 5,
            m: 32,
            outliers: 16,
            sigma: 0.5,
            outlier_offset: Complex64::new(0.0, 0.0),
            cauchy_scale: 3.0,
            amplitude: (1.0, 1.0),
            bound: BoundRule::Auto,
            threshold: None,
            max_trials: DEFAULT_MAX_TRIALS,
            runs: 100,
            master_seed: 42,
        }
    }
}

/// Non-fatal scenario issues.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    Config(ConfigWarning),
    /// `M > N − I`: no outlier-free subset exists.
    NoCleanSubset { m: usize, clean: usize },
}

impl fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioWarning::Config(w) => w.fmt(f),
            ScenarioWarning::NoCleanSubset { m, clean } => write!(
                f,
                "subset size {m} exceeds the {clean} clean samples; consensus is unlikely"
            ),
        }
    }
}

impl ExperimentScenario {
    pub fn consensus_threshold(&self) -> usize {
        self.threshold.unwrap_or_else(|| default_consensus_threshold(self.n))
    }

    pub fn signal_spec(&self, seed: u64) -> SignalSpec {
        SignalSpec {
            length: self.n,
            sparsity: self.k,
            amplitude_range: self.amplitude,
            seed,
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            gaussian_sigma: self.sigma,
            outlier_count: self.outliers,
            cauchy_scale: self.cauchy_scale,
            outlier_offset: self.outlier_offset,
        }
    }

    /// Checks everything a run needs. Returns soft warnings.
    pub fn validate(&self) -> Result<Vec<ScenarioWarning>> {
        if self.runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        self.signal_spec(0).validate()?;
        self.noise_spec().validate(self.n)?;
        let cfg = RansacConfig {
            subset_size: self.m,
            inlier_bound: 0.0,
            consensus_threshold: self.consensus_threshold(),
            max_trials: self.max_trials,
            sparsity: self.k,
            rng_seed: 0,
        };
        let mut warnings: Vec<ScenarioWarning> =
            cfg.validate(self.n)?.into_iter().map(ScenarioWarning::Config).collect();
        if self.m > self.n - self.outliers {
            warnings.push(ScenarioWarning::NoCleanSubset {
                m: self.m,
                clean: self.n - self.outliers,
            });
        }
        Ok(warnings)
    }

    /// Parses `key = value` lines; see [`ExperimentScenario::set`] for keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (line, key, value) in key_values(text)? {
            s.set(key, value).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(s)
    }

    /// Sets one field by name. Keys: `n`, `k`, `m`, `i`, `sigma`,
    /// `offset_real`, `offset_imag`, `cauchy_scale`, `amplitude_low`,
    /// `amplitude_high`, `d`, `t`, `nmax`, `runs`, `seed`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| invalid(format!("bad value {v:?} for {key}")))
        }
        fn real(key: &str, v: &str) -> Result<f64> {
            let x: f64 = num(key, v)?;
            if !x.is_finite() {
                return Err(invalid(format!("{key} must be finite")));
            }
            Ok(x)
        }
        match key {
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "i" | "outliers" => self.outliers = num(key, value)?,
            "sigma" => self.sigma = real(key, value)?,
            "offset_real" | "offset-real" => self.outlier_offset.re = real(key, value)?,
            "offset_imag" | "offset-imag" => self.outlier_offset.im = real(key, value)?,
            "cauchy_scale" | "cauchy-scale" => self.cauchy_scale = real(key, value)?,
            "amplitude_low" | "amplitude-low" => self.amplitude.0 = real(key, value)?,
            "amplitude_high" | "amplitude-high" => self.amplitude.1 = real(key, value)?,
            "d" => self.bound = value.parse()?,
            "t" => {
                self.threshold = match value {
                    "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "nmax" | "n_max" => self.max_trials = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            other => return Err(invalid(format!("unknown scenario key {other:?}"))),
        }
        Ok(())
    }

    /// Serializes to the `key = value` form accepted by [`parse`](Self::parse).
    pub fn to_key_values(&self) -> String {
        let t = self.threshold.map_or_else(|| "auto".to_string(), |t| t.to_string());
        format!(
            "n = {}\nk = {}\nm = {}\ni = {}\nsigma = {:?}\noffset_real = {:?}\noffset_imag = {:?}\n\
             cauchy_scale = {:?}\namplitude_low = {:?}\namplitude_high = {:?}\nd = {}\nt = {}\n\
             nmax = {}\nruns = {}\nseed = {}\n",
            self.n,
            self.k,
            self.m,
            self.outliers,
            self.sigma,
            self.outlier_offset.re,
            self.outlier_offset.im,
            self.cauchy_scale,
            self.amplitude.0,
            self.amplitude.1,
            self.bound,
            t,
            self.max_trials,
            self.runs,
            self.master_seed
        )
    }
}

/// One seeded draw of a scenario's signal and noise.
#[derive(Debug, Clone)]
pub struct Realization {
    pub clean: ComplexSignal,
    pub truth: SparseSpectrum,
    pub gaussian: ComplexSignal,
    pub impulsive: ComplexSignal,
    pub outlier_positions: Vec<usize>,
    /// `clean + gaussian + impulsive`
    pub noisy: ComplexSignal,
    /// `clean + gaussian`
    pub inlier_noisy: ComplexSignal,
    pub ransac_seed: u64,
}

/// Seed of run `run_index` under `master_seed`.
pub fn run_seed(master_seed: u64, run_index: usize) -> u64 {
    derive_seed(master_seed, Stream::Run, run_index as u64)
}

/// Draws the signal and noise of run `run_index`. Signal, Gaussian noise,
/// outlier positions and outlier values use separate streams, so changing
/// the outlier count leaves the signal and Gaussian noise unchanged.
pub fn realize(s: &ExperimentScenario, run_index: usize) -> Result<Realization> {
    let seed = run_seed(s.master_seed, run_index);
    let (clean, truth) = gen_sparse_signal(&s.signal_spec(seed))?;
    let gaussian = gen_gaussian_noise(s.n, s.sigma, &mut stream_rng(seed, Stream::Gaussian))?;
    let (impulsive, outlier_positions) = gen_impulsive_noise_split(
        s.n,
        &s.noise_spec(),
        &mut stream_rng(seed, Stream::OutlierPositions),
        &mut stream_rng(seed, Stream::OutlierValues),
    )?;
    let inlier_noisy = clean.add(&gaussian)?;
    let noisy = inlier_noisy.add(&impulsive)?;
    Ok(Realization {
        clean,
        truth,
        gaussian,
        impulsive,
        outlier_positions,
        noisy,
        inlier_noisy,
        ransac_seed: derive_seed(seed, Stream::Ransac, 0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub trials: usize,
    pub consensus_size: usize,
    pub snr_in: f64,
    pub snr_in0: f64,
    pub snr_out0: f64,
    pub snr_out: f64,
    pub reached_consensus: bool,
}

/// Column means of a set of run records, in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub trials: f64,
    pub snr_in: f64,
    pub snr_in0: f64,
    pub snr_out0: f64,
    pub snr_out: f64,
    pub consensus_size: f64,
    /// Fraction of runs that reached consensus.
    pub consensus_rate: f64,
}

impl Summary {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(invalid("no run records"));
        }
        let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / records.len() as f64;
        Ok(Self {
            trials: mean(&|r| r.trials as f64),
            snr_in: mean(&|r| r.snr_in),
            snr_in0: mean(&|r| r.snr_in0),
            snr_out0: mean(&|r| r.snr_out0),
            snr_out: mean(&|r| r.snr_out),
            consensus_size: mean(&|r| r.consensus_size as f64),
            consensus_rate: mean(&|r| if r.reached_consensus { 1.0 } else { 0.0 }),
        })
    }
}

/// A denoising run with everything needed for scoring.
#[derive(Debug, Clone)]
pub struct RunDetail {
    pub realization: Realization,
    pub inlier_bound: f64,
    pub outcome: DenoiseOutcome,
    pub record: RunRecord,
}

/// Runs one realization through the consensus search and scores it.
pub fn run_once(s: &ExperimentScenario, run_index: usize, mp: &MatchingPursuit) -> Result<RunDetail> {
    let realization = realize(s, run_index)?;
    let d = s.bound.resolve(&realization.noisy, s.sigma);
    let cfg = RansacConfig {
        subset_size: s.m,
        inlier_bound: d,
        consensus_threshold: s.consensus_threshold(),
        max_trials: s.max_trials,
        sparsity: s.k,
        rng_seed: realization.ransac_seed,
    };
    let outcome = ransac_denoise_with(&realization.noisy, &cfg, mp)?;
    let clean = &realization.clean;
    let subset_estimate = outcome.subset_estimate.as_ref().unwrap_or(&realization.noisy);
    let record = RunRecord {
        run_index,
        trials: outcome.trials_used,
        consensus_size: outcome.consensus_size(),
        snr_in: snr_db(clean, &realization.noisy)?,
        snr_in0: snr_db(clean, &realization.inlier_noisy)?,
        snr_out0: snr_db(clean, subset_estimate)?,
        snr_out: snr_db(clean, &outcome.reconstructed)?,
        reached_consensus: outcome.reached_consensus,
    };
    Ok(RunDetail {
        realization,
        inlier_bound: d,
        outcome,
        record,
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub scenario: ExperimentScenario,
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    pub warnings: Vec<ScenarioWarning>,
}

impl ExperimentReport {
    /// Theoretical `1/P(M, N, I)`, if any clean subset exists.
    pub fn predicted_trials(&self) -> Option<f64> {
        let s = &self.scenario;
        clean_subset_probability(s.m, s.n, s.outliers)
            .ok()
            .filter(|&p| p > 0.0)
            .map(|p| 1.0 / p)
    }
}

/// Runs every seeded realization of a scenario in run order.
pub fn run_experiment(s: &ExperimentScenario) -> Result<ExperimentReport> {
    let warnings = s.validate()?;
    let mp = MatchingPursuit::new(s.n);
    let records = (0..s.runs)
        .map(|i| run_once(s, i, &mp).map(|d| d.record))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_records(&records)?;
    Ok(ExperimentReport {
        scenario: s.clone(),
        records,
        summary,
        warnings,
    })
}
